#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcd/diagnostics.hpp"
#include "nlcd/evolution.hpp"
#include "nlcd/profile.hpp"

namespace nlcd {

/// One row of the aggregate verification report. `anchor` is the stable
/// check identifier; monitor rows report fitted constants and never fail.
struct CheckRow {
    std::string anchor;
    bool pass = false;
    bool monitor = false;
    double worst = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckRow> rows;

    bool all_pass() const {
        for (const auto& r : rows) {
            if (!r.monitor && !r.pass) return false;
        }
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& r : rows) {
            out.push_back({{"anchor", r.anchor},
                           {"pass", r.pass},
                           {"monitor", r.monitor},
                           {"worst", r.worst},
                           {"detail", r.detail}});
        }
        return out;
    }
};

struct VerifyOptions {
    double mass_rel_tol = 1e-10;
    double stability_tol = 1e-9;
    double sign_tol = 1e-9;
    double dissipation_tol_factor = 10.0;
    double lemma_slack_tol = 1e-12;
    // Decay-fit window [t_final / window_divisor, t_final] and admissible
    // slope bands.
    double window_divisor = 16.0;
    double p2_slope_lo = -0.30, p2_slope_hi = -0.20;
    double p4_slope_lo = -0.43, p4_slope_hi = -0.32;
    double l1_slope_lo = -0.02, l1_slope_hi = 0.005;
    // Renormalized-error checks (need a profile): ratio e(t_hi)/e(t_lo) and
    // trailing monotonicity with 5% jitter over the last three decades.
    double error_ratio_max = 0.5;
    double error_jitter = 1.05;
    std::optional<double> error_t_lo;
    std::optional<double> error_t_hi;
};

inline std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

namespace detail {

inline CheckRow monotone_row(const std::string& anchor,
                             const std::vector<double>& values, double tol) {
    CheckRow row;
    row.anchor = anchor;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
        worst = std::max(worst, values[k + 1] - values[k]);
    }
    row.worst = worst;
    row.pass = worst <= tol;
    row.detail = "max increase " + format_g(worst);
    return row;
}

}  // namespace detail

/// Runs every per-run check and returns one row per claim. A profile
/// enables the self-similar convergence rows; a paired run enables the
/// comparison row.
inline VerifyReport verify_run(const RunRecord& run,
                               const Profile* profile = nullptr,
                               const RunRecord* paired = nullptr,
                               const VerifyOptions& opt = {}) {
    VerifyReport report;
    const auto& series = run.series;
    const auto& t = series.times;

    {
        CheckRow row;
        row.anchor = "mass_conservation";
        double worst = 0.0;
        for (double m : series.channel("mass")) {
            worst = std::max(worst, std::abs(m - run.mass0));
        }
        row.worst = worst;
        row.pass = worst <= opt.mass_rel_tol * (1.0 + std::abs(run.mass0));
        row.detail = "max |mass - m| = " + format_g(worst);
        report.rows.push_back(row);
    }

    report.rows.push_back(
        detail::monotone_row("l1_stability", series.channel("L1"), opt.stability_tol));
    report.rows.push_back(detail::monotone_row("linf_stability",
                                               series.channel("Linf"),
                                               opt.stability_tol));

    {
        double min_phi = 0.0;
        for (double v : run.initial().u.values) min_phi = std::min(min_phi, v);
        CheckRow row;
        row.anchor = "sign_preservation";
        if (min_phi < 0.0) {
            row.monitor = true;
            row.pass = true;
            row.detail = "initial data signed; check not applicable";
        } else {
            double worst = 0.0;
            for (const auto& snap : run.snapshots) {
                for (double v : snap.u.values) worst = std::min(worst, v);
            }
            row.worst = worst;
            row.pass = worst >= -opt.sign_tol;
            row.detail = "min u = " + format_g(worst);
        }
        report.rows.push_back(row);
    }

    {
        CheckRow row;
        row.anchor = "energy_dissipation";
        const auto diss = check_dissipation(run, opt.dissipation_tol_factor);
        row.pass = diss.pass;
        row.worst = diss.worst_margin;
        row.detail = "worst margin " + format_g(diss.worst_margin) + " at pair " +
                     std::to_string(diss.worst_pair);
        report.rows.push_back(row);
    }

    {
        CheckRow row;
        row.anchor = "i2_i1_domination";
        double min_phi = 0.0;
        for (double v : run.initial().u.values) min_phi = std::min(min_phi, v);
        if (min_phi < 0.0) {
            row.monitor = true;
            row.pass = true;
            row.detail = "initial data signed; check not applicable";
        } else {
            double worst_slack = std::numeric_limits<double>::infinity();
            bool ok = true;
            for (const auto& snap : run.snapshots) {
                const auto rep =
                    check_lemma_i2i1(snap.u, run.K, run.G, 2, run.report.c_gk);
                worst_slack = std::min(worst_slack, rep.slack);
                ok = ok && rep.pass;
            }
            row.pass = ok;
            row.worst = worst_slack;
            row.detail = "worst slack " + format_g(worst_slack);
        }
        report.rows.push_back(row);
    }

    const double t_final = t.back();
    const double window_lo = t_final / opt.window_divisor;
    auto fit_row = [&](const std::string& anchor, const std::string& channel,
                       double lo, double hi) {
        CheckRow row;
        row.anchor = anchor;
        try {
            const auto fit = fit_decay_exponent(series, channel, window_lo, t_final);
            row.worst = fit.slope;
            row.pass = fit.slope >= lo && fit.slope <= hi;
            row.detail = "slope " + format_g(fit.slope) + " in [" + format_g(lo) +
                         ", " + format_g(hi) + "]? (" +
                         std::to_string(fit.points) + " pts)";
        } catch (const InsufficientData& e) {
            row.pass = false;
            row.detail = e.what();
        }
        return row;
    };
    report.rows.push_back(
        fit_row("decay_exponent_p2", "L2", opt.p2_slope_lo, opt.p2_slope_hi));
    report.rows.push_back(
        fit_row("decay_exponent_p4", "L4", opt.p4_slope_lo, opt.p4_slope_hi));
    report.rows.push_back(
        fit_row("l1_boundedness", "L1", opt.l1_slope_lo, opt.l1_slope_hi));

    if (profile != nullptr) {
        // Pick snapshot times for the ratio check: near t_final/80 and the
        // largest snapshot <= 0.8 t_final, unless pinned by the options.
        double t_lo = opt.error_t_lo.value_or(0.0);
        double t_hi = opt.error_t_hi.value_or(0.0);
        if (t_lo <= 0.0 || t_hi <= 0.0) {
            for (double tk : t) {
                if (tk <= 0.0) continue;
                if (t_lo <= 0.0 && tk >= t_final / 80.0 * (1.0 - 1e-9)) t_lo = tk;
                if (tk <= 0.8 * t_final * (1.0 + 1e-9)) t_hi = tk;
            }
        }
        for (double p : {1.0, 2.0}) {
            CheckRow row;
            row.anchor = p == 1.0 ? "self_similar_convergence_l1"
                                  : "self_similar_convergence_l2";
            const double e_lo = renormalized_error(run, *profile, p, t_lo);
            const double e_hi = renormalized_error(run, *profile, p, t_hi);
            const double ratio = e_lo > 0.0 ? e_hi / e_lo
                                            : std::numeric_limits<double>::infinity();
            row.worst = ratio;
            row.pass = ratio <= opt.error_ratio_max;
            row.detail = "e(" + format_g(t_hi) + ")/e(" + format_g(t_lo) +
                         ") = " + format_g(ratio);
            report.rows.push_back(row);
        }
        {
            CheckRow row;
            row.anchor = "self_similar_monotonicity_l1";
            double worst_ratio = 0.0;
            double prev = -1.0;
            for (double tk : t) {
                if (tk < t_final / 1000.0 || tk <= 0.0) continue;
                const double e = renormalized_error(run, *profile, 1.0, tk);
                if (prev > 0.0 && e > 0.0) {
                    worst_ratio = std::max(worst_ratio, e / prev);
                }
                prev = e;
            }
            row.worst = worst_ratio;
            row.pass = worst_ratio <= opt.error_jitter;
            row.detail = "worst step ratio " + format_g(worst_ratio);
            report.rows.push_back(row);
        }
    }

    {
        CheckRow row;
        row.anchor = "tail_bound_fit";
        row.monitor = true;
        const double R_fit = 10.0 * std::sqrt(std::max(run.report.A, 1e-6) *
                                              run.t_final);
        if (2.0 * R_fit < run.grid.half_length) {
            const auto tail = check_tail_bound(run, R_fit);
            row.pass = true;
            row.worst = tail.c_fit;
            row.detail = "fitted C = " + format_g(tail.c_fit) + " at R = " +
                         format_g(R_fit);
        } else {
            row.pass = true;
            row.detail = "domain too small for the fit radius; skipped";
        }
        report.rows.push_back(row);
    }

    if (paired != nullptr) {
        CheckRow row;
        row.anchor = "comparison_principle";
        const auto cmp = comparison_check(run, *paired);
        row.pass = cmp.pass;
        row.worst = cmp.max_violation;
        row.detail = "max violation " + format_g(cmp.max_violation) + " at t = " +
                     format_g(cmp.worst_time);
        report.rows.push_back(row);
    }

    return report;
}

}  // namespace nlcd
