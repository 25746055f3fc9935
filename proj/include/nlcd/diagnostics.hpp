#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "nlcd/discretization.hpp"
#include "nlcd/errors.hpp"
#include "nlcd/evolution.hpp"
#include "nlcd/grid.hpp"
#include "nlcd/profile.hpp"
#include "nlcd/series.hpp"

namespace nlcd {

/// C(p) of the convection-domination inequality: 1/4 for p = 2,
/// p/(p+1) for integer p >= 3.
inline double lemma_constant(int p) {
    if (p < 2) throw ConfigInvalid("lemma_constant: p must be >= 2");
    if (p == 2) return 0.25;
    return static_cast<double>(p) / static_cast<double>(p + 1);
}

namespace detail {

inline double pow_int(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

constexpr std::size_t kDirectSumLimit = 2048;

}  // namespace detail

/// Diffusive dissipation functional with exponent p:
///   I1 = h^2 sum_{i,j} K_{i-j} (u_i - u_j)(u_i^{p-1} - u_j^{p-1}).
/// Direct double sum up to N = 2048; beyond that the algebraically equal
/// convolution form 2 <u^{p-1}, u - K*u> (unit-mass K) is used.
inline double energy_I1(const GridFunction& u, const DiscreteKernel& K, int p) {
    require_same_grid(u.grid, K.grid, "energy_I1");
    if (p < 2) throw ConfigInvalid("energy_I1: p must be >= 2");
    const std::size_t n = u.size();
    const double h = u.grid.spacing();
    if (n <= detail::kDirectSumLimit) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = u[i];
            const double uip = detail::pow_int(ui, p - 1);
            for (std::size_t j = 0; j < n; ++j) {
                const double w = K.weights[(i + n - j) % n];
                const double uj = u[j];
                s += w * (ui - uj) * (uip - detail::pow_int(uj, p - 1));
            }
        }
        return h * h * s;
    }
    const GridFunction ku = convolve(K, u);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += detail::pow_int(u[i], p - 1) * (u[i] - ku[i]);
    }
    return 2.0 * h * s;
}

inline double energy_I1(const GridFunction& u, const DiscreteKernel& K) {
    return energy_I1(u, K, 2);
}

/// Convective functional
///   I2 = h^2 sum_{i,j} G_{i-j} (u_j^2 u_i^{p-1} / 4 + u_j u_i^p / 2),
/// evaluated as a direct double sum. Stated for nonnegative u.
inline double energy_I2(const GridFunction& u, const DiscreteKernel& G, int p) {
    require_same_grid(u.grid, G.grid, "energy_I2");
    if (p < 2) throw ConfigInvalid("energy_I2: p must be >= 2");
    double min_u = 0.0;
    for (double v : u.values) min_u = std::min(min_u, v);
    if (min_u < -1e-12) {
        throw NegativityViolation("energy_I2: min(u) = " + std::to_string(min_u));
    }
    const std::size_t n = u.size();
    const double h = u.grid.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double uip1 = detail::pow_int(u[i], p - 1);
        const double uip = uip1 * u[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double w = G.weights[(i + n - j) % n];
            s += w * (0.25 * u[j] * u[j] * uip1 + 0.5 * u[j] * uip);
        }
    }
    return h * h * s;
}

struct LemmaReport {
    int p = 2;
    double i2_abs = 0.0;
    double bound = 0.0;  // C(p) C_GK ||u||_inf I1
    double slack = 0.0;  // bound - |I2|
    bool pass = false;
};

/// |I2| <= C(p) C_GK ||u||_inf I1 for nonnegative u.
inline LemmaReport check_lemma_i2i1(const GridFunction& u, const DiscreteKernel& K,
                                    const DiscreteKernel& G, int p, double c_gk) {
    LemmaReport rep;
    rep.p = p;
    rep.i2_abs = std::abs(energy_I2(u, G, p));
    const double i1 = energy_I1(u, K, p);
    const double sup = lp_norm(u, std::numeric_limits<double>::infinity());
    rep.bound = lemma_constant(p) * c_gk * sup * i1;
    rep.slack = rep.bound - rep.i2_abs;
    rep.pass = rep.slack >= -1e-12 * std::max({1.0, rep.bound, rep.i2_abs});
    return rep;
}

struct PolyInequalityReport {
    int p = 2;
    double max_violation = 0.0;  // relative, >= 0
    double worst_z = 1.0;
    bool pass = false;
};

/// Verifies the scalar inequality behind the lemma:
///   |alpha z^{p+1} + z^2/4 + z/2 + beta| <= (p/(p+1)) (z-1)(z^{p-1}-1) max{z,1}
/// with alpha = -1/(p+1), beta = -3/4 + 1/(p+1) for p >= 3, and the cubic
/// bound |alpha z^3 + z/4 + beta| <= (1/4)(z-1)^2 max{z,1} (alpha = -1/12,
/// beta = -1/6) for p = 2.
///
/// Both sides vanish to second order at z = 1, so they are evaluated in the
/// factored form with the common (z-1)^2 pulled out:
///   p = 2:   lhs/(z-1)^2 = (z+2)/12,            rhs/(z-1)^2 = max{z,1}/4
///   p >= 3:  lhs/(z-1)^2 = |1/4 - V(z)/(p+1)|,  rhs/(z-1)^2 = C(p) R(z) max{z,1}
/// where V(z) = sum_{j=0}^{p-1} (p-j) z^j and R(z) = sum_{j=0}^{p-2} z^j.
inline PolyInequalityReport check_poly_inequality(int p,
                                                  const std::vector<double>& z_samples,
                                                  double rel_tol = 1e-12) {
    if (p < 2) throw ConfigInvalid("check_poly_inequality: p must be >= 2");
    PolyInequalityReport rep;
    rep.p = p;
    for (double z : z_samples) {
        if (z <= 0.0) continue;
        const double zm1 = z - 1.0;
        const double common = zm1 * zm1;
        double lhs_reduced;
        double rhs_reduced;
        if (p == 2) {
            lhs_reduced = (z + 2.0) / 12.0;
            rhs_reduced = 0.25 * std::max(z, 1.0);
        } else {
            double v = 1.0;  // Horner over V's coefficients 1, 2, ..., p
            for (int k = 2; k <= p; ++k) v = v * z + static_cast<double>(k);
            lhs_reduced = std::abs(0.25 - v / static_cast<double>(p + 1));
            double r = 1.0;
            for (int k = 0; k < p - 2; ++k) r = r * z + 1.0;
            rhs_reduced = lemma_constant(p) * r * std::max(z, 1.0);
        }
        const double lhs = common * lhs_reduced;
        const double rhs = common * rhs_reduced;
        const double violation =
            std::max(0.0, lhs - rhs) / std::max({1.0, lhs, rhs});
        if (violation > rep.max_violation) {
            rep.max_violation = violation;
            rep.worst_z = z;
        }
    }
    rep.pass = rep.max_violation <= rel_tol;
    return rep;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (lo <= 0.0 || hi <= lo || count < 2) {
        throw ConfigInvalid("log_spaced: need 0 < lo < hi and count >= 2");
    }
    std::vector<double> out(count);
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                    static_cast<double>(count - 1));
    }
    return out;
}

struct DissipationReport {
    bool pass = false;
    double worst_margin = 0.0;  // min over pairs of (rhs + tol - lhs)
    std::size_t worst_pair = 0;
    double max_curvature = 0.0;  // max |d^2/dt^2 E| estimated from the series
    std::vector<double> margins;
};

/// Discrete energy-dissipation check: for consecutive snapshots,
///   (E_{k+1} - E_k) / (2 dt_k) <= -I1(t_k)/4 + tol_k,
/// with E = ||u||_2^2 and tol_k = tol_factor * dt_k * max|E''| estimated
/// from the same series by nonuniform finite differences.
inline DissipationReport check_dissipation(const RunRecord& run,
                                           double tol_factor = 10.0) {
    const auto& t = run.series.times;
    const auto& l2 = run.series.channel("L2");
    const auto& i1 = run.series.channel("I1");
    if (t.size() < 3) {
        throw InsufficientData("check_dissipation: need >= 3 snapshots");
    }
    std::vector<double> energy(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) energy[k] = l2[k] * l2[k];

    double max_curv = 0.0;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        const double d10 = t[k] - t[k - 1];
        const double d21 = t[k + 1] - t[k];
        const double d20 = t[k + 1] - t[k - 1];
        const double curv = 2.0 * (energy[k - 1] / (d10 * d20) -
                                   energy[k] / (d21 * d10) +
                                   energy[k + 1] / (d21 * d20));
        max_curv = std::max(max_curv, std::abs(curv));
    }

    DissipationReport rep;
    rep.max_curvature = max_curv;
    rep.pass = true;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const double dt_k = t[k + 1] - t[k];
        const double lhs = (energy[k + 1] - energy[k]) / (2.0 * dt_k);
        const double tol_k = tol_factor * dt_k * max_curv;
        const double margin = (-0.25 * i1[k] + tol_k) - lhs;
        rep.margins.push_back(margin);
        if (margin < rep.worst_margin) {
            rep.worst_margin = margin;
            rep.worst_pair = k;
        }
        if (margin < 0.0) rep.pass = false;
    }
    return rep;
}

/// Least-squares slope of log(channel) against log(t) over a time window.
struct DecayFit {
    std::string channel;
    double t_lo = 0.0;
    double t_hi = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS residual in log space
    std::size_t points = 0;
};

inline DecayFit fit_decay_exponent(const TimeSeries& series,
                                   const std::string& channel, double t_lo,
                                   double t_hi) {
    if (t_lo >= t_hi) throw ConfigInvalid("fit_decay_exponent: bad window");
    const auto& values = series.channel(channel);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double t = series.times[k];
        if (t < t_lo || t > t_hi || t <= 0.0) continue;
        if (values[k] <= 0.0) continue;
        xs.push_back(std::log(t));
        ys.push_back(std::log(values[k]));
    }
    if (xs.size() < 8) {
        throw InsufficientData("fit_decay_exponent: fewer than 8 usable points");
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    DecayFit fit;
    fit.channel = channel;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.points = xs.size();
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / n);
    return fit;
}

/// t^{(1/2)(1 - 1/p)} || u(t) - U(t) ||_p on the run grid, where U is the
/// self-similar source solution with the run's mass.
inline double renormalized_error(const RunRecord& run, const Profile& profile,
                                 double p, double t) {
    if (std::abs(run.mass0 - profile.m) > 1e-8) {
        throw MassMismatch("renormalized_error: run mass " +
                           std::to_string(run.mass0) + " != profile mass " +
                           std::to_string(profile.m));
    }
    if (t <= 0.0) throw NonPositiveTime("renormalized_error: t must be > 0");
    const GridFunction u = run.state_at(t);
    GridFunction diff(run.grid);
    const double rt = std::sqrt(t);
    for (std::size_t j = 0; j < diff.size(); ++j) {
        diff[j] = u[j] - profile.f(run.grid.point(j) / rt) / rt;
    }
    return std::pow(t, 0.5 * (1.0 - 1.0 / p)) * lp_norm(diff, p);
}

/// h * sum of u over |x_j| > R.
inline double tail_mass(const GridFunction& u, double R) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (std::abs(u.grid.point(j)) > R) s += u[j];
    }
    return u.grid.spacing() * s;
}

struct TailBoundReport {
    double radius = 0.0;
    double c_fit = 0.0;  // smallest C making the bound hold on all snapshots
    std::size_t worst_snapshot = 0;
};

/// Fits the smallest C with
///   tail_{2R}(u(t)) <= tail_R(phi) + C (t/R^2 + sqrt(t)/R)
/// across snapshots. The constant is a monitored quantity, not a pass/fail.
inline TailBoundReport check_tail_bound(const RunRecord& run, double R) {
    if (2.0 * R >= run.grid.half_length) {
        throw RangeError("check_tail_bound: need 2R < L");
    }
    TailBoundReport rep;
    rep.radius = R;
    const double phi_tail = tail_mass(run.initial().u, R);
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        const auto& snap = run.snapshots[k];
        if (snap.t <= 0.0) continue;
        const double excess = tail_mass(snap.u, 2.0 * R) - phi_tail;
        const double shape = snap.t / (R * R) + std::sqrt(snap.t) / R;
        const double c_needed = std::max(0.0, excess / shape);
        if (c_needed > rep.c_fit) {
            rep.c_fit = c_needed;
            rep.worst_snapshot = k;
        }
    }
    return rep;
}

struct ComparisonReport {
    double max_violation = 0.0;  // max over snapshots of max_j (u_j - v_j)
    double worst_time = 0.0;
    bool pass = false;
};

/// Comparison principle: ordered initial data stay ordered. Requires both
/// runs to share grid, kernels and snapshot schedule.
inline ComparisonReport comparison_check(const RunRecord& run_u,
                                         const RunRecord& run_v,
                                         double tol = 1e-9) {
    require_same_grid(run_u.grid, run_v.grid, "comparison_check");
    if (run_u.snapshots.size() != run_v.snapshots.size()) {
        throw ConfigInvalid("comparison_check: snapshot schedules differ");
    }
    if (run_u.K.weights != run_v.K.weights || run_u.G.weights != run_v.G.weights) {
        throw ConfigInvalid("comparison_check: kernels differ");
    }
    const double c = run_u.report.c_gk;
    if (c > 0.0 && (run_u.sup0 >= 1.0 / c || run_v.sup0 >= 1.0 / c)) {
        throw PreconditionViolation(
            "comparison_check: initial sup norms must be < 1/C_GK");
    }
    const auto& u0 = run_u.initial().u;
    const auto& v0 = run_v.initial().u;
    for (std::size_t j = 0; j < u0.size(); ++j) {
        if (u0[j] > v0[j]) {
            throw PreconditionViolation(
                "comparison_check: initial data not ordered at node " +
                std::to_string(j));
        }
    }
    ComparisonReport rep;
    for (std::size_t k = 0; k < run_u.snapshots.size(); ++k) {
        const auto& su = run_u.snapshots[k];
        const auto& sv = run_v.snapshots[k];
        if (std::abs(su.t - sv.t) > 1e-12 * (1.0 + std::abs(su.t))) {
            throw ConfigInvalid("comparison_check: snapshot times differ");
        }
        for (std::size_t j = 0; j < su.u.size(); ++j) {
            const double d = su.u[j] - sv.u[j];
            if (d > rep.max_violation) {
                rep.max_violation = d;
                rep.worst_time = su.t;
            }
        }
    }
    rep.pass = rep.max_violation <= tol;
    return rep;
}

}  // namespace nlcd
