// Command-line front end: kernel validation, simulation runs and sweeps,
// self-similar profile tables, and claim-by-claim verification reports.
//
// Exit codes: 0 ok, 1 check/hypothesis failure, 2 usage or parse error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlcd/diagnostics.hpp"
#include "nlcd/evolution.hpp"
#include "nlcd/io.hpp"
#include "nlcd/kernels.hpp"
#include "nlcd/profile.hpp"
#include "nlcd/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

int cmd_validate(const std::string& config_path, double tol) {
    nlcd::io::ParsedConfig config;
    try {
        config = nlcd::io::parse_config_file(config_path);
    } catch (const nlcd::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    nlcd::MomentReport report;
    try {
        report = nlcd::validate_kernel_pair(config.sim.pair, tol);
    } catch (const nlcd::Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitCheckFailure;
    }
    auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
    std::printf("A      = %.12g\n", report.A);
    std::printf("B      = %.12g\n", report.B);
    std::printf("C_GK   = %.12g\n", report.c_gk);
    std::printf("mass_K = %.12g\n", report.mass_k);
    std::printf("K >= 0          %s\n", flag(report.k_nonnegative));
    std::printf("K even          %s\n", flag(report.k_even));
    std::printf("K mass one      %s\n", flag(report.k_mass_one));
    std::printf("G odd           %s\n", flag(report.g_odd));
    std::printf("|G| <= C_GK K   %s\n", flag(report.g_dominated));
    std::printf("moments finite  %s\n", flag(report.moments_finite));
    return report.all_ok() ? kExitOk : kExitCheckFailure;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::uint64_t seed, const std::string& policy_override) {
    nlcd::io::ParsedConfig config;
    try {
        config = nlcd::io::parse_config_file(config_path);
        if (!policy_override.empty()) {
            config.sim.policy = nlcd::policy_from_string(policy_override);
            config.canonical["policy"] = policy_override;
            config.hash = nlcd::io::fnv1a_hex(config.canonical.dump());
        }
    } catch (const nlcd::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        const nlcd::RunRecord run = nlcd::simulate(config.sim);
        const auto manifest = nlcd::io::write_run(run, config, out_dir, seed);
        for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
        const auto& s = run.series;
        const std::size_t last = s.size() - 1;
        std::printf(
            "run %s: t = %.6g, mass drift = %.3g, L1 = %.6g, Linf = %.6g\n",
            manifest.run_id.c_str(), s.times[last],
            std::abs(s.channel("mass")[last] - run.mass0),
            s.channel("L1")[last], s.channel("Linf")[last]);
        return kExitOk;
    } catch (const nlcd::Error& e) {
        std::cerr << "simulation failed: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}

int cmd_profile(double m, double A, double B, const std::string& out_dir) {
    try {
        const nlcd::Profile closed = nlcd::build_profile_closed_form(m, A, B);
        const nlcd::Profile shot = nlcd::build_profile_shooting(m, A, B);

        const double xi_max = 12.0 * std::sqrt(A);
        const std::size_t rows = 2001;
        double agreement = 0.0;
        fs::create_directories(out_dir);
        std::ofstream table(fs::path(out_dir) / "profile.tsv");
        if (!table) {
            std::cerr << "error: cannot write profile table\n";
            return kExitUsage;
        }
        for (std::size_t i = 0; i < rows; ++i) {
            const double xi = -xi_max + 2.0 * xi_max * static_cast<double>(i) /
                                            static_cast<double>(rows - 1);
            const double fv = closed.f(xi);
            agreement = std::max(agreement, std::abs(fv - shot.f(xi)));
            table << nlcd::io::format_double(xi) << "\t"
                  << nlcd::io::format_double(fv) << "\n";
        }

        const nlcd::Grid res_grid(4096, std::max(1.0, 12.0 * std::sqrt(A)));
        const double residual = nlcd::profile_residual(closed, res_grid);

        json meta;
        meta["m"] = m;
        meta["A"] = A;
        meta["B"] = B;
        meta["C_norm"] = closed.c_norm;
        meta["mass"] = closed.mass_quadrature;
        meta["center"] = closed.center;
        meta["residual"] = residual;
        meta["shooting_agreement"] = agreement;
        nlcd::io::write_json_file(fs::path(out_dir) / "profile.json", meta);

        std::printf("profile m=%.6g A=%.6g B=%.6g: C_norm=%.12g mass=%.12g "
                    "residual=%.3g shooting_agreement=%.3g\n",
                    m, A, B, closed.c_norm, closed.mass_quadrature, residual,
                    agreement);
        return kExitOk;
    } catch (const nlcd::Error& e) {
        std::cerr << "profile construction failed: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}

int cmd_verify(const std::string& run_dir, const std::string& paired_dir,
               double profile_A, double profile_B, bool use_kernel_moments,
               const std::string& report_path) {
    try {
        const nlcd::RunRecord run = nlcd::io::load_run(run_dir);
        std::optional<nlcd::RunRecord> paired;
        if (!paired_dir.empty()) paired = nlcd::io::load_run(paired_dir);

        double A = profile_A;
        double B = profile_B;
        if (use_kernel_moments) {
            A = run.report.A;
            B = run.report.B;
        }
        std::optional<nlcd::Profile> profile;
        if (A > 0.0 && std::abs(run.mass0) > 1e-12) {
            profile = nlcd::build_profile_closed_form(run.mass0, A, B);
        }

        const nlcd::VerifyReport report = nlcd::verify_run(
            run, profile ? &*profile : nullptr, paired ? &*paired : nullptr);

        for (const auto& row : report.rows) {
            std::printf("%-32s %s  %s\n", row.anchor.c_str(),
                        row.monitor ? "  --  " : (row.pass ? "pass" : "FAIL"),
                        row.detail.c_str());
        }
        if (!report_path.empty()) {
            json out;
            out["run"] = run_dir;
            out["inputs_hash"] =
                nlcd::io::parse_config_file(fs::path(run_dir) / "config.json").hash;
            out["rows"] = report.to_json();
            out["all_pass"] = report.all_pass();
            nlcd::io::write_json_file(report_path, out);
        }
        return report.all_pass() ? kExitOk : kExitCheckFailure;
    } catch (const nlcd::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlcd::Error& e) {
        std::cerr << "verification error: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}

json json_patch_path(json base, const std::string& dotted, const json& value) {
    json* node = &base;
    std::size_t start = 0;
    std::vector<std::string> keys;
    while (true) {
        const auto dot = dotted.find('.', start);
        if (dot == std::string::npos) {
            keys.push_back(dotted.substr(start));
            break;
        }
        keys.push_back(dotted.substr(start, dot - start));
        start = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < keys.size(); ++i) node = &(*node)[keys[i]];
    (*node)[keys.back()] = value;
    return base;
}

int cmd_sweep(const std::string& sweep_path, const std::string& out_dir,
              unsigned threads, std::uint64_t seed,
              const std::string& policy_override) {
    json sweep_spec;
    try {
        sweep_spec = nlcd::io::load_json_file(sweep_path);
    } catch (const nlcd::ConfigInvalid& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    json base = sweep_spec.value("base", json::object());
    if (!policy_override.empty()) base["policy"] = policy_override;
    const json axes = sweep_spec.value("sweep", json::object());

    // Cartesian product over the sweep axes; no axes means no runs.
    std::vector<json> configs;
    if (!axes.empty()) {
        configs.push_back(base);
        for (const auto& [key, values] : axes.items()) {
            std::vector<json> next;
            for (const auto& cfg : configs) {
                for (const auto& v : values) {
                    next.push_back(json_patch_path(cfg, key, v));
                }
            }
            configs = std::move(next);
        }
    }

    fs::create_directories(out_dir);
    struct JobResult {
        std::string dir;
        bool ok = false;
        std::string message;
        json fit_row;
    };
    std::vector<JobResult> results(configs.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= configs.size()) return;
            char name[32];
            std::snprintf(name, sizeof(name), "run_%03zu", i);
            const fs::path dir = fs::path(out_dir) / name;
            JobResult& res = results[i];
            res.dir = dir.string();
            try {
                const auto parsed =
                    nlcd::io::parse_config(configs[i], fs::path(sweep_path).parent_path());
                const nlcd::RunRecord run = nlcd::simulate(parsed.sim);
                nlcd::io::write_run(run, parsed, dir, seed);
                json row;
                row["run"] = name;
                row["mass"] = run.mass0;
                const double lo = run.t_final / 16.0;
                for (const char* ch : {"L1", "L2", "L4"}) {
                    try {
                        const auto fit = nlcd::fit_decay_exponent(
                            run.series, ch, lo, run.t_final);
                        row[std::string("slope_") + ch] = fit.slope;
                    } catch (const nlcd::InsufficientData&) {
                        row[std::string("slope_") + ch] = nullptr;
                    }
                }
                res.fit_row = row;
                res.ok = true;
            } catch (const std::exception& e) {
                res.ok = false;
                res.message = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned n_threads = std::max(1u, threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ofstream fits(fs::path(out_dir) / "sweep_fits.csv");
    fits << "run,mass,slope_L1,slope_L2,slope_L4\n";
    json manifest_list = json::array();
    std::size_t failures = 0;
    for (const auto& res : results) {
        json entry;
        entry["dir"] = res.dir;
        entry["ok"] = res.ok;
        if (res.ok) {
            const auto& r = res.fit_row;
            fits << r["run"].get<std::string>() << ","
                 << nlcd::io::format_double(r["mass"].get<double>());
            for (const char* ch : {"slope_L1", "slope_L2", "slope_L4"}) {
                fits << ",";
                if (!r[ch].is_null()) {
                    fits << nlcd::io::format_double(r[ch].get<double>());
                }
            }
            fits << "\n";
        } else {
            entry["error"] = res.message;
            ++failures;
            std::cerr << "sweep run failed: " << res.dir << ": " << res.message
                      << "\n";
        }
        manifest_list.push_back(entry);
    }
    nlcd::io::write_json_file(fs::path(out_dir) / "sweep_manifest.json",
                              manifest_list);
    std::printf("sweep: %zu runs, %zu failed\n", results.size(), failures);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal convection-diffusion simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string run_dir;
    std::string paired_dir;
    std::string report_path;
    std::string policy_override;
    std::uint64_t seed = 12345;
    unsigned threads = std::thread::hardware_concurrency();
    double tol = 1e-10;
    double m = 1.0, A = 1.0, B = 0.0;
    bool kernel_moments = false;

    auto* validate = app.add_subcommand("validate", "check kernel hypotheses");
    validate->add_option("--config", config_path, "config file")->required();
    validate->add_option("--tol", tol, "hypothesis tolerance");

    auto* simulate = app.add_subcommand("simulate", "run one simulation");
    simulate->add_option("--config", config_path, "config file")->required();
    simulate->add_option("--out", out_dir, "output run directory")->required();
    simulate->add_option("--seed", seed, "seed recorded in the manifest");
    simulate->add_option("--policy", policy_override,
                         "override smallness policy (enforce|warn)");

    auto* profile = app.add_subcommand("profile", "build a source profile");
    profile->add_option("--m", m, "profile mass")->required();
    profile->add_option("--A", A, "diffusivity");
    profile->add_option("--B", B, "convection moment");
    profile->add_option("--out", out_dir, "output directory")->required();

    auto* verify = app.add_subcommand("verify", "claim-by-claim report");
    verify->add_option("--run", run_dir, "run directory")->required();
    verify->add_option("--paired", paired_dir, "ordered paired run directory");
    verify->add_option("--profile-A", A, "profile diffusivity");
    verify->add_option("--profile-B", B, "profile convection moment");
    verify->add_flag("--kernel-moments", kernel_moments,
                     "use the run kernels' moments for the profile");
    verify->add_option("--report", report_path, "write JSON report here");

    auto* sweep = app.add_subcommand("sweep", "run a config grid");
    sweep->add_option("--config", config_path, "sweep spec file")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--threads", threads, "worker threads");
    sweep->add_option("--seed", seed, "seed recorded in the manifests");
    sweep->add_option("--policy", policy_override,
                      "override smallness policy (enforce|warn)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (validate->parsed()) return cmd_validate(config_path, tol);
    if (simulate->parsed()) {
        return cmd_simulate(config_path, out_dir, seed, policy_override);
    }
    if (profile->parsed()) return cmd_profile(m, A, B, out_dir);
    if (verify->parsed()) {
        return cmd_verify(run_dir, paired_dir, A, B, kernel_moments, report_path);
    }
    if (sweep->parsed()) {
        return cmd_sweep(config_path, out_dir, threads, seed, policy_override);
    }
    return kExitUsage;
}
