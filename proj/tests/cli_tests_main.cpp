// End-to-end checks of the command-line tool: exit codes, file layout and
// determinism. Takes the CLI binary path as argv[1].

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
    if (!ok) ++failures;
}

int run_cmd(const std::string& cmd) {
    const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_tests <path-to-cli>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const fs::path work = fs::temp_directory_path() / "nlcd_cli_tests";
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string good_config = R"({
      "kernel": {"K": {"family": "exponential", "sigma": 1.0},
                 "G": {"family": "kprime"}},
      "grid": {"n": 256, "half_length": 30.0},
      "initial": {"shape": "gaussian", "mass": 0.3, "sup": 0.25},
      "time": {"t_final": 4.0},
      "snapshots": {"t_min": 1.0, "ratio": 2.0}
    })";
    write_file(work / "good.json", good_config);

    const std::string bad_g_config = R"({
      "kernel": {"K": {"family": "exponential", "sigma": 1.0},
                 "G": {"family": "scaled_k", "factor": 2.0}},
      "grid": {"n": 256, "half_length": 30.0},
      "initial": {"shape": "gaussian", "mass": 0.3, "sup": 0.25},
      "time": {"t_final": 4.0}
    })";
    write_file(work / "bad_g.json", bad_g_config);

    const std::string big_config = R"({
      "kernel": {"K": {"family": "exponential", "sigma": 1.0},
                 "G": {"family": "kprime"}},
      "grid": {"n": 256, "half_length": 30.0},
      "initial": {"shape": "gaussian", "mass": 0.8, "sup": 0.7},
      "time": {"t_final": 4.0},
      "snapshots": {"t_min": 1.0, "ratio": 2.0}
    })";
    write_file(work / "too_big.json", big_config);

    const std::string zero_config = R"({
      "kernel": {"K": {"family": "exponential", "sigma": 1.0},
                 "G": {"family": "kprime"}},
      "grid": {"n": 256, "half_length": 30.0},
      "initial": {"shape": "zero", "mass": 0.0},
      "time": {"t_final": 4.0},
      "snapshots": {"t_min": 1.0, "ratio": 2.0}
    })";
    write_file(work / "zero.json", zero_config);

    // validate
    check(run_cmd(cli + " validate --config " + (work / "good.json").string()) == 0,
          "validate accepts the exponential pair (exit 0)");
    check(run_cmd(cli + " validate --config " + (work / "bad_g.json").string()) == 1,
          "validate rejects a non-odd G (exit 1)");
    check(run_cmd(cli + " validate --config " + (work / "missing.json").string()) == 2,
          "validate on a missing file is a usage error (exit 2)");

    // simulate
    const fs::path run_dir = work / "run";
    check(run_cmd(cli + " simulate --config " + (work / "good.json").string() +
                  " --out " + run_dir.string()) == 0,
          "simulate produces a run (exit 0)");
    check(fs::exists(run_dir / "series.csv") &&
              fs::exists(run_dir / "manifest.json") &&
              fs::exists(run_dir / "config.json") &&
              fs::exists(run_dir / "snapshots" / "t_0000.bin"),
          "run directory layout is complete");
    check(run_cmd(cli + " simulate --config " + (work / "zero.json").string() +
                  " --out " + (work / "zero_run").string()) == 0,
          "simulate with zero initial data (exit 0)");
    check(run_cmd(cli + " simulate --config " + (work / "too_big.json").string() +
                  " --out " + (work / "refused").string()) == 1,
          "smallness violation under enforce is refused (exit 1)");
    check(run_cmd(cli + " simulate --config " + (work / "too_big.json").string() +
                  " --policy warn --out " + (work / "warn_run").string()) == 0,
          "the same config runs under policy=warn (exit 0)");

    // determinism across invocations
    const fs::path run_dir2 = work / "run2";
    run_cmd(cli + " simulate --config " + (work / "good.json").string() +
            " --out " + run_dir2.string());
    check(slurp(run_dir / "series.csv") == slurp(run_dir2 / "series.csv"),
          "re-running the same config reproduces series.csv byte-for-byte");

    // profile
    check(run_cmd(cli + " profile --m 1.0 --A 1.0 --B 0.0 --out " +
                  (work / "prof").string()) == 0,
          "profile subcommand (exit 0)");
    check(fs::exists(work / "prof" / "profile.tsv") &&
              fs::exists(work / "prof" / "profile.json"),
          "profile emits table and metadata");
    {
        bool meta_ok = false;
        if (fs::exists(work / "prof" / "profile.json")) {
            std::ifstream in(work / "prof" / "profile.json");
            json meta;
            in >> meta;
            meta_ok = std::abs(meta.value("mass", 0.0) - 1.0) < 1e-9 &&
                      meta.value("shooting_agreement", 1.0) < 1e-8 &&
                      meta.contains("C_norm") && meta.contains("residual");
        }
        check(meta_ok, "profile metadata has mass, C_norm, residual, agreement");
    }
    check(run_cmd(cli + " profile --m 0.0 --A 1.0 --B -1.0 --out " +
                  (work / "prof0").string()) == 0,
          "zero-mass profile (exit 0)");

    // verify: exit code must equal the report's all_pass flag
    const fs::path report_path = work / "report.json";
    const int verify_exit =
        run_cmd(cli + " verify --run " + run_dir.string() + " --kernel-moments" +
                " --report " + report_path.string());
    bool verify_consistent = false;
    if (fs::exists(report_path)) {
        std::ifstream in(report_path);
        json rep;
        in >> rep;
        const bool all_pass = rep.value("all_pass", false);
        verify_consistent = (verify_exit == (all_pass ? 0 : 1)) &&
                            rep.contains("rows") && !rep["rows"].empty();
    }
    check(verify_consistent,
          "verify exit code mirrors the report's all_pass field");

    // sweep: 3 x 2 grid
    const std::string sweep_spec = R"({
      "base": {
        "kernel": {"K": {"family": "exponential", "sigma": 1.0},
                   "G": {"family": "kprime"}},
        "grid": {"n": 256, "half_length": 30.0},
        "initial": {"shape": "gaussian", "mass": 0.3, "sup": 0.2},
        "time": {"t_final": 4.0},
        "snapshots": {"t_min": 0.25, "ratio": 1.4142135623730951}
      },
      "sweep": {
        "initial.mass": [0.1, 0.2, 0.3],
        "kernel.K.sigma": [1.0, 2.0]
      }
    })";
    write_file(work / "sweep.json", sweep_spec);
    check(run_cmd(cli + " sweep --config " + (work / "sweep.json").string() +
                  " --out " + (work / "sweep_out").string() + " --threads 2") == 0,
          "sweep over a 3 x 2 grid (exit 0)");
    {
        std::size_t n_runs = 0;
        bool manifests_ok = fs::exists(work / "sweep_out" / "sweep_manifest.json");
        if (manifests_ok) {
            std::ifstream in(work / "sweep_out" / "sweep_manifest.json");
            json m;
            in >> m;
            n_runs = m.size();
            for (const auto& entry : m) {
                manifests_ok = manifests_ok && entry.value("ok", false);
            }
        }
        check(manifests_ok && n_runs == 6, "sweep produced 6 successful manifests");
        check(fs::exists(work / "sweep_out" / "sweep_fits.csv"),
              "sweep merged decay-fit CSV exists");
    }

    // resolution ladder: decay slopes stable across N
    const std::string ladder_spec = R"({
      "base": {
        "kernel": {"K": {"family": "exponential", "sigma": 1.0},
                   "G": {"family": "kprime"}},
        "initial": {"shape": "gaussian", "mass": 0.4, "sup": 0.3},
        "time": {"t_final": 200.0}
      },
      "sweep": {"grid.n": [512, 1024, 2048]}
    })";
    write_file(work / "ladder.json", ladder_spec);
    check(run_cmd(cli + " sweep --config " + (work / "ladder.json").string() +
                  " --out " + (work / "ladder_out").string() + " --threads 2") == 0,
          "resolution-ladder sweep (exit 0)");
    {
        double lo = 1e300, hi = -1e300;
        std::ifstream fits(work / "ladder_out" / "sweep_fits.csv");
        std::string line;
        std::getline(fits, line);  // header: run,mass,slope_L1,slope_L2,slope_L4
        int rows = 0;
        while (std::getline(fits, line)) {
            std::istringstream ls(line);
            std::string cell;
            for (int col = 0; std::getline(ls, cell, ','); ++col) {
                if (col == 3) {
                    const double s = std::strtod(cell.c_str(), nullptr);
                    lo = std::min(lo, s);
                    hi = std::max(hi, s);
                    ++rows;
                }
            }
        }
        check(rows == 3 && hi - lo <= 0.01,
              "L2 decay slope stable to 0.01 across N in {512, 1024, 2048} "
              "(spread " + std::to_string(hi - lo) + ")");
    }

    // empty sweep
    write_file(work / "sweep_empty.json", R"({"base": {}, "sweep": {}})");
    check(run_cmd(cli + " sweep --config " + (work / "sweep_empty.json").string() +
                  " --out " + (work / "sweep_empty_out").string()) == 0,
          "empty sweep exits 0");
    {
        bool empty_ok = false;
        if (fs::exists(work / "sweep_empty_out" / "sweep_manifest.json")) {
            std::ifstream in(work / "sweep_empty_out" / "sweep_manifest.json");
            json m;
            in >> m;
            empty_ok = m.is_array() && m.empty();
        }
        check(empty_ok, "empty sweep produces an empty manifest list");
    }

    // usage errors
    check(run_cmd(cli + " simulate") == 2, "missing required flags (exit 2)");
    check(run_cmd(cli + " frobnicate") == 2, "unknown subcommand (exit 2)");

    std::printf("%s: %d failure(s)\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
