#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlcd/errors.hpp"
#include "nlcd/evolution.hpp"
#include "nlcd/kernels.hpp"

namespace nlcd {

inline constexpr const char* kToolVersion = "0.1.0";

namespace io {

using nlohmann::json;

/// FNV-1a 64-bit over a byte string, rendered as fixed-width hex.
inline std::string fnv1a_hex(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string fnv1a_hex(const std::string& s) {
    return fnv1a_hex(s.data(), s.size());
}

/// Shortest-roundtrip decimal; used everywhere a double lands in a file so
/// that identical runs produce identical bytes.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

inline json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigInvalid("parse error in " + path.string() + ": " + e.what());
    }
    return j;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigInvalid("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

/// Two-column text table: one "x value" pair per line, '#' comments.
inline void read_table(const std::filesystem::path& path, std::vector<double>& xs,
                       std::vector<double>& vals) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open table " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double x, v;
        if (ls >> x >> v) {
            xs.push_back(x);
            vals.push_back(v);
        }
    }
    if (xs.size() < 2) {
        throw ConfigInvalid("table " + path.string() + " has fewer than 2 rows");
    }
}

inline KernelComponent component_from_json(const json& j, Parity parity,
                                           const std::filesystem::path& base_dir) {
    const std::string family = j.value("family", "");
    if (family == "exponential") {
        return kernels::exponential(j.value("sigma", 1.0));
    }
    if (family == "gaussian") {
        return kernels::gaussian(j.value("sigma", 1.0));
    }
    if (family == "tophat") {
        return kernels::tophat(j.value("halfwidth", 1.0));
    }
    if (family == "exponential_prime") {
        return kernels::exponential_prime(j.value("sigma", 1.0));
    }
    if (family == "gaussian_prime") {
        return kernels::gaussian_prime(j.value("sigma", 1.0));
    }
    if (family == "linear_tophat") {
        return kernels::linear_tophat(j.value("halfwidth", 1.0),
                                      j.value("slope", -0.5));
    }
    if (family == "zero") {
        return kernels::zero(j.value("radius", 1.0));
    }
    if (family == "tabulated") {
        std::vector<double> xs, vals;
        read_table(base_dir / j.value("file", ""), xs, vals);
        return kernels::tabulated(xs, vals, parity);
    }
    throw ConfigInvalid("unknown kernel family: '" + family + "'");
}

inline KernelPair pair_from_json(const json& jk,
                                 const std::filesystem::path& base_dir) {
    if (!jk.contains("K") || !jk.contains("G")) {
        throw ConfigInvalid("kernel block needs K and G entries");
    }
    KernelPair pair;
    pair.K = component_from_json(jk.at("K"), Parity::even, base_dir);

    const json& jg = jk.at("G");
    const std::string g_family = jg.value("family", "");
    if (g_family == "kprime") {
        const std::string k_family = jk.at("K").value("family", "");
        const double sigma = jk.at("K").value("sigma", 1.0);
        if (k_family == "exponential") {
            pair.G = kernels::exponential_prime(sigma);
            pair.closed_cgk = 1.0 / sigma;
        } else if (k_family == "gaussian") {
            pair.G = kernels::gaussian_prime(sigma);
        } else {
            throw ConfigInvalid("G family 'kprime' needs an exponential or "
                                "gaussian K");
        }
    } else if (g_family == "scaled_k") {
        pair.G = kernels::scaled_copy(pair.K, jg.value("factor", 2.0));
    } else {
        pair.G = component_from_json(jg, Parity::odd, base_dir);
        if (g_family == "zero") pair.closed_cgk = 0.0;
        if (g_family == "linear_tophat" && jk.at("K").value("family", "") == "tophat") {
            const double wk = jk.at("K").value("halfwidth", 1.0);
            const double wg = jg.value("halfwidth", 1.0);
            if (wg <= wk) {
                pair.closed_cgk = 2.0 * wk * wg * std::abs(jg.value("slope", -0.5));
            }
        }
    }
    return pair;
}

/// A config plus its canonical serialized form (defaults filled in, keys
/// sorted) and the hash of that form.
struct ParsedConfig {
    SimulationConfig sim;
    json canonical;
    std::string hash;
};

inline ParsedConfig parse_config(const json& input,
                                 const std::filesystem::path& base_dir = ".") {
    json c;
    const json jk = input.value("kernel", json::object());
    c["kernel"]["K"] = jk.value("K", json{{"family", "exponential"}, {"sigma", 1.0}});
    c["kernel"]["G"] = jk.value("G", json{{"family", "kprime"}});

    const json jgrid = input.value("grid", json::object());
    c["grid"]["n"] = jgrid.value("n", 4096);
    c["grid"]["half_length"] = jgrid.value("half_length", 0.0);

    const json jinit = input.value("initial", json::object());
    c["initial"]["shape"] = jinit.value("shape", "gaussian");
    c["initial"]["mass"] = jinit.value("mass", 0.4);
    if (jinit.contains("sup")) c["initial"]["sup"] = jinit.at("sup");
    if (jinit.contains("width")) c["initial"]["width"] = jinit.at("width");
    if (jinit.contains("halfwidth")) c["initial"]["halfwidth"] = jinit.at("halfwidth");
    if (jinit.contains("file")) c["initial"]["file"] = jinit.at("file");

    const json jtime = input.value("time", json::object());
    c["time"]["t_final"] = jtime.value("t_final", 100.0);
    c["time"]["stepper"] = jtime.value("stepper", "rk4");
    c["time"]["dt"] = jtime.value("dt", 0.0);
    c["time"]["safety"] = jtime.value("safety", 0.5);

    const json jsnap = input.value("snapshots", json::object());
    c["snapshots"]["t_min"] = jsnap.value("t_min", 0.625);
    c["snapshots"]["ratio"] = jsnap.value("ratio", 1.189207115002721);

    c["policy"] = input.value("policy", "enforce");

    const json jdiag = input.value("diagnostics", json::object());
    c["diagnostics"]["tail_radius"] = jdiag.value("tail_radius", 0.0);

    ParsedConfig out;
    out.canonical = c;
    out.hash = fnv1a_hex(c.dump());

    SimulationConfig& sim = out.sim;
    sim.pair = pair_from_json(c.at("kernel"), base_dir);
    sim.n = c.at("grid").at("n").get<std::size_t>();
    sim.half_length = c.at("grid").at("half_length").get<double>();
    sim.initial.shape = c.at("initial").at("shape").get<std::string>();
    sim.initial.mass = c.at("initial").at("mass").get<double>();
    if (c.at("initial").contains("sup")) {
        sim.initial.sup = c.at("initial").at("sup").get<double>();
    }
    if (c.at("initial").contains("width")) {
        sim.initial.width = c.at("initial").at("width").get<double>();
    }
    if (c.at("initial").contains("halfwidth")) {
        sim.initial.halfwidth = c.at("initial").at("halfwidth").get<double>();
    }
    if (c.at("initial").contains("file")) {
        read_table(base_dir / c.at("initial").at("file").get<std::string>(),
                   sim.initial.xs, sim.initial.vals);
        sim.initial.shape = "tabulated";
    }
    sim.t_final = c.at("time").at("t_final").get<double>();
    sim.stepper = stepper_from_string(c.at("time").at("stepper").get<std::string>());
    sim.dt = c.at("time").at("dt").get<double>();
    sim.safety = c.at("time").at("safety").get<double>();
    sim.snapshot_t_min = c.at("snapshots").at("t_min").get<double>();
    sim.snapshot_ratio = c.at("snapshots").at("ratio").get<double>();
    sim.policy = policy_from_string(c.at("policy").get<std::string>());
    sim.tail_radius = c.at("diagnostics").at("tail_radius").get<double>();
    return out;
}

inline ParsedConfig parse_config_file(const std::filesystem::path& path) {
    return parse_config(load_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Run persistence
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& series_columns() {
    static const std::vector<std::string> cols{
        "t", "mass", "L1", "L2", "L4", "Linf", "I1", "I2", "tail"};
    return cols;
}

inline void write_series_csv(const std::filesystem::path& path,
                             const TimeSeries& series) {
    std::ofstream out(path);
    if (!out) throw ConfigInvalid("cannot write " + path.string());
    const auto& cols = series_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << cols[i] << (i + 1 < cols.size() ? "," : "\n");
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        out << format_double(series.times[k]);
        for (std::size_t i = 1; i < cols.size(); ++i) {
            out << "," << format_double(series.channel(cols[i])[k]);
        }
        out << "\n";
    }
}

inline TimeSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header)) {
        throw ConfigInvalid("empty series file " + path.string());
    }
    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string c;
        while (std::getline(hs, c, ',')) cols.push_back(c);
    }
    if (cols.empty() || cols.front() != "t") {
        throw ConfigInvalid("series file must start with a t column");
    }
    TimeSeries series;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            // strtod instead of std::stod: subnormal values parse fine but
            // stod turns their ERANGE into out_of_range.
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) {
                throw ConfigInvalid("bad number '" + cell + "' in " +
                                    path.string());
            }
            row.push_back(v);
        }
        if (row.size() != cols.size()) {
            throw ConfigInvalid("ragged row in " + path.string());
        }
        std::map<std::string, double> named;
        for (std::size_t i = 1; i < cols.size(); ++i) named[cols[i]] = row[i];
        series.append(row[0], named);
    }
    return series;
}

/// Snapshot payload: N little-endian IEEE doubles. (Written natively; the
/// build targets little-endian hosts.)
inline void write_snapshot_bin(const std::filesystem::path& path,
                               const GridFunction& u) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigInvalid("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(u.values.data()),
              static_cast<std::streamsize>(u.values.size() * sizeof(double)));
}

inline std::vector<double> read_snapshot_bin(const std::filesystem::path& path,
                                             std::size_t expected_n) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigInvalid("cannot open " + path.string());
    std::vector<double> values(expected_n);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(expected_n * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != expected_n * sizeof(double)) {
        throw ConfigInvalid("short snapshot file " + path.string());
    }
    return values;
}

inline std::string kernel_hash(const RunRecord& run) {
    std::string bytes;
    bytes.append(reinterpret_cast<const char*>(run.K.weights.data()),
                 run.K.weights.size() * sizeof(double));
    bytes.append(reinterpret_cast<const char*>(run.G.weights.data()),
                 run.G.weights.size() * sizeof(double));
    return fnv1a_hex(bytes);
}

struct RunManifest {
    std::string run_id;
    std::string config_hash;
    std::string series_path;
    std::string snapshots_dir;
    std::string config_path;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;

    json to_json() const {
        json j;
        j["run_id"] = run_id;
        j["config_hash"] = config_hash;
        j["series"] = series_path;
        j["snapshots"] = snapshots_dir;
        j["config"] = config_path;
        j["tool_version"] = tool_version;
        j["seed"] = seed;
        return j;
    }
};

/// Writes the on-disk layout:
///   dir/config.json, dir/manifest.json, dir/series.csv,
///   dir/snapshots/t_<k>.bin + t_<k>.json sidecars.
inline RunManifest write_run(const RunRecord& run, const ParsedConfig& config,
                             const std::filesystem::path& dir,
                             std::uint64_t seed = 0) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "snapshots");

    write_json_file(dir / "config.json", config.canonical);
    write_series_csv(dir / "series.csv", run.series);

    const std::string khash = kernel_hash(run);
    for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "t_%04zu", k);
        const auto& snap = run.snapshots[k];
        write_snapshot_bin(dir / "snapshots" / (std::string(name) + ".bin"),
                           snap.u);
        json side;
        side["N"] = run.grid.n;
        side["L"] = run.grid.half_length;
        side["t"] = snap.t;
        side["mass"] = mass(snap.u);
        side["kernel_hash"] = khash;
        write_json_file(dir / "snapshots" / (std::string(name) + ".json"), side);
    }

    RunManifest manifest;
    manifest.run_id = config.hash + "-" + fnv1a_hex(dir.string());
    manifest.config_hash = config.hash;
    manifest.series_path = "series.csv";
    manifest.snapshots_dir = "snapshots";
    manifest.config_path = "config.json";
    manifest.seed = seed;
    write_json_file(dir / "manifest.json", manifest.to_json());
    return manifest;
}

/// Rebuilds a RunRecord from a run directory: kernels and grid from
/// config.json, series from series.csv, snapshots from the sidecar files.
inline RunRecord load_run(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const ParsedConfig config = parse_config_file(dir / "config.json");

    RunRecord run;
    run.report = validate_kernel_pair(config.sim.pair);
    run.t_final = config.sim.t_final;
    run.stepper = config.sim.stepper;

    std::vector<fs::path> sidecars;
    for (const auto& entry : fs::directory_iterator(dir / "snapshots")) {
        if (entry.path().extension() == ".json") sidecars.push_back(entry.path());
    }
    std::sort(sidecars.begin(), sidecars.end());
    if (sidecars.empty()) throw ConfigInvalid("no snapshots in " + dir.string());

    bool grid_ready = false;
    for (const auto& side_path : sidecars) {
        const json side = load_json_file(side_path);
        if (!grid_ready) {
            run.grid = Grid(side.at("N").get<std::size_t>(),
                            side.at("L").get<double>());
            run.K = sample_kernel(config.sim.pair.K.eval, run.grid, Parity::even);
            run.G = sample_kernel(config.sim.pair.G.eval, run.grid, Parity::odd);
            grid_ready = true;
        }
        fs::path bin = side_path;
        bin.replace_extension(".bin");
        Snapshot snap;
        snap.t = side.at("t").get<double>();
        snap.u = GridFunction(run.grid, read_snapshot_bin(bin, run.grid.n));
        run.snapshots.push_back(std::move(snap));
    }
    std::sort(run.snapshots.begin(), run.snapshots.end(),
              [](const Snapshot& a, const Snapshot& b) { return a.t < b.t; });

    run.series = read_series_csv(dir / "series.csv");
    run.mass0 = mass(run.initial().u);
    run.sup0 = lp_norm(run.initial().u, std::numeric_limits<double>::infinity());
    run.tail_radius = config.sim.tail_radius > 0.0
                          ? config.sim.tail_radius
                          : 0.5 * run.grid.half_length;
    return run;
}

}  // namespace io
}  // namespace nlcd
