#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nlcd/discretization.hpp"
#include "nlcd/errors.hpp"
#include "nlcd/grid.hpp"
#include "nlcd/kernels.hpp"
#include "nlcd/series.hpp"

namespace nlcd {

/// Right-hand side of the evolution equation in expanded form:
///   K*u - u + G*(u^2)/4 + (G*u) u/2.
/// With an exactly normalized even K and an exactly antisymmetrized odd G
/// this has zero discrete mass, which is what makes the scheme conservative.
inline GridFunction rhs(const GridFunction& u, const DiscreteKernel& K,
                        const DiscreteKernel& G) {
    require_same_grid(u.grid, K.grid, "rhs");
    require_same_grid(u.grid, G.grid, "rhs");
    const GridFunction ku = convolve(K, u);
    const GridFunction gu = convolve(G, u);
    GridFunction usq(u.grid);
    for (std::size_t j = 0; j < u.size(); ++j) usq[j] = u[j] * u[j];
    const GridFunction gusq = convolve(G, usq);
    GridFunction out(u.grid);
    for (std::size_t j = 0; j < u.size(); ++j) {
        out[j] = ku[j] - u[j] + 0.25 * gusq[j] + 0.5 * gu[j] * u[j];
    }
    return out;
}

/// Explicit-step size from the sup-norm Lipschitz bound 2 + 3 C_GK sup|u|
/// of the right-hand side: dt = safety / (2 (1 + (3/2) C_GK sup_u)).
inline double stable_dt(double safety, double c_gk, double sup_u) {
    if (sup_u < 0.0) throw ConfigInvalid("stable_dt: sup_u must be >= 0");
    return safety / (2.0 * (1.0 + c_gk * sup_u * 1.5));
}

enum class Stepper { euler, rk4 };

inline Stepper stepper_from_string(const std::string& s) {
    if (s == "euler") return Stepper::euler;
    if (s == "rk4") return Stepper::rk4;
    throw ConfigInvalid("unknown stepper: " + s);
}

/// Current trajectory point plus the conserved-mass record.
struct SimulationState {
    double t = 0.0;
    GridFunction u;
    double mass0 = 0.0;
    std::size_t steps = 0;
};

/// One explicit step (Euler or classical RK4). Re-checks finiteness and the
/// conserved-mass assertion afterwards.
inline void step(SimulationState& state, double dt, Stepper stepper,
                 const DiscreteKernel& K, const DiscreteKernel& G) {
    GridFunction& u = state.u;
    const std::size_t n = u.size();
    if (stepper == Stepper::euler) {
        const GridFunction f = rhs(u, K, G);
        for (std::size_t j = 0; j < n; ++j) u[j] += dt * f[j];
    } else {
        const GridFunction k1 = rhs(u, K, G);
        GridFunction y(u.grid);
        for (std::size_t j = 0; j < n; ++j) y[j] = u[j] + 0.5 * dt * k1[j];
        const GridFunction k2 = rhs(y, K, G);
        for (std::size_t j = 0; j < n; ++j) y[j] = u[j] + 0.5 * dt * k2[j];
        const GridFunction k3 = rhs(y, K, G);
        for (std::size_t j = 0; j < n; ++j) y[j] = u[j] + dt * k3[j];
        const GridFunction k4 = rhs(y, K, G);
        for (std::size_t j = 0; j < n; ++j) {
            u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    state.t += dt;
    state.steps += 1;
    if (!u.all_finite()) {
        throw NonFinite("step: non-finite value at t = " + std::to_string(state.t));
    }
    const double m = mass(u);
    if (std::abs(m - state.mass0) > 1e-10 * (1.0 + std::abs(state.mass0))) {
        throw MassDrift("step: mass drifted to " + std::to_string(m) +
                        " from " + std::to_string(state.mass0));
    }
}

struct InitialSpec {
    std::string shape = "gaussian";  // gaussian | tophat | tabulated | zero
    double mass = 0.0;
    std::optional<double> sup;        // gaussian amplitude
    std::optional<double> width;      // gaussian sigma
    double halfwidth = 1.0;           // tophat half-width
    std::vector<double> xs, vals;     // tabulated rows
};

inline GridFunction build_initial_data(const InitialSpec& spec, const Grid& grid) {
    if (spec.shape == "zero" || spec.mass == 0.0) {
        if (spec.shape == "tabulated" && spec.mass == 0.0 && !spec.xs.empty()) {
            // fall through: a tabulated shape may carry its own mass
        } else {
            return GridFunction(grid);
        }
    }
    const double sign = spec.mass < 0.0 ? -1.0 : 1.0;
    const double am = std::abs(spec.mass);
    if (spec.shape == "gaussian") {
        double sigma;
        double amp;
        if (spec.sup) {
            amp = *spec.sup;
            if (amp <= 0.0) throw ConfigInvalid("initial gaussian: sup must be > 0");
            sigma = am / (amp * std::sqrt(2.0 * M_PI));
        } else {
            sigma = spec.width.value_or(1.0);
            if (sigma <= 0.0) throw ConfigInvalid("initial gaussian: width must be > 0");
            amp = am / (sigma * std::sqrt(2.0 * M_PI));
        }
        return sample_function(grid, [=](double x) {
            const double t = x / sigma;
            return sign * amp * std::exp(-0.5 * t * t);
        });
    }
    if (spec.shape == "tophat") {
        const double w = spec.halfwidth;
        if (w <= 0.0) throw ConfigInvalid("initial tophat: halfwidth must be > 0");
        const double amp = spec.mass / (2.0 * w);
        GridFunction phi = sample_function(
            grid, [=](double x) { return std::abs(x) <= w ? amp : 0.0; });
        // The sampled indicator misses the requested mass by O(h); rescale
        // so the discrete mass is exact.
        const double m0 = mass(phi);
        if (m0 != 0.0) {
            const double scale = spec.mass / m0;
            for (double& v : phi.values) v *= scale;
        }
        return phi;
    }
    if (spec.shape == "tabulated") {
        auto comp = kernels::tabulated(spec.xs, spec.vals, Parity::even);
        GridFunction phi = sample_function(grid, [&](double x) { return comp(x); });
        if (spec.mass != 0.0) {
            const double m0 = mass(phi);
            if (m0 == 0.0) {
                throw ConfigInvalid("initial tabulated: zero mass, cannot rescale");
            }
            const double scale = spec.mass / m0;
            for (double& v : phi.values) v *= scale;
        }
        return phi;
    }
    throw ConfigInvalid("unknown initial shape: " + spec.shape);
}

enum class SmallnessPolicy { enforce, warn };

inline SmallnessPolicy policy_from_string(const std::string& s) {
    if (s == "enforce") return SmallnessPolicy::enforce;
    if (s == "warn") return SmallnessPolicy::warn;
    throw ConfigInvalid("unknown policy: " + s);
}

struct SimulationConfig {
    KernelPair pair = kernels::exponential_pair();
    std::size_t n = 4096;
    double half_length = 0.0;  // 0 -> 25 sqrt(T_final * A)
    InitialSpec initial;
    double t_final = 100.0;
    Stepper stepper = Stepper::rk4;
    double dt = 0.0;      // 0 -> stable_dt from the initial sup norm
    double safety = 0.5;
    double snapshot_t_min = 0.625;
    double snapshot_ratio = 1.189207115002721;  // 2^(1/4)
    SmallnessPolicy policy = SmallnessPolicy::enforce;
    double tail_radius = 0.0;  // 0 -> L/2
};

struct Snapshot {
    double t = 0.0;
    GridFunction u;
};

/// Everything one run produces: discrete kernels, per-snapshot diagnostics
/// and the snapshots themselves.
struct RunRecord {
    Grid grid;
    DiscreteKernel K;
    DiscreteKernel G;
    MomentReport report;
    double mass0 = 0.0;
    double sup0 = 0.0;
    double dt_used = 0.0;
    double tail_radius = 0.0;
    Stepper stepper = Stepper::rk4;
    double t_final = 0.0;
    TimeSeries series;
    std::vector<Snapshot> snapshots;
    std::vector<std::string> warnings;

    const Snapshot& initial() const { return snapshots.front(); }

    /// Snapshot at time t (within tolerance), or the linear-in-time
    /// interpolant between the bracketing snapshots.
    GridFunction state_at(double t) const {
        if (snapshots.empty()) throw OutOfRange("state_at: no snapshots");
        const double tol = 1e-9 * (1.0 + std::abs(t));
        for (const auto& s : snapshots) {
            if (std::abs(s.t - t) <= tol) return s.u;
        }
        if (t < snapshots.front().t - tol || t > snapshots.back().t + tol) {
            throw OutOfRange("state_at: t = " + std::to_string(t) +
                             " outside recorded range");
        }
        for (std::size_t i = 0; i + 1 < snapshots.size(); ++i) {
            const auto& a = snapshots[i];
            const auto& b = snapshots[i + 1];
            if (a.t <= t && t <= b.t) {
                const double w = (t - a.t) / (b.t - a.t);
                GridFunction out(grid);
                for (std::size_t j = 0; j < out.size(); ++j) {
                    out[j] = (1.0 - w) * a.u[j] + w * b.u[j];
                }
                return out;
            }
        }
        throw OutOfRange("state_at: bracketing failed");
    }
};

namespace detail {

inline std::vector<double> snapshot_times(double t_min, double ratio,
                                          double t_final) {
    std::vector<double> out{0.0};
    if (t_min <= 0.0 || ratio <= 1.0) {
        throw ConfigInvalid("snapshot schedule: need t_min > 0 and ratio > 1");
    }
    for (double t = t_min; t < t_final * (1.0 - 1e-12); t *= ratio) {
        out.push_back(t);
    }
    out.push_back(t_final);
    return out;
}

inline std::map<std::string, double> diagnostics_row(const GridFunction& u,
                                                     const DiscreteKernel& K,
                                                     const DiscreteKernel& G,
                                                     double tail_radius) {
    std::map<std::string, double> row;
    row["mass"] = mass(u);
    row["L1"] = lp_norm(u, 1.0);
    row["L2"] = lp_norm(u, 2.0);
    row["L4"] = lp_norm(u, 4.0);
    row["Linf"] = lp_norm(u, std::numeric_limits<double>::infinity());

    const GridFunction ku = convolve(K, u);
    const double l2sq = row["L2"] * row["L2"];
    row["I1"] = 2.0 * (l2sq - inner_product(u, ku));

    GridFunction usq(u.grid);
    for (std::size_t j = 0; j < u.size(); ++j) usq[j] = u[j] * u[j];
    const GridFunction gu = convolve(G, u);
    const GridFunction gusq = convolve(G, usq);
    row["I2"] = 0.25 * inner_product(u, gusq) + 0.5 * inner_product(usq, gu);

    double tail = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (std::abs(u.grid.point(j)) > tail_radius) tail += u[j];
    }
    row["tail"] = u.grid.spacing() * tail;
    return row;
}

}  // namespace detail

/// Runs the full trajectory: validates the kernel pair, applies the
/// smallness policy, advances to t_final with exact landings on the
/// geometric snapshot schedule, and records per-snapshot diagnostics.
inline RunRecord simulate(const SimulationConfig& config) {
    if (config.t_final <= 0.0) throw ConfigInvalid("simulate: t_final must be > 0");

    RunRecord run;
    run.report = validate_kernel_pair(config.pair);
    run.stepper = config.stepper;
    run.t_final = config.t_final;
    if (!run.report.all_ok()) {
        if (config.policy == SmallnessPolicy::enforce) {
            throw ConfigInvalid("simulate: kernel hypotheses failed validation");
        }
        run.warnings.push_back("kernel hypotheses failed; exploratory run");
    }

    const double L = config.half_length > 0.0
                         ? config.half_length
                         : 25.0 * std::sqrt(config.t_final *
                                            std::max(run.report.A, 1e-6));
    run.grid = Grid(config.n, L);
    run.K = sample_kernel(config.pair.K.eval, run.grid, Parity::even);
    run.G = sample_kernel(config.pair.G.eval, run.grid, Parity::odd);
    if (!run.K.tail_ok) {
        run.warnings.push_back("kernel tail mass beyond the domain exceeds 1e-8");
    }

    SimulationState state;
    state.u = build_initial_data(config.initial, run.grid);
    state.t = 0.0;
    state.mass0 = mass(state.u);
    run.mass0 = state.mass0;
    run.sup0 = lp_norm(state.u, std::numeric_limits<double>::infinity());

    const double c = run.report.c_gk;
    if (c > 0.0) {
        const double strict = 1.0 / (2.0 * c);
        const double loose = 1.0 / c;
        if (config.policy == SmallnessPolicy::enforce) {
            if (run.sup0 >= strict) {
                throw ConfigInvalid(
                    "simulate: ||phi||_inf = " + std::to_string(run.sup0) +
                    " >= 1/(2 C_GK) = " + std::to_string(strict) +
                    " under policy=enforce");
            }
        } else {
            if (run.sup0 >= loose) {
                throw ConfigInvalid(
                    "simulate: ||phi||_inf = " + std::to_string(run.sup0) +
                    " >= 1/C_GK = " + std::to_string(loose));
            }
            if (run.sup0 >= strict) {
                run.warnings.push_back(
                    "||phi||_inf in [1/(2 C_GK), 1/C_GK): decay for large p "
                    "is not guaranteed; exploratory run");
            }
        }
    }

    const double auto_dt = stable_dt(config.safety, c, run.sup0);
    double dt = config.dt > 0.0 ? config.dt : auto_dt;
    if (config.dt > 0.0 && config.dt > auto_dt) {
        run.warnings.push_back("dt override exceeds stable_dt");
    }
    run.dt_used = dt;
    run.tail_radius = config.tail_radius > 0.0 ? config.tail_radius : 0.5 * L;

    const auto times = detail::snapshot_times(config.snapshot_t_min,
                                              config.snapshot_ratio,
                                              config.t_final);
    for (double target : times) {
        while (state.t < target - 1e-14 * std::max(1.0, target)) {
            const double dt_step = std::min(dt, target - state.t);
            step(state, dt_step, config.stepper, run.K, run.G);
            if (std::abs(state.t - target) <= 1e-12 * std::max(1.0, target)) {
                state.t = target;  // exact landing keeps the schedule clean
            }
        }
        run.snapshots.push_back({target, state.u});
        run.series.append(target, detail::diagnostics_row(state.u, run.K, run.G,
                                                          run.tail_radius));
    }
    return run;
}

/// The rescaled family member u_lambda(t0, x) = lambda u(lambda^2 t0, lambda x)
/// evaluated back on the run grid by cubic interpolation. The snapshot is
/// extended by zero beyond the domain (a periodic wrap would re-count the
/// solution when lambda > 1).
inline GridFunction rescale_snapshot(const RunRecord& run, double lambda,
                                     double t0) {
    if (lambda <= 0.0) throw ConfigInvalid("rescale_snapshot: lambda must be > 0");
    const double t_source = lambda * lambda * t0;
    if (t_source > run.snapshots.back().t * (1.0 + 1e-12)) {
        throw OutOfRange("rescale_snapshot: lambda^2 t0 beyond the run");
    }
    const GridFunction u = run.state_at(t_source);
    const double L = run.grid.half_length;
    GridFunction out(run.grid);
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double x = lambda * run.grid.point(j);
        out[j] = (x < -L || x >= L) ? 0.0 : lambda * interpolate(u, x);
    }
    return out;
}

}  // namespace nlcd
