#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlcd/errors.hpp"
#include "nlcd/quadrature.hpp"

namespace nlcd {

enum class Parity { even, odd };

/// One half of a kernel pair: an evaluator plus whatever closed-form data
/// the family provides. `radius` is the effective support half-width used
/// for sampling and truncation (values beyond it are negligible or zero).
struct KernelComponent {
    std::function<double(double)> eval;
    std::string family;
    double radius = 0.0;
    std::optional<double> closed_mass;       // integral of the component
    std::optional<double> closed_x2_moment;  // integral of z^2 * component
    std::optional<double> closed_x1_moment;  // integral of z * component

    double operator()(double x) const { return eval(x); }
};

/// The (K, G) pair of Eq. kernels: K an even probability density, G odd.
struct KernelPair {
    KernelComponent K;
    KernelComponent G;
    std::optional<double> closed_cgk;

    double radius() const { return std::max(K.radius, G.radius); }
};

struct QuadSpec {
    double tol = 1e-12;
    double r0 = 10.0;
    int max_rungs = 24;
};

/// Hypothesis flags and the constants (A, B, C_GK) for one kernel pair.
struct MomentReport {
    double A = 0.0;      // (1/2) * second moment of K
    double B = 0.0;      // first moment of G
    double c_gk = 0.0;   // smallest C with |G| <= C*K on the sample set
    double mass_k = 0.0;

    bool k_nonnegative = false;
    bool k_even = false;
    bool k_mass_one = false;
    bool g_odd = false;
    bool g_dominated = false;
    bool moments_finite = false;

    bool all_ok() const {
        return k_nonnegative && k_even && k_mass_one && g_odd && g_dominated &&
               moments_finite;
    }
};

namespace kernels {

inline KernelComponent exponential(double sigma) {
    KernelComponent c;
    c.eval = [sigma](double x) {
        return std::exp(-std::abs(x) / sigma) / (2.0 * sigma);
    };
    c.family = "exponential";
    c.radius = 45.0 * sigma;
    c.closed_mass = 1.0;
    c.closed_x2_moment = 2.0 * sigma * sigma;
    return c;
}

inline KernelComponent exponential_prime(double sigma) {
    KernelComponent c;
    c.eval = [sigma](double x) {
        if (x == 0.0) return 0.0;
        const double s = x > 0.0 ? 1.0 : -1.0;
        return -s * std::exp(-std::abs(x) / sigma) / (2.0 * sigma * sigma);
    };
    c.family = "exponential_prime";
    c.radius = 45.0 * sigma;
    c.closed_mass = 0.0;
    c.closed_x1_moment = -1.0;  // integral z K'(z) dz = -mass(K) by parts
    return c;
}

inline KernelComponent gaussian(double sigma) {
    KernelComponent c;
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    c.eval = [sigma, norm](double x) {
        const double t = x / sigma;
        return norm * std::exp(-0.5 * t * t);
    };
    c.family = "gaussian";
    c.radius = 12.0 * sigma;
    c.closed_mass = 1.0;
    c.closed_x2_moment = sigma * sigma;
    return c;
}

inline KernelComponent gaussian_prime(double sigma) {
    KernelComponent c;
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    c.eval = [sigma, norm](double x) {
        const double t = x / sigma;
        return -x / (sigma * sigma) * norm * std::exp(-0.5 * t * t);
    };
    c.family = "gaussian_prime";
    c.radius = 12.0 * sigma;
    c.closed_mass = 0.0;
    c.closed_x1_moment = -1.0;
    return c;
}

inline KernelComponent tophat(double halfwidth) {
    KernelComponent c;
    const double value = 1.0 / (2.0 * halfwidth);
    c.eval = [halfwidth, value](double x) {
        return std::abs(x) <= halfwidth ? value : 0.0;
    };
    c.family = "tophat";
    c.radius = halfwidth;
    c.closed_mass = 1.0;
    c.closed_x2_moment = halfwidth * halfwidth / 3.0;
    return c;
}

/// G(x) = slope * x on [-halfwidth, halfwidth], zero outside.
inline KernelComponent linear_tophat(double halfwidth, double slope) {
    KernelComponent c;
    c.eval = [halfwidth, slope](double x) {
        return std::abs(x) <= halfwidth ? slope * x : 0.0;
    };
    c.family = "linear_tophat";
    c.radius = halfwidth;
    c.closed_mass = 0.0;
    c.closed_x1_moment = slope * 2.0 * halfwidth * halfwidth * halfwidth / 3.0;
    return c;
}

inline KernelComponent zero(double radius = 1.0) {
    KernelComponent c;
    c.eval = [](double) { return 0.0; };
    c.family = "zero";
    c.radius = radius;
    c.closed_mass = 0.0;
    c.closed_x1_moment = 0.0;
    return c;
}

/// An even multiple of another component. Only useful as an intentionally
/// invalid G (it fails the oddness check).
inline KernelComponent scaled_copy(const KernelComponent& base, double factor) {
    KernelComponent c;
    auto eval = base.eval;
    c.eval = [eval, factor](double x) { return factor * eval(x); };
    c.family = "scaled(" + base.family + ")";
    c.radius = base.radius;
    return c;
}

/// Piecewise-linear interpolant of a two-column table, symmetrized to the
/// requested parity so the discrete hypotheses hold exactly.
inline KernelComponent tabulated(std::vector<double> xs, std::vector<double> vals,
                                 Parity parity) {
    if (xs.size() != vals.size() || xs.size() < 2) {
        throw ConfigInvalid("tabulated kernel: need >= 2 (x, value) rows");
    }
    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> x(xs.size()), v(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        x[i] = xs[order[i]];
        v[i] = vals[order[i]];
    }

    auto raw = [x = std::move(x), v = std::move(v)](double q) {
        // Table endpoints bound the support.
        if (q < x.front() || q > x.back()) return 0.0;
        auto it = std::upper_bound(x.begin(), x.end(), q);
        if (it == x.begin()) return v.front();
        if (it == x.end()) return v.back();
        const std::size_t i = static_cast<std::size_t>(it - x.begin());
        const double t = (q - x[i - 1]) / (x[i] - x[i - 1]);
        return (1.0 - t) * v[i - 1] + t * v[i];
    };

    KernelComponent c;
    const double r = std::max(std::abs(xs.front()), std::abs(xs.back()));
    if (parity == Parity::even) {
        c.eval = [raw](double q) { return 0.5 * (raw(q) + raw(-q)); };
    } else {
        c.eval = [raw](double q) { return 0.5 * (raw(q) - raw(-q)); };
    }
    c.family = "tabulated";
    c.radius = r;
    return c;
}

/// Reference pair of the exponential family: K = e^{-|x|/s}/(2s), G = K'.
inline KernelPair exponential_pair(double sigma = 1.0) {
    KernelPair p{exponential(sigma), exponential_prime(sigma), 1.0 / sigma};
    return p;
}

inline KernelPair tophat_pair(double halfwidth = 1.0, double slope = -0.5) {
    KernelPair p{tophat(halfwidth), linear_tophat(halfwidth, slope),
                 2.0 * halfwidth * halfwidth * std::abs(slope)};
    return p;
}

inline KernelPair gaussian_diffusion_pair(double sigma = 1.0) {
    KernelPair p{gaussian(sigma), zero(sigma), 0.0};
    return p;
}

/// K_lambda(x) = lambda K(lambda x), G likewise. Mass and C_GK are
/// invariant; A scales by lambda^{-2} and B by lambda^{-1}.
inline KernelPair rescaled(const KernelPair& pair, double lambda) {
    auto scale = [lambda](const KernelComponent& c, bool second_moment) {
        KernelComponent out;
        auto eval = c.eval;
        out.eval = [eval, lambda](double x) { return lambda * eval(lambda * x); };
        out.family = c.family + "_rescaled";
        out.radius = c.radius / lambda;
        out.closed_mass = c.closed_mass;
        if (c.closed_x2_moment && second_moment) {
            out.closed_x2_moment = *c.closed_x2_moment / (lambda * lambda);
        }
        if (c.closed_x1_moment && !second_moment) {
            out.closed_x1_moment = *c.closed_x1_moment / lambda;
        }
        return out;
    };
    KernelPair out{scale(pair.K, true), scale(pair.G, false), pair.closed_cgk};
    return out;
}

}  // namespace kernels

/// Symmetric sample set on [-radius, radius]: 0 and `m` pairs +/- x.
inline std::vector<double> symmetric_samples(double radius, std::size_t count = 100001) {
    const std::size_t m = std::max<std::size_t>(1, count / 2);
    std::vector<double> xs;
    xs.reserve(2 * m + 1);
    xs.push_back(0.0);
    for (std::size_t i = 1; i <= m; ++i) {
        const double x = radius * static_cast<double>(i) / static_cast<double>(m);
        xs.push_back(x);
        xs.push_back(-x);
    }
    return xs;
}

namespace detail {

/// Ladder start adapted to the component's support so that the first rung
/// already brackets (and resolves) compactly supported kernels.
inline double ladder_start(const KernelComponent& c, const QuadSpec& spec) {
    if (c.radius <= 0.0) return spec.r0;
    return std::clamp(c.radius, 1e-6, spec.r0);
}

}  // namespace detail

/// A = (1/2) integral of z^2 K(z) dz. Uses the family's closed form when
/// present and cross-checks it against the quadrature ladder.
inline double moment_A(const KernelPair& pair, const QuadSpec& spec = {}) {
    const auto& K = pair.K;
    const double quad_value = 0.5 * quad::integrate_line(
                                        [&](double z) { return z * z * K(z); },
                                        spec.tol, detail::ladder_start(K, spec),
                                        spec.max_rungs);
    if (K.closed_x2_moment) {
        const double closed = 0.5 * *K.closed_x2_moment;
        if (std::abs(closed - quad_value) >
            1e-8 * std::max(1.0, std::abs(closed))) {
            throw Error("moment_A: closed form and quadrature disagree");
        }
        return closed;
    }
    return quad_value;
}

/// B = integral of z G(z) dz.
inline double moment_B(const KernelPair& pair, const QuadSpec& spec = {}) {
    const auto& G = pair.G;
    const double quad_value =
        quad::integrate_line([&](double z) { return z * G(z); }, spec.tol,
                             detail::ladder_start(G, spec), spec.max_rungs);
    if (G.closed_x1_moment) {
        const double closed = *G.closed_x1_moment;
        if (std::abs(closed - quad_value) >
            1e-8 * std::max(1.0, std::abs(closed))) {
            throw Error("moment_B: closed form and quadrature disagree");
        }
        return closed;
    }
    return quad_value;
}

/// Checks every structural hypothesis on (K, G) over a symmetric sample set
/// and computes A, B, C_GK and the mass of K.
///
/// C_GK is the discrete supremum of |G|/K where K > 0. A sample with
/// K(x) = 0 but |G(x)| > tol has no finite dominating constant and throws.
inline MomentReport validate_kernel_pair(const KernelPair& pair,
                                         const std::vector<double>& samples,
                                         double tol = 1e-10) {
    if (tol <= 0.0) throw ConfigInvalid("validate_kernel_pair: tol must be > 0");
    MomentReport rep;

    bool nonneg = true;
    bool even = true;
    bool odd = true;
    double cgk = 0.0;
    for (double x : samples) {
        const double kx = pair.K(x);
        const double kmx = pair.K(-x);
        const double gx = pair.G(x);
        const double gmx = pair.G(-x);
        if (kx < 0.0) nonneg = false;
        if (std::abs(kx - kmx) > tol * std::max(1.0, std::abs(kx))) even = false;
        if (std::abs(gx + gmx) > tol * std::max(1.0, std::abs(gx))) odd = false;
        if (kx > 0.0) {
            cgk = std::max(cgk, std::abs(gx) / kx);
        } else if (std::abs(gx) > tol) {
            throw DominationFailure(
                "validate_kernel_pair: |G| > 0 where K = 0 (x = " +
                std::to_string(x) + ")");
        }
    }
    rep.k_nonnegative = nonneg;
    rep.k_even = even;
    rep.g_odd = odd;
    rep.c_gk = cgk;
    rep.g_dominated = std::isfinite(cgk);

    QuadSpec spec;
    spec.tol = std::min(tol, 1e-12);
    rep.mass_k = quad::integrate_line([&](double z) { return pair.K(z); },
                                      spec.tol, detail::ladder_start(pair.K, spec),
                                      spec.max_rungs);
    rep.k_mass_one = std::abs(rep.mass_k - 1.0) <= std::max(tol, 1e-9);

    rep.A = moment_A(pair, spec);
    rep.B = moment_B(pair, spec);
    // Absolute first moment of G must also be finite; divergence throws.
    quad::integrate_line(
        [&](double z) { return std::abs(pair.G(z)) * (1.0 + z * z); }, 1e-9,
        detail::ladder_start(pair.G, spec), spec.max_rungs);
    rep.moments_finite = true;

    return rep;
}

inline MomentReport validate_kernel_pair(const KernelPair& pair,
                                         double tol = 1e-10) {
    return validate_kernel_pair(pair, symmetric_samples(pair.radius()), tol);
}

}  // namespace nlcd
