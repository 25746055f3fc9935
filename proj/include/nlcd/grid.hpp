#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "nlcd/errors.hpp"

namespace nlcd {

/// Uniform periodic mesh on [-L, L) with N points x_j = -L + j h.
struct Grid {
    std::size_t n = 0;
    double half_length = 0.0;

    Grid() = default;
    Grid(std::size_t n_, double half_length_) : n(n_), half_length(half_length_) {
        if (n < 8) throw ConfigInvalid("Grid: N must be >= 8");
        if (half_length <= 0.0) throw ConfigInvalid("Grid: L must be > 0");
    }

    double spacing() const { return 2.0 * half_length / static_cast<double>(n); }
    double point(std::size_t j) const {
        return -half_length + static_cast<double>(j) * spacing();
    }
    bool power_of_two() const { return n > 0 && (n & (n - 1)) == 0; }

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.n == b.n && a.half_length == b.half_length;
    }
};

/// Real-valued samples on a Grid.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g) : grid(g), values(g.n, 0.0) {}
    GridFunction(const Grid& g, std::vector<double> v)
        : grid(g), values(std::move(v)) {
        if (values.size() != grid.n) {
            throw ConfigInvalid("GridFunction: value count != N");
        }
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t j) const { return values[j]; }
    double& operator[](std::size_t j) { return values[j]; }

    bool all_finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

template <typename F>
GridFunction sample_function(const Grid& g, F&& f) {
    GridFunction out(g);
    for (std::size_t j = 0; j < g.n; ++j) out[j] = f(g.point(j));
    return out;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!(a == b)) throw GridMismatch(std::string(where) + ": grid mismatch");
}

/// h * sum of samples (the rectangle rule; matched to the convolution
/// weights so discrete conservation identities are exact).
inline double mass(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return f.grid.spacing() * s;
}

/// (h * sum |f|^p)^(1/p), or max |f| for p = infinity.
inline double lp_norm(const GridFunction& f, double p) {
    if (p < 1.0) throw ConfigInvalid("lp_norm: p must be >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    if (p == 1.0) {
        for (double v : f.values) s += std::abs(v);
    } else if (p == 2.0) {
        for (double v : f.values) s += v * v;
    } else {
        for (double v : f.values) s += std::pow(std::abs(v), p);
    }
    return std::pow(f.grid.spacing() * s, 1.0 / p);
}

inline double inner_product(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a.grid, b.grid, "inner_product");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return a.grid.spacing() * s;
}

enum class Interp { cubic, linear };

/// Periodic interpolation at an arbitrary point. Cubic is the centered
/// 4-point Lagrange formula (exact on cubics); linear is 2-point.
inline double interpolate(const GridFunction& f, double x,
                          Interp method = Interp::cubic) {
    const std::size_t n = f.grid.n;
    const double L = f.grid.half_length;
    const double h = f.grid.spacing();
    // Wrap into [-L, L).
    double y = std::fmod(x + L, 2.0 * L);
    if (y < 0.0) y += 2.0 * L;
    const double u = y / h;
    const auto j0 = static_cast<std::size_t>(std::min(
        static_cast<double>(n - 1), std::floor(u)));
    const double s = u - static_cast<double>(j0);
    auto at = [&](std::size_t offset_base, long rel) {
        const long idx =
            (static_cast<long>(offset_base) + rel + static_cast<long>(n)) %
            static_cast<long>(n);
        return f.values[static_cast<std::size_t>(idx)];
    };
    if (method == Interp::linear) {
        return (1.0 - s) * at(j0, 0) + s * at(j0, 1);
    }
    const double fm1 = at(j0, -1);
    const double f0 = at(j0, 0);
    const double f1 = at(j0, 1);
    const double f2 = at(j0, 2);
    const double wm1 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w0 = (s * s - 1.0) * (s - 2.0) / 2.0;
    const double w1 = -s * (s + 1.0) * (s - 2.0) / 2.0;
    const double w2 = s * (s * s - 1.0) / 6.0;
    return wm1 * fm1 + w0 * f0 + w1 * f1 + w2 * f2;
}

}  // namespace nlcd
