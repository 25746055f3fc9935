#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "nlcd/errors.hpp"

namespace nlcd {

/// Adaptive quadrature over finite intervals plus a doubling truncation
/// ladder for integrals over the whole line. Used for kernel moments and
/// profile masses, where the integrands decay at least exponentially.
namespace quad {

namespace detail {

inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson on [a, b] with mixed absolute/relative target `tol`.
/// Starts from a fixed composite baseline so narrow features away from the
/// interval endpoints cannot be skipped by the coarse first estimate.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12, int max_depth = 44,
                        int baseline_panels = 32) {
    if (a == b) return 0.0;
    double first_pass = 0.0;
    const double width = (b - a) / baseline_panels;
    std::vector<double> panel(baseline_panels);
    for (int i = 0; i < baseline_panels; ++i) {
        const double pa = a + i * width;
        const double pb = (i + 1 == baseline_panels) ? b : pa + width;
        panel[i] = detail::simpson(pa, pb, f(pa), f(0.5 * (pa + pb)), f(pb));
        first_pass += panel[i];
    }
    const double scale = std::max(1.0, std::abs(first_pass));
    const double panel_tol = tol * scale / baseline_panels;
    double total = 0.0;
    for (int i = 0; i < baseline_panels; ++i) {
        const double pa = a + i * width;
        const double pb = (i + 1 == baseline_panels) ? b : pa + width;
        total += detail::adaptive_step(f, pa, pb, f(pa), f(0.5 * (pa + pb)),
                                       f(pb), panel[i], panel_tol, max_depth);
    }
    return total;
}

/// Integral of f over the whole line by a truncation ladder
/// R in {r0, 2 r0, 4 r0, ...}: stop when successive truncations agree to
/// `tol` relative. Throws NonIntegrable when the ladder never settles,
/// which is how divergent moments surface.
inline double integrate_line(const std::function<double(double)>& f,
                             double tol = 1e-12, double r0 = 10.0,
                             int max_rungs = 24) {
    double r = r0;
    double prev = integrate(f, -r, r, 0.1 * tol);
    for (int rung = 1; rung <= max_rungs; ++rung) {
        const double r2 = 2.0 * r;
        // Only the two new tail pieces are integrated per rung.
        const double tails =
            integrate(f, -r2, -r, 0.1 * tol) + integrate(f, r, r2, 0.1 * tol);
        const double cur = prev + tails;
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) {
            return cur;
        }
        prev = cur;
        r = r2;
    }
    throw NonIntegrable("integrate_line: truncation ladder did not converge");
}

}  // namespace quad
}  // namespace nlcd
