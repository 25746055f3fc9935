#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nlcd/errors.hpp"
#include "nlcd/grid.hpp"
#include "nlcd/quadrature.hpp"

namespace nlcd {

/// Self-similar source profile f_m: the constant-sign, mass-m solution of
///     A f' + (xi/2) f = (B/2) f^2,
/// the once-integrated form of the profile equation
///     -A f'' - (xi/2) f' = (1/2) f - (B/2) (f^2)'.
/// The source solution of the limit equation is U(t,x) = t^{-1/2} f_m(x/sqrt(t)).
struct Profile {
    double m = 0.0;
    double A = 1.0;
    double B = 0.0;
    double c_norm = std::numeric_limits<double>::quiet_NaN();
    double center = 0.0;           // f_m(0)
    double mass_quadrature = 0.0;  // recomputed integral of f_m
    std::string method;            // "closed_form" | "shooting" | "zero"
    std::function<double(double)> f;

    double operator()(double xi) const { return f(xi); }
};

namespace detail {

/// One-sided antiderivative of the Gaussian factor:
/// E(xi) = integral_0^xi exp(-s^2/(4A)) ds = sqrt(pi A) * erf(xi / (2 sqrt(A))).
inline double gaussian_antiderivative(double xi, double A) {
    return std::sqrt(M_PI * A) * std::erf(xi / (2.0 * std::sqrt(A)));
}

inline double profile_support_radius(double A) { return 16.0 * std::sqrt(A); }

inline Profile zero_profile(double A, double B) {
    Profile p;
    p.m = 0.0;
    p.A = A;
    p.B = B;
    p.center = 0.0;
    p.mass_quadrature = 0.0;
    p.method = "zero";
    p.f = [](double) { return 0.0; };
    return p;
}

inline double closed_form_mass(double c_norm, double A, double B) {
    const double R = profile_support_radius(A);
    const double half_b = B / (2.0 * A);
    return quad::integrate(
        [=](double xi) {
            return std::exp(-xi * xi / (4.0 * A)) /
                   (c_norm - half_b * gaussian_antiderivative(xi, A));
        },
        -R, R, 1e-13);
}

}  // namespace detail

/// Closed-form construction. Solving the Bernoulli equation with g = 1/f
/// gives
///   f(xi) = exp(-xi^2/(4A)) / (C - (B/(2A)) E(xi)),
/// and C is fixed by bisection so the quadrature mass equals m. Any
/// C > |B| sqrt(pi A) / (2A) keeps the denominator sign-definite, and the
/// mass decreases monotonically from +inf to 0 on that ray.
inline Profile build_profile_closed_form(double m, double A, double B) {
    if (A <= 0.0) throw ConfigInvalid("build_profile_closed_form: A must be > 0");
    if (m == 0.0) return detail::zero_profile(A, B);
    if (m < 0.0) {
        // -f solves the same problem with (A, -B) and mass -m.
        Profile p = build_profile_closed_form(-m, A, -B);
        Profile out;
        out.m = m;
        out.A = A;
        out.B = B;
        out.c_norm = -p.c_norm;
        out.center = -p.center;
        out.mass_quadrature = -p.mass_quadrature;
        out.method = p.method;
        auto base = p.f;
        out.f = [base](double xi) { return -base(xi); };
        return out;
    }

    const double sqrt_pi_a = std::sqrt(M_PI * A);
    const double threshold = std::abs(B) * sqrt_pi_a / (2.0 * A);
    const double heat_c = std::sqrt(4.0 * M_PI * A) / m;  // exact when B = 0

    // Bracket in s = C - threshold > 0, where mass is monotone decreasing.
    double s_lo = heat_c;
    double s_hi = heat_c;
    int guard = 0;
    while (detail::closed_form_mass(threshold + s_hi, A, B) >= m) {
        s_hi *= 2.0;
        if (++guard > 200) {
            throw NoAdmissibleConstant(
                "build_profile_closed_form: no upper bracket for C");
        }
    }
    guard = 0;
    while (detail::closed_form_mass(threshold + s_lo, A, B) <= m) {
        s_lo *= 0.5;
        if (++guard > 200) {
            throw NoAdmissibleConstant(
                "build_profile_closed_form: no lower bracket for C");
        }
    }

    double mass_mid = 0.0;
    double s_mid = 0.5 * (s_lo + s_hi);
    for (int it = 0; it < 200; ++it) {
        s_mid = 0.5 * (s_lo + s_hi);
        mass_mid = detail::closed_form_mass(threshold + s_mid, A, B);
        if (std::abs(mass_mid - m) <= 1e-13 * std::max(1.0, m)) break;
        if (s_hi - s_lo <= 1e-16 * s_hi) break;
        if (mass_mid > m) {
            s_lo = s_mid;
        } else {
            s_hi = s_mid;
        }
    }

    const double c_norm = threshold + s_mid;
    const double half_b = B / (2.0 * A);
    Profile p;
    p.m = m;
    p.A = A;
    p.B = B;
    p.c_norm = c_norm;
    p.method = "closed_form";
    p.f = [c_norm, half_b, A](double xi) {
        return std::exp(-xi * xi / (4.0 * A)) /
               (c_norm - half_b * detail::gaussian_antiderivative(xi, A));
    };
    p.center = p.f(0.0);
    p.mass_quadrature = mass_mid;
    return p;
}

namespace detail {

struct ShootingTrajectory {
    double xi_max = 0.0;
    double step = 0.0;
    std::vector<double> right;  // f at 0, h, 2h, ...
    std::vector<double> left;   // f at 0, -h, -2h, ...
    bool blew_up = false;
};

/// Integrates A f' = (B/2) f^2 - (xi/2) f outward from f(0) = center with
/// classical RK4 on a fixed step.
inline ShootingTrajectory shoot(double center, double A, double B) {
    ShootingTrajectory tr;
    tr.xi_max = profile_support_radius(A);
    const std::size_t steps = 8192;  // even, so Simpson applies directly
    tr.step = tr.xi_max / static_cast<double>(steps);
    auto rhs = [A, B](double xi, double f) {
        return ((B / 2.0) * f * f - (xi / 2.0) * f) / A;
    };
    const double huge = 1e12;
    for (int dir : {+1, -1}) {
        auto& side = dir > 0 ? tr.right : tr.left;
        side.assign(steps + 1, 0.0);
        side[0] = center;
        double f = center;
        for (std::size_t i = 0; i < steps; ++i) {
            const double xi = dir * static_cast<double>(i) * tr.step;
            const double h = dir * tr.step;
            const double k1 = rhs(xi, f);
            const double k2 = rhs(xi + 0.5 * h, f + 0.5 * h * k1);
            const double k3 = rhs(xi + 0.5 * h, f + 0.5 * h * k2);
            const double k4 = rhs(xi + h, f + h * k3);
            f += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!std::isfinite(f) || std::abs(f) > huge) {
                tr.blew_up = true;
                return tr;
            }
            side[i + 1] = f;
        }
    }
    return tr;
}

inline double simpson_mass(const ShootingTrajectory& tr) {
    if (tr.blew_up) return std::numeric_limits<double>::infinity();
    auto half = [&](const std::vector<double>& side) {
        double s = side.front() + side.back();
        for (std::size_t i = 1; i + 1 < side.size(); ++i) {
            s += (i % 2 == 1 ? 4.0 : 2.0) * side[i];
        }
        return tr.step / 3.0 * s;
    };
    return half(tr.right) + half(tr.left);
}

}  // namespace detail

/// Independent oracle for the same profile: shoot the first-order ODE
/// outward from an unknown center value and bisect the center until the
/// quadrature mass matches m.
inline Profile build_profile_shooting(double m, double A, double B) {
    if (A <= 0.0) throw ConfigInvalid("build_profile_shooting: A must be > 0");
    if (m == 0.0) return detail::zero_profile(A, B);
    if (m < 0.0) {
        Profile p = build_profile_shooting(-m, A, -B);
        Profile out;
        out.m = m;
        out.A = A;
        out.B = B;
        out.c_norm = -p.c_norm;
        out.center = -p.center;
        out.mass_quadrature = -p.mass_quadrature;
        out.method = p.method;
        auto base = p.f;
        out.f = [base](double xi) { return -base(xi); };
        return out;
    }

    const double heat_center = m / std::sqrt(4.0 * M_PI * A);
    double c_lo = 0.0;  // mass 0 < m
    double c_hi = heat_center;
    int guard = 0;
    while (detail::simpson_mass(detail::shoot(c_hi, A, B)) <= m) {
        c_hi *= 2.0;
        if (++guard > 100) {
            throw BisectionFailure(
                "build_profile_shooting: mass never exceeded target while "
                "raising f(0); bracket not found");
        }
    }

    double center = 0.5 * (c_lo + c_hi);
    detail::ShootingTrajectory best;
    for (int it = 0; it < 200; ++it) {
        center = 0.5 * (c_lo + c_hi);
        auto tr = detail::shoot(center, A, B);
        const double mass = detail::simpson_mass(tr);
        if (!tr.blew_up) best = tr;
        if (std::abs(mass - m) <= 1e-13 * std::max(1.0, m)) break;
        if (c_hi - c_lo <= 1e-16 * std::max(1.0, c_hi)) break;
        if (mass < m) {
            c_lo = center;
        } else {
            c_hi = center;
        }
    }
    if (best.right.empty()) {
        throw BisectionFailure("build_profile_shooting: every candidate blew up");
    }

    // Package the trajectory as a cubic interpolant on a symmetric grid.
    const std::size_t half = best.right.size() - 1;
    const std::size_t n = 2 * half;
    Grid grid(n, best.xi_max);
    auto values = std::make_shared<GridFunction>(grid);
    for (std::size_t i = 0; i < half; ++i) {
        (*values)[i] = best.left[half - i];  // x = -xi_max + i*h
    }
    for (std::size_t i = 0; i <= half; ++i) {
        if (half + i < n) (*values)[half + i] = best.right[i];
    }
    const double xi_max = best.xi_max;

    Profile p;
    p.m = m;
    p.A = A;
    p.B = B;
    p.center = center;
    p.method = "shooting";
    p.f = [values, xi_max](double xi) {
        if (std::abs(xi) >= xi_max) return 0.0;
        return interpolate(*values, xi, Interp::cubic);
    };
    p.mass_quadrature = detail::simpson_mass(best);
    return p;
}

/// U(t, x) = t^{-1/2} f_m(x / sqrt(t)).
inline double evaluate_U(const Profile& profile, double t, double x) {
    if (t <= 0.0) throw NonPositiveTime("evaluate_U: t must be > 0");
    const double rt = std::sqrt(t);
    return profile.f(x / rt) / rt;
}

/// Sup over interior grid nodes of the profile-equation defect
///   |-A f'' - (xi/2) f' - (1/2) f + (B/2) (f^2)'|
/// with centered second-order differences; O(h^2) for a true profile.
inline double profile_residual(const Profile& profile, const Grid& grid) {
    const double h = grid.spacing();
    double worst = 0.0;
    for (std::size_t j = 1; j + 1 < grid.n; ++j) {
        const double xi = grid.point(j);
        const double fm = profile.f(xi - h);
        const double f0 = profile.f(xi);
        const double fp = profile.f(xi + h);
        const double d1 = (fp - fm) / (2.0 * h);
        const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
        const double dsq = (fp * fp - fm * fm) / (2.0 * h);
        const double defect = -profile.A * d2 - 0.5 * xi * d1 - 0.5 * f0 +
                              0.5 * profile.B * dsq;
        worst = std::max(worst, std::abs(defect));
    }
    return worst;
}

}  // namespace nlcd
