#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "nlcd/errors.hpp"
#include "nlcd/fft.hpp"
#include "nlcd/grid.hpp"
#include "nlcd/kernels.hpp"
#include "nlcd/quadrature.hpp"

namespace nlcd {

/// A continuous kernel sampled on a grid as periodic-offset weights, with
/// exact parity and (for even kernels) exact unit discrete mass.
///
/// Even: w_j == w_{N-j} bit-for-bit and h * sum(w) == 1.
/// Odd:  w_j == -w_{N-j} bit-for-bit and w_0 == w_{N/2} == 0.
struct DiscreteKernel {
    Grid grid;
    std::vector<double> weights;
    Parity parity = Parity::even;
    double discrete_mass = 0.0;
    double tail_fraction = 0.0;  // |kernel| mass beyond the domain, relative
    bool tail_ok = true;

    // h * DFT(weights), cached when N is a power of two.
    std::shared_ptr<const std::vector<std::complex<double>>> spectrum;
    std::shared_ptr<const Fft> fft;
};

namespace detail {

inline double one_sided_tail_fraction(const std::function<double(double)>& f,
                                      double half_length) {
    auto abs_f = [&](double x) { return std::abs(f(x)); };
    const double inner = quad::integrate(abs_f, 0.0, half_length, 1e-10);
    double tail = 0.0;
    double a = half_length;
    for (int rung = 0; rung < 20; ++rung) {
        const double piece = quad::integrate(abs_f, a, 2.0 * a, 1e-10);
        tail += piece;
        if (piece <= 1e-14 * std::max(1e-300, inner + tail)) break;
        a *= 2.0;
    }
    const double total = inner + tail;
    return total > 0.0 ? tail / total : 0.0;
}

}  // namespace detail

/// Samples a kernel component at the periodic offsets j*h (minimum image),
/// enforces the requested parity exactly, and normalizes even kernels to
/// unit discrete mass. Throws DegenerateKernel when an even kernel's raw
/// discrete mass is not positive.
inline DiscreteKernel sample_kernel(const std::function<double(double)>& component,
                                    const Grid& grid, Parity parity) {
    const std::size_t n = grid.n;
    const double h = grid.spacing();
    DiscreteKernel k;
    k.grid = grid;
    k.parity = parity;
    k.weights.resize(n);

    for (std::size_t j = 0; j < n; ++j) {
        const double offset = (j <= n / 2)
                                  ? static_cast<double>(j) * h
                                  : (static_cast<double>(j) - static_cast<double>(n)) * h;
        k.weights[j] = component(offset);
    }

    // Pairwise (anti)symmetrization makes the parity identities bit-exact.
    if (parity == Parity::even) {
        for (std::size_t j = 1; 2 * j < n; ++j) {
            const double v = 0.5 * (k.weights[j] + k.weights[n - j]);
            k.weights[j] = v;
            k.weights[n - j] = v;
        }
        double raw = 0.0;
        for (double w : k.weights) raw += w;
        raw *= h;
        if (raw <= 0.0) {
            throw DegenerateKernel("sample_kernel: even kernel has mass <= 0");
        }
        for (double& w : k.weights) w /= raw;
        k.discrete_mass = 1.0;
    } else {
        k.weights[0] = 0.0;
        if (n % 2 == 0) k.weights[n / 2] = 0.0;
        for (std::size_t j = 1; 2 * j < n; ++j) {
            const double v = 0.5 * (k.weights[j] - k.weights[n - j]);
            k.weights[j] = v;
            k.weights[n - j] = -v;
        }
        k.discrete_mass = 0.0;
    }

    k.tail_fraction = detail::one_sided_tail_fraction(component, grid.half_length);
    k.tail_ok = k.tail_fraction < 1e-8;

    if (grid.power_of_two()) {
        auto fft = std::make_shared<Fft>(n);
        std::vector<std::complex<double>> spec(n);
        for (std::size_t j = 0; j < n; ++j) spec[j] = k.weights[j];
        fft->forward(spec);
        for (auto& z : spec) z *= h;
        k.fft = std::move(fft);
        k.spectrum =
            std::make_shared<const std::vector<std::complex<double>>>(std::move(spec));
    }
    return k;
}

enum class ConvPath { automatic, direct, fast };

/// (k * f)_i = h * sum_j w_{(i-j) mod N} f_j.
/// The direct path is the O(N^2) reference; the fast path multiplies cached
/// kernel spectra in Fourier space. Both agree to ~1e-12 in sup norm.
inline GridFunction convolve(const DiscreteKernel& k, const GridFunction& f,
                             ConvPath path = ConvPath::automatic) {
    require_same_grid(k.grid, f.grid, "convolve");
    const std::size_t n = f.size();
    if (path == ConvPath::automatic) {
        path = k.spectrum ? ConvPath::fast : ConvPath::direct;
    }
    GridFunction out(f.grid);
    if (path == ConvPath::direct) {
        const double h = f.grid.spacing();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= i; ++j) s += k.weights[i - j] * f[j];
            for (std::size_t j = i + 1; j < n; ++j) s += k.weights[n + i - j] * f[j];
            out[i] = h * s;
        }
        return out;
    }
    if (!k.spectrum) {
        throw ConfigInvalid("convolve: fast path needs a power-of-two grid");
    }
    std::vector<std::complex<double>> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = f[j];
    k.fft->forward(a);
    const auto& spec = *k.spectrum;
    for (std::size_t j = 0; j < n; ++j) a[j] *= spec[j];
    k.fft->inverse(a);
    for (std::size_t j = 0; j < n; ++j) out[j] = a[j].real();
    return out;
}

}  // namespace nlcd
