#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "nlcd/errors.hpp"

namespace nlcd {

/// Iterative radix-2 complex FFT with precomputed twiddle factors.
/// Size must be a power of two; the inverse includes the 1/n factor.
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n_ == 0 || (n_ & (n_ - 1)) != 0) {
            throw ConfigInvalid("Fft: size must be a power of two");
        }
        roots_.resize(n_ / 2);
        const double step = -2.0 * M_PI / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_ / 2; ++k) {
            const double a = step * static_cast<double>(k);
            roots_[k] = {std::cos(a), std::sin(a)};
        }
        rev_.resize(n_);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n_) ++bits;
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b) {
                r |= ((i >> b) & 1u) << (bits - 1 - b);
            }
            rev_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::vector<std::complex<double>>& a) const {
        if (a.size() != n_) throw ConfigInvalid("Fft: length mismatch");
        for (std::size_t i = 0; i < n_; ++i) {
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        }
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t stride = n_ / len;
            const std::size_t half = len >> 1;
            for (std::size_t base = 0; base < n_; base += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    const std::complex<double> w = roots_[k * stride];
                    const std::complex<double> t = w * a[base + k + half];
                    const std::complex<double> u = a[base + k];
                    a[base + k] = u + t;
                    a[base + k + half] = u - t;
                }
            }
        }
    }

    void inverse(std::vector<std::complex<double>>& a) const {
        for (auto& z : a) z = std::conj(z);
        forward(a);
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (auto& z : a) z = std::conj(z) * inv_n;
    }

  private:
    std::size_t n_;
    std::vector<std::complex<double>> roots_;
    std::vector<std::size_t> rev_;
};

}  // namespace nlcd
