#pragma once

#include <complex>
#include <vector>

#include "rsi/common.hpp"

namespace rsi {

// Iterative radix-2 FFT, in place. Sizes must be powers of two. This is the
// only transform the project needs (padded linear convolutions and the
// multiplier oracle in tests), so no external FFT dependency is pulled in.

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0) return;
    if (!is_pow2(static_cast<std::int64_t>(n))) throw parameter_error("fft: size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

// 2D transform over a row-major nx*ny buffer (rows first, then columns).
inline void fft2_inplace(std::vector<std::complex<double>>& a, std::size_t nx, std::size_t ny, bool inverse) {
    if (a.size() != nx * ny) throw parameter_error("fft2: buffer size mismatch");
    std::vector<std::complex<double>> tmp(std::max(nx, ny));
    for (std::size_t r = 0; r < ny; ++r) {
        tmp.assign(a.begin() + static_cast<std::ptrdiff_t>(r * nx),
                   a.begin() + static_cast<std::ptrdiff_t>((r + 1) * nx));
        fft_inplace(tmp, inverse);
        std::copy(tmp.begin(), tmp.end(), a.begin() + static_cast<std::ptrdiff_t>(r * nx));
    }
    tmp.resize(ny);
    for (std::size_t c = 0; c < nx; ++c) {
        for (std::size_t r = 0; r < ny; ++r) tmp[r] = a[r * nx + c];
        fft_inplace(tmp, inverse);
        for (std::size_t r = 0; r < ny; ++r) a[r * nx + c] = tmp[r];
    }
}

inline std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace rsi
