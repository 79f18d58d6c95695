#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rsi {

// ---------------------------------------------------------------------------
// Error taxonomy. Every throwing precondition in the library uses one of
// these so callers can distinguish bad input from numerical failure.
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

struct invalid_input_error : error {
    using error::error;
};
struct parameter_error : error {
    using error::error;
};
struct singularity_error : error {
    using error::error;
};
struct alignment_error : error {
    using error::error;
};
struct resolution_error : error {
    using error::error;
};
struct convergence_error : error {
    using error::error;
};
struct domain_error : error {
    using error::error;
};

// ---------------------------------------------------------------------------
// Small vector type. Dimension is runtime (1 or 2); storage is fixed.
// ---------------------------------------------------------------------------

struct Vec {
    double x = 0.0;
    double y = 0.0;

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
inline Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
inline Vec operator*(double c, Vec a) { return {c * a.x, c * a.y}; }
inline double dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }

using CellIdx = std::array<std::int64_t, 2>;

// ---------------------------------------------------------------------------
// Deterministic PRNG. std::mt19937 is portable but the standard
// distributions are not; we need byte-identical output across platforms,
// so both the generator and the real mapping are fixed here.
// ---------------------------------------------------------------------------

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1,1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
};

// ---------------------------------------------------------------------------
// Deterministic parallel map: results land in caller-indexed slots, so the
// outcome is independent of the number of worker threads.
// ---------------------------------------------------------------------------

inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const int nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads), count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        pool.emplace_back([=, &body]() {
            for (std::size_t i = static_cast<std::size_t>(t); i < count; i += static_cast<std::size_t>(nt)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Ordinary least squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw invalid_input_error("fit_slope: need >= 2 matched points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw invalid_input_error("fit_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

inline bool is_pow2(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace rsi
