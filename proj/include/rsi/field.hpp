#pragma once

#include <algorithm>

#include "rsi/cube.hpp"
#include "rsi/grid.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Local averages over cubes. The grid box is the computational universe:
// cells of Q outside the box count as zeros, while |Q| is always the full
// cube measure, so boundary cubes are handled by zero extension.
// ---------------------------------------------------------------------------

/// <f>_{p,Q} = ((1/|Q|) int_Q |f|^p)^{1/p}, exact cell sum.
inline double p_average(const GridFunction& f, const Cube& q, double p) {
    if (p < 1.0) throw parameter_error("p_average: p must be >= 1");
    const GridSpec& g = f.grid;
    double s = 0.0;
    if (p == 1.0) {
        for_each_cell_in_box(q, g, [&](std::int64_t cx, std::int64_t cy) { s += std::abs(f.at(cx, cy)); });
    } else if (p == 2.0) {
        for_each_cell_in_box(q, g, [&](std::int64_t cx, std::int64_t cy) {
            const double a = f.at(cx, cy);
            s += a * a;
        });
    } else {
        for_each_cell_in_box(q, g, [&](std::int64_t cx, std::int64_t cy) { s += std::pow(std::abs(f.at(cx, cy)), p); });
    }
    const double avg = s * g.cell_measure() / q.measure(g);
    return p == 1.0 ? avg : std::pow(avg, 1.0 / p);
}

/// max_{cells of Q} |f| (the p = infinity average on the grid).
inline double sup_on_cube(const GridFunction& f, const Cube& q) {
    double m = 0.0;
    for_each_cell_in_box(q, f.grid, [&](std::int64_t cx, std::int64_t cy) { m = std::max(m, std::abs(f.at(cx, cy))); });
    return m;
}

// ---------------------------------------------------------------------------
// Orlicz gauges and the Luxemburg-style normalized local norm
//   ||f||_{phi,Q} = inf{ a > 0 : (1/|Q|) int_Q phi(|f|/a) <= 1 }.
// ---------------------------------------------------------------------------

struct OrliczGauge {
    enum class Tag { Power, LlogL, ExpL } tag = Tag::Power;
    double p = 1.0;  // for Power

    double phi(double t) const {
        switch (tag) {
            case Tag::Power: return std::pow(t, p);
            case Tag::LlogL: return t * std::log(std::exp(1.0) + t);
            case Tag::ExpL: return std::expm1(t);
        }
        return 0.0;
    }

    static OrliczGauge power(double p) {
        if (p < 1.0) throw parameter_error("OrliczGauge::power: p must be >= 1");
        return {Tag::Power, p};
    }
    static OrliczGauge llogl() { return {Tag::LlogL, 0.0}; }
    static OrliczGauge expl() { return {Tag::ExpL, 0.0}; }
};

inline double orlicz_average(const GridFunction& f, const Cube& q, const OrliczGauge& gauge) {
    const GridSpec& g = f.grid;
    std::vector<double> vals;
    vals.reserve(cells_inside_box(q, g));
    double sup = 0.0;
    for_each_cell_in_box(q, g, [&](std::int64_t cx, std::int64_t cy) {
        const double a = std::abs(f.at(cx, cy));
        vals.push_back(a);
        sup = std::max(sup, a);
    });
    if (sup == 0.0) return 0.0;
    const double weight = g.cell_measure() / q.measure(g);
    auto mean_phi = [&](double alpha) {
        double s = 0.0;
        for (double a : vals) s += gauge.phi(a / alpha);
        return s * weight;
    };
    // Bracket the root of mean_phi(alpha) = 1, then bisect. mean_phi is
    // strictly decreasing in alpha on (0, inf).
    double hi = sup;
    while (mean_phi(hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (lo > 1e-300 && mean_phi(lo * 0.5) <= 1.0) lo *= 0.5;
    lo *= 0.5;
    // Invariant: mean_phi(hi) <= 1 < mean_phi(lo) (up to underflow).
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_phi(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// f * chi_{R^n \ 3Q}: zero every cell whose center lies in dilate(Q,3).
inline GridFunction exclude(const GridFunction& f, const Cube& q) {
    GridFunction r = f;
    const Cube q3 = dilate(q, 3);
    for_each_cell_in_box(q3, f.grid, [&](std::int64_t cx, std::int64_t cy) { r.at(cx, cy) = 0.0; });
    return r;
}

}  // namespace rsi
