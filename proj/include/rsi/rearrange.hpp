#pragma once

#include <algorithm>
#include <vector>

#include "rsi/cube.hpp"
#include "rsi/grid.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Non-increasing rearrangement of |f| over a cell set, as the
// right-continuous step function of the sorted cell values:
//   f*(t) = inf{ alpha >= 0 : |{x in E : |f(x)| > alpha}| <= t }.
// On the grid, f*(t) = v_{floor(t/c)+1} with c the cell measure and v the
// values sorted non-increasing (1-indexed), zero past the total measure.
// ---------------------------------------------------------------------------

struct Rearrangement {
    std::vector<double> sorted;  // |f| values, non-increasing
    double cell_measure = 0.0;
    double total = 0.0;  // |E|

    double value_at(double t) const {
        if (t < 0.0) throw parameter_error("Rearrangement: t must be >= 0");
        const double idx = std::floor(t / cell_measure);
        if (idx >= static_cast<double>(sorted.size())) return 0.0;
        return sorted[static_cast<std::size_t>(idx)];
    }
};

/// Rearrange |f| over the cells where mask != 0 (mask aligned with f);
/// pass an empty mask to use the whole box.
inline Rearrangement rearrange(const GridFunction& f, const std::vector<std::uint8_t>& mask = {}) {
    Rearrangement r;
    r.cell_measure = f.grid.cell_measure();
    if (mask.empty()) {
        r.sorted.reserve(f.v.size());
        for (double a : f.v) r.sorted.push_back(std::abs(a));
    } else {
        if (mask.size() != f.v.size()) throw invalid_input_error("rearrange: mask size mismatch");
        for (std::size_t i = 0; i < f.v.size(); ++i)
            if (mask[i]) r.sorted.push_back(std::abs(f.v[i]));
    }
    if (r.sorted.empty()) throw invalid_input_error("rearrange: empty cell set");
    std::sort(r.sorted.begin(), r.sorted.end(), std::greater<double>());
    r.total = static_cast<double>(r.sorted.size()) * r.cell_measure;
    return r;
}

/// Sorted |f| over the cells of Q, with zeros for cells of Q outside the
/// grid box (zero extension); exactly Q.cell_count entries.
inline std::vector<double> sorted_abs_on_cube(const GridFunction& f, const Cube& q) {
    std::vector<double> vals;
    vals.reserve(q.cell_count(f.grid.dim));
    for_each_cell_in_box(q, f.grid, [&](std::int64_t cx, std::int64_t cy) { vals.push_back(std::abs(f.at(cx, cy))); });
    vals.resize(q.cell_count(f.grid.dim), 0.0);
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    return vals;
}

/// (f chi_Q)*(lambda |Q|) from presorted values; lambda = 1 evaluates the
/// last cell (the minimum over Q) rather than the vacuous value 0.
inline double quantile_from_sorted(const std::vector<double>& sorted, double lambda) {
    if (!(lambda > 0.0) || lambda > 1.0) throw parameter_error("quantile: lambda must be in (0,1]");
    const double m = static_cast<double>(sorted.size());
    std::size_t idx = static_cast<std::size_t>(std::floor(lambda * m));
    if (idx >= sorted.size()) idx = sorted.size() - 1;
    return sorted[idx];
}

inline double quantile(const GridFunction& f, const Cube& q, double lambda) {
    return quantile_from_sorted(sorted_abs_on_cube(f, q), lambda);
}

// ---------------------------------------------------------------------------
// Weak quasinorm ||F||_{L^{p,inf}} = sup_alpha alpha |{|F| > alpha}|^{1/p}.
// The sup over the finite value set is attained approaching each distinct
// value from below, i.e. max_i u_i * |{|F| >= u_i}|^{1/p}.
// ---------------------------------------------------------------------------

inline double weak_quasinorm(const GridFunction& f, double p) {
    if (p < 1.0) throw parameter_error("weak_quasinorm: p must be >= 1");
    std::vector<double> vals;
    vals.reserve(f.v.size());
    for (double a : f.v)
        if (a != 0.0) vals.push_back(std::abs(a));
    if (vals.empty()) return 0.0;
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    const double c = f.grid.cell_measure();
    double best = 0.0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i + 1 < vals.size() && vals[i + 1] == vals[i]) continue;  // not the last of a tie block
        const double measure = static_cast<double>(i + 1) * c;
        best = std::max(best, vals[i] * (p == 1.0 ? measure : std::pow(measure, 1.0 / p)));
    }
    return best;
}

}  // namespace rsi
