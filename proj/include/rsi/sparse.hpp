#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "rsi/field.hpp"
#include "rsi/rearrange.hpp"
#include "rsi/sio.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Sparse families with explicit witness sets. Witness cells are stored in
// global cell coordinates so disjointness across entries is a multiset
// check, exact in integer arithmetic.
// ---------------------------------------------------------------------------

struct SparseFamily {
    struct Entry {
        Cube cube;                      // member of the family (3Q for constructed families)
        std::vector<CellIdx> witness;   // E_Q, global cells
    };
    int dim = 1;
    double eta = 0.0;  // claimed sparseness
    std::vector<Entry> entries;
};

struct SparsenessReport {
    bool pass = false;
    double worst_ratio = 0.0;   // min over entries of |E_Q| / |Q|
    std::size_t overlap_cells = 0;
    std::size_t containment_violations = 0;
};

inline SparsenessReport verify_sparseness(const SparseFamily& fam, double eta) {
    if (!(eta > 0.0) || eta > 1.0) throw parameter_error("verify_sparseness: eta must be in (0,1]");
    SparsenessReport rep;
    rep.worst_ratio = fam.entries.empty() ? 1.0 : 1e300;
    std::set<CellIdx> seen;
    for (const auto& e : fam.entries) {
        std::size_t inside = 0;
        for (const auto& c : e.witness) {
            if (e.cube.contains_cell(c[0], c[1], fam.dim))
                ++inside;
            else
                ++rep.containment_violations;
            if (!seen.insert(c).second) ++rep.overlap_cells;
        }
        const double ratio = static_cast<double>(inside) / static_cast<double>(e.cube.cell_count(fam.dim));
        rep.worst_ratio = std::min(rep.worst_ratio, ratio);
    }
    rep.pass = rep.overlap_cells == 0 && rep.containment_violations == 0 && rep.worst_ratio >= eta - 1e-15;
    return rep;
}

/// Lambda(f,g) = sum_Q <f>_{r,Q} <g>_{s,Q} |Q|.
inline double sparse_form(const SparseFamily& fam, const GridFunction& f, const GridFunction& g, double r, double s) {
    if (r < 1.0 || s < 1.0) throw parameter_error("sparse_form: exponents must be >= 1");
    double acc = 0.0;
    for (const auto& e : fam.entries)
        acc += p_average(f, e.cube, r) * p_average(g, e.cube, s) * e.cube.measure(f.grid);
    return acc;
}

// ---------------------------------------------------------------------------
// Support partition: a cube Q0 containing supp f, then concentric rings of
// 3^n - 1 congruent cubes tiling 3Q0 \ Q0, 9Q0 \ 3Q0, ... until the domain
// box is covered. Every returned cube R satisfies supp f in 3R. Ring cubes
// may overhang the box; the overhang carries zeros.
// ---------------------------------------------------------------------------

inline std::vector<Cube> partition_support(const GridFunction& f, const GridSpec& domain) {
    const int dim = domain.dim;
    // bounding cells of supp f (whole box when f == 0)
    std::int64_t x0 = domain.lo[0], x1 = domain.hi[0], y0 = domain.lo[1], y1 = domain.hi[1];
    bool any = false;
    std::int64_t sx0 = 0, sx1 = 0, sy0 = 0, sy1 = 0;
    for (std::int64_t cy = f.grid.lo[1]; cy < f.grid.hi[1]; ++cy)
        for (std::int64_t cx = f.grid.lo[0]; cx < f.grid.hi[0]; ++cx)
            if (f.at(cx, cy) != 0.0) {
                if (!any) {
                    sx0 = cx;
                    sx1 = cx + 1;
                    sy0 = cy;
                    sy1 = cy + 1;
                    any = true;
                } else {
                    sx0 = std::min(sx0, cx);
                    sx1 = std::max(sx1, cx + 1);
                    sy0 = std::min(sy0, cy);
                    sy1 = std::max(sy1, cy + 1);
                }
            }
    if (!any) {
        sx0 = x0;
        sx1 = x1;
        sy0 = y0;
        sy1 = y1;
    }
    if (sx0 < domain.lo[0] || sx1 > domain.hi[0] || (dim == 2 && (sy0 < domain.lo[1] || sy1 > domain.hi[1])))
        throw domain_error("partition_support: support exceeds the domain box");

    // smallest power-of-two side whose aligned cube holds the support
    std::int64_t side = 1;
    auto fdiv = [](std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b;
        if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
        return q;
    };
    Cube q0;
    for (;; side <<= 1) {
        q0.lo[0] = fdiv(sx0, side) * side;
        q0.lo[1] = dim == 2 ? fdiv(sy0, side) * side : 0;
        q0.side = side;
        const bool fits = q0.lo[0] + side >= sx1 && (dim == 1 || q0.lo[1] + side >= sy1);
        if (fits) break;
    }

    std::vector<Cube> roots{q0};
    Cube inner = q0;
    auto covers_domain = [&](const Cube& c) {
        if (c.lo[0] > domain.lo[0] || c.lo[0] + c.side < domain.hi[0]) return false;
        if (dim == 2 && (c.lo[1] > domain.lo[1] || c.lo[1] + c.side < domain.hi[1])) return false;
        return true;
    };
    while (!covers_domain(inner)) {
        const Cube outer = dilate(inner, 3);
        const std::int64_t s = inner.side;
        for (int gy = 0; gy < (dim == 2 ? 3 : 1); ++gy)
            for (int gx = 0; gx < 3; ++gx) {
                if (gx == 1 && (dim == 1 || gy == 1)) continue;  // the center is already covered
                Cube r{{outer.lo[0] + gx * s, dim == 2 ? outer.lo[1] + gy * s : 0}, s};
                if (r.lo[0] + r.side <= domain.lo[0] || r.lo[0] >= domain.hi[0]) continue;
                if (dim == 2 && (r.lo[1] + r.side <= domain.lo[1] || r.lo[1] >= domain.hi[1])) continue;
                roots.push_back(r);
            }
        inner = outer;
    }
    return roots;
}

// ---------------------------------------------------------------------------
// Local stopping-time construction (one step of the domination
// iteration). Stopping cubes come from the subdivision tree of Q0: cubes
// halve while their side is even and split 3-fold otherwise, so ring roots
// of side 3^m * 2^a subdivide exactly to single cells. For a purely dyadic
// root the tree is the dyadic grid D(Q0) and the stopping height is the
// classical 2^-(n+1); when 3-fold splits occur the height drops to
// 1/(2*3^n) so that a stopping cube never fills with bad cells, and the
// measure targets shrink in step. Either way:
//   |E_1|, |E_2| <= theta/4 * |Q0| <= 2^-(n+3) |Q0|,
//   sum |P_j| <= |Q0| / 2, and each P_j meets the complement of E.
// ---------------------------------------------------------------------------

struct SparseExponents {
    double q = 1.0;
    double r = 1.0;
    double s = 1.0;
};

enum class ThresholdMode { Calibrated, SuppliedNorms };

/// Externally supplied norm estimates for supplied-norms mode.
struct SuppliedNorms {
    double weak_qq = 1.0;       // ||T||_{L^q -> L^{q,inf}} estimate
    double bilinear_weak = 1.0; // ||M_T||_{L^r x L^s -> L^{nu,inf}} estimate
};

struct TraceRow {
    Cube q0;
    double a_threshold = 0.0;   // A
    double b_threshold = 0.0;   // B
    double e1_fraction = 0.0;   // |E1| / |Q0|
    double e2_fraction = 0.0;   // |E2| / |Q0|
    double stopping_fraction = 0.0;
    std::size_t stopping_count = 0;
    int depth = 0;
    bool bounds_ok = true;
};

struct LocalStoppingResult {
    std::vector<Cube> stopping;
    TraceRow trace;
};

namespace detail {

/// Sides of the subdivision tree below a root side (root first, 1 last).
inline std::vector<std::int64_t> tree_sides(std::int64_t side) {
    std::vector<std::int64_t> s{side};
    while (side > 1) {
        if (side % 2 == 0)
            side /= 2;
        else if (side % 3 == 0)
            side /= 3;
        else
            throw parameter_error("sparse tree: cube side has a prime factor other than 2 or 3");
        s.push_back(side);
    }
    return s;
}

inline bool has_factor3(std::int64_t side) {
    while (side % 2 == 0) side /= 2;
    return side % 3 == 0;
}

/// T(f restricted to a cell predicate) evaluated on the cells of Q (clipped
/// to the box).
template <class Pred>
inline GridFunction apply_masked(const DiscreteKernel& dk, const GridFunction& f, const Cube& q, Pred&& keep) {
    std::vector<SupportCell> src;
    for (const auto& s : support_of(f))
        if (keep(s.cx, s.cy)) src.push_back(s);
    GridSpec og;
    og.dim = f.grid.dim;
    og.k = f.grid.k;
    og.lo[0] = std::max(q.lo[0], f.grid.lo[0]);
    og.hi[0] = std::min(q.lo[0] + q.side, f.grid.hi[0]);
    og.lo[1] = f.grid.dim == 2 ? std::max(q.lo[1], f.grid.lo[1]) : 0;
    og.hi[1] = f.grid.dim == 2 ? std::min(q.lo[1] + q.side, f.grid.hi[1]) : 1;
    GridFunction out(og);
    if (og.hi[0] <= og.lo[0] || (f.grid.dim == 2 && og.hi[1] <= og.lo[1])) return out;
    for (std::int64_t cy = og.lo[1]; cy < og.hi[1]; ++cy)
        for (std::int64_t cx = og.lo[0]; cx < og.hi[0]; ++cx) {
            double acc = 0.0;
            for (const auto& s : src) acc += dk.at(cx - s.cx, cy - s.cy) * s.val;
            out.at(cx, cy) = acc;
        }
    return out;
}

}  // namespace detail

inline LocalStoppingResult local_stopping(const Cube& q0, const GridFunction& f, const GridFunction& g,
                                          const OperatorHandle& op, const SparseExponents& ex, ThresholdMode mode,
                                          const SuppliedNorms& norms = SuppliedNorms{},
                                          const DiscreteKernel* prebuilt = nullptr) {
    if (ex.q > ex.r || ex.s < 1.0 || ex.q < 1.0) throw parameter_error("local_stopping: need 1 <= q <= r and s >= 1");
    const GridSpec& grid = f.grid;
    const int dim = grid.dim;
    DiscreteKernel local;
    if (!prebuilt) {
        local = build_discrete_kernel(op, grid);
        prebuilt = &local;
    }
    const Cube q03 = dilate(q0, 3);
    const double theta = detail::has_factor3(q0.side) ? 0.5 / (dim == 2 ? 9.0 : 3.0) : (dim == 2 ? 0.125 : 0.25);
    const double cube_cells = static_cast<double>(q0.cell_count(dim));
    const double target_cells = theta / 4.0 * cube_cells;  // per-set measure target, in cells

    LocalStoppingResult res;
    res.trace.q0 = q0;

    // local averages (zero extension outside the box)
    const double fq = p_average(f, q03, ex.q);
    const double fr = p_average(f, q03, ex.r);
    const double gs = p_average(g, q0, ex.s);

    // score 1: |T(f chi_{3Q0})| on Q0
    const GridFunction u = detail::apply_masked(*prebuilt, f, q0,
                                                [&](std::int64_t cx, std::int64_t cy) { return q03.contains_cell(cx, cy, dim); });

    // score 2: the local bi-sublinear maximal function over tree subcubes
    GridFunction score2(u.grid);
    const auto sides = detail::tree_sides(q0.side);
    const double cm = grid.cell_measure();
    for (std::int64_t side : sides) {
        for (std::int64_t oy = 0; oy < (dim == 2 ? q0.side / side : 1); ++oy)
            for (std::int64_t ox = 0; ox < q0.side / side; ++ox) {
                const Cube q{{q0.lo[0] + ox * side, dim == 2 ? q0.lo[1] + oy * side : 0}, side};
                if (cells_inside_box(q, grid) == 0) continue;
                const Cube q3 = dilate(q, 3);
                const GridFunction v = detail::apply_masked(*prebuilt, f, q, [&](std::int64_t cx, std::int64_t cy) {
                    return q03.contains_cell(cx, cy, dim) && !q3.contains_cell(cx, cy, dim);
                });
                double acc = 0.0;
                for (std::int64_t cy = v.grid.lo[1]; cy < v.grid.hi[1]; ++cy)
                    for (std::int64_t cx = v.grid.lo[0]; cx < v.grid.hi[0]; ++cx)
                        acc += std::abs(v.at(cx, cy)) * std::abs(g.at(cx, cy));
                const double mq = acc * cm / q.measure(grid);
                for_each_cell_in_box(q, grid, [&](std::int64_t cx, std::int64_t cy) {
                    double& o = score2.at(cx, cy);
                    o = std::max(o, mq);
                });
            }
    }

    // thresholds
    double tau1 = 0.0, tau2 = 0.0;
    if (mode == ThresholdMode::Calibrated) {
        const std::vector<double> s1 = sorted_abs_on_cube(u, q0);
        std::vector<double> s2;
        s2.reserve(q0.cell_count(dim));
        for (double v : score2.v) s2.push_back(std::abs(v));
        s2.resize(q0.cell_count(dim), 0.0);
        std::sort(s2.begin(), s2.end(), std::greater<double>());
        const double lam = target_cells / cube_cells;
        tau1 = quantile_from_sorted(s1, lam);
        tau2 = quantile_from_sorted(s2, lam);
        res.trace.a_threshold = fq > 0.0 ? tau1 / fq : 0.0;
        res.trace.b_threshold = (fr > 0.0 && gs > 0.0) ? tau2 / (fr * gs) : 0.0;
    } else {
        const double nu_inv = 1.0 / ex.r + 1.0 / ex.s;
        const double a = std::pow(8.0 * std::pow(6.0, dim), 1.0 / ex.q) * norms.weak_qq;
        const double b = std::pow(std::pow(2.0, dim + 3), nu_inv) * std::pow(3.0, dim / ex.r) * norms.bilinear_weak;
        res.trace.a_threshold = a;
        res.trace.b_threshold = b;
        tau1 = a * fq;
        tau2 = b * fr * gs;
    }

    // E = E1 union E2 as a cell set inside Q0 (cells outside the box score 0)
    std::size_t n_e1 = 0, n_e2 = 0;
    std::vector<std::uint8_t> bad(q0.cell_count(dim), 0);
    auto cube_index = [&](std::int64_t cx, std::int64_t cy) {
        return static_cast<std::size_t>(dim == 2 ? (cy - q0.lo[1]) * q0.side + (cx - q0.lo[0]) : cx - q0.lo[0]);
    };
    for_each_cell_in_box(q0, grid, [&](std::int64_t cx, std::int64_t cy) {
        const bool in1 = std::abs(u.at(cx, cy)) > tau1;
        const bool in2 = std::abs(score2.at(cx, cy)) > tau2;
        n_e1 += in1;
        n_e2 += in2;
        if (in1 || in2) bad[cube_index(cx, cy)] = 1;
    });
    res.trace.e1_fraction = static_cast<double>(n_e1) / cube_cells;
    res.trace.e2_fraction = static_cast<double>(n_e2) / cube_cells;

    // Calderon-Zygmund selection on chi_E at height theta within the tree
    struct Walker {
        const std::vector<std::uint8_t>& bad;
        const Cube& q0;
        int dim;
        double theta;
        std::vector<Cube>* out;
        int max_depth = 0;

        std::size_t count(const Cube& c) const {
            std::size_t n = 0;
            const std::int64_t w = dim == 2 ? q0.side : 1;
            for (std::int64_t cy = c.lo[1]; cy < (dim == 2 ? c.lo[1] + c.side : 1); ++cy)
                for (std::int64_t cx = c.lo[0]; cx < c.lo[0] + c.side; ++cx)
                    n += bad[static_cast<std::size_t>(dim == 2 ? (cy - q0.lo[1]) * w + (cx - q0.lo[0])
                                                               : cx - q0.lo[0])];
            return n;
        }

        void walk(const Cube& c, int depth, bool is_root) {
            const std::size_t n = count(c);
            if (n == 0) return;
            max_depth = std::max(max_depth, depth);
            const double density = static_cast<double>(n) / static_cast<double>(c.cell_count(dim));
            if (!is_root && density > theta) {
                out->push_back(c);
                return;
            }
            if (c.side == 1) {
                // a lone bad cell at the recursion floor is its own stopping cube
                if (!is_root) out->push_back(c);
                return;
            }
            const int split = c.side % 2 == 0 ? 2 : 3;
            const std::int64_t child = c.side / split;
            for (int gy = 0; gy < (dim == 2 ? split : 1); ++gy)
                for (int gx = 0; gx < split; ++gx)
                    walk(Cube{{c.lo[0] + gx * child, dim == 2 ? c.lo[1] + gy * child : 0}, child}, depth + 1, false);
        }
    };
    Walker w{bad, q0, dim, theta, &res.stopping, 0};
    w.walk(q0, 0, true);
    res.trace.depth = w.max_depth;
    res.trace.stopping_count = res.stopping.size();
    double stop_cells = 0.0;
    for (const auto& p : res.stopping) stop_cells += static_cast<double>(p.cell_count(dim));
    res.trace.stopping_fraction = stop_cells / cube_cells;
    res.trace.bounds_ok = res.trace.e1_fraction <= theta / 4.0 + 1e-15 && res.trace.e2_fraction <= theta / 4.0 + 1e-15 &&
                          res.trace.stopping_fraction <= 0.5 + 1e-15;
    return res;
}

// ---------------------------------------------------------------------------
// Full construction: recurse local_stopping from every support-partition
// root, collect the family F with witnesses E_Q = Q \ union P_j(Q), and
// return S = {3Q : Q in F} with eta = 1/(2*3^n).
// ---------------------------------------------------------------------------

struct SparseDomination {
    SparseFamily family;          // S = {3Q}, with inherited witnesses
    double constant = 0.0;        // K = max over the trace of (A + B)
    std::vector<TraceRow> trace;
    std::vector<Cube> roots;
};

inline SparseDomination sparse_dominate(const GridFunction& f, const GridFunction& g, const OperatorHandle& op,
                                        const SparseExponents& ex, ThresholdMode mode,
                                        const SuppliedNorms& norms = SuppliedNorms{}) {
    if (!(f.grid == g.grid)) throw alignment_error("sparse_dominate: f and g must share a grid");
    SparseDomination out;
    out.roots = partition_support(f, f.grid);
    const DiscreteKernel dk = build_discrete_kernel(op, f.grid);

    struct Item {
        Cube cube;
    };
    std::vector<Item> stack;
    for (auto it = out.roots.rbegin(); it != out.roots.rend(); ++it) stack.push_back({*it});
    while (!stack.empty()) {
        const Cube q = stack.back().cube;
        stack.pop_back();
        LocalStoppingResult ls = local_stopping(q, f, g, op, ex, mode, norms, &dk);

        SparseFamily::Entry entry;
        entry.cube = dilate(q, 3);
        std::vector<std::uint8_t> removed(q.cell_count(f.grid.dim), 0);
        for (const auto& p : ls.stopping)
            for (std::int64_t cy = p.lo[1]; cy < (f.grid.dim == 2 ? p.lo[1] + p.side : 1); ++cy)
                for (std::int64_t cx = p.lo[0]; cx < p.lo[0] + p.side; ++cx)
                    removed[static_cast<std::size_t>(f.grid.dim == 2 ? (cy - q.lo[1]) * q.side + (cx - q.lo[0])
                                                                     : cx - q.lo[0])] = 1;
        for (std::int64_t cy = q.lo[1]; cy < (f.grid.dim == 2 ? q.lo[1] + q.side : q.lo[1] + 1); ++cy)
            for (std::int64_t cx = q.lo[0]; cx < q.lo[0] + q.side; ++cx) {
                const std::size_t idx = static_cast<std::size_t>(
                    f.grid.dim == 2 ? (cy - q.lo[1]) * q.side + (cx - q.lo[0]) : cx - q.lo[0]);
                if (!removed[idx]) entry.witness.push_back({cx, f.grid.dim == 2 ? cy : 0});
            }
        out.family.entries.push_back(std::move(entry));
        out.trace.push_back(ls.trace);
        out.constant = std::max(out.constant, ls.trace.a_threshold + ls.trace.b_threshold);

        for (auto it = ls.stopping.rbegin(); it != ls.stopping.rend(); ++it) stack.push_back({*it});
    }
    out.family.dim = f.grid.dim;
    out.family.eta = 0.5 / (f.grid.dim == 2 ? 9.0 : 3.0);
    return out;
}

}  // namespace rsi
