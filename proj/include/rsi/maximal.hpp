#pragma once

#include <limits>
#include <map>
#include <mutex>

#include "rsi/dyadic.hpp"
#include "rsi/field.hpp"
#include "rsi/rearrange.hpp"
#include "rsi/sio.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Finite cube families. The continuum maximal operators take a supremum
// over all cubes containing a point; every family here is a finite truncation,
// so each maximal function below is a certified lower bound for its
// continuum counterpart. A cube "contains" a cell iff the cell center lies
// in it, i.e. iff the cell is one of the cube's cells.
// ---------------------------------------------------------------------------

struct CubeFamily {
    int dim = 1;
    std::vector<Cube> cubes;
};

/// All lattice cubes meeting the grid box with side in [min_side, max_side]
/// cells.
inline CubeFamily family_from_lattice(const DyadicLattice& lat, const GridSpec& g, std::int64_t min_side,
                                      std::int64_t max_side) {
    CubeFamily fam;
    fam.dim = g.dim;
    for (int level = lat.level_min; level <= lat.level_max; ++level) {
        const std::int64_t s = lat.side_cells(level);
        if (s < min_side || s > max_side) continue;
        const Cube first = lat.cube_containing_cell(level, g.lo[0], g.lo[1]);
        for (std::int64_t my = first.lo[1];; my += s) {
            for (std::int64_t mx = first.lo[0]; mx < g.hi[0]; mx += s)
                fam.cubes.push_back(Cube{{mx, g.dim == 2 ? my : 0}, s});
            if (g.dim == 1 || my + s >= g.hi[1]) break;
        }
    }
    return fam;
}

/// Union over the base lattice and all 3^n shifted lattices.
inline CubeFamily family_from_shifted(const ShiftedSystem& sys, const GridSpec& g, std::int64_t min_side,
                                      std::int64_t max_side) {
    CubeFamily fam = family_from_lattice(sys.base, g, min_side, max_side);
    for (const auto& d : sys.derived) {
        CubeFamily extra = family_from_lattice(d, g, min_side, max_side);
        fam.cubes.insert(fam.cubes.end(), extra.cubes.begin(), extra.cubes.end());
    }
    return fam;
}

/// Cubes of the given sides at every aligned position inside the box
/// (position stride configurable).
inline CubeFamily aligned_family(const GridSpec& g, const std::vector<std::int64_t>& sides, std::int64_t stride = 1) {
    CubeFamily fam;
    fam.dim = g.dim;
    for (std::int64_t s : sides) {
        for (std::int64_t my = g.lo[1]; my + (g.dim == 2 ? s : 0) <= (g.dim == 2 ? g.hi[1] : 1); my += stride) {
            for (std::int64_t mx = g.lo[0]; mx + s <= g.hi[0]; mx += stride)
                fam.cubes.push_back(Cube{{mx, g.dim == 2 ? my : 0}, s});
            if (g.dim == 1) break;
        }
    }
    return fam;
}

/// n=1 only: every interval of cells inside the box (all positions, all
/// sides up to a cap). Quadratic in the box size; meant for small grids.
inline CubeFamily all_intervals_family(const GridSpec& g, std::int64_t max_side = 0) {
    if (g.dim != 1) throw parameter_error("all_intervals_family: 1d only");
    if (max_side <= 0) max_side = g.nx();
    CubeFamily fam;
    fam.dim = 1;
    for (std::int64_t s = 1; s <= max_side; ++s)
        for (std::int64_t a = g.lo[0]; a + s <= g.hi[0]; ++a) fam.cubes.push_back(Cube{{a, 0}, s});
    return fam;
}

// ---------------------------------------------------------------------------
// Memoized excluded applications: computing T(f chi_{R^n \ 3Q}) on Q is the
// inner kernel of every maximal operator here, and the same (f, Q) pair is
// hit once per lambda / p / gauge, so the values and their sorted absolute
// magnitudes are cached per cube. Writes are idempotent; a mutex makes the
// cache safe under concurrent evaluation.
// ---------------------------------------------------------------------------

class ExcludedEvaluator {
  public:
    struct CubeData {
        GridFunction values;              // T(f chi_{\3Q}) on Q (clipped to the box)
        std::vector<double> sorted_abs;   // padded with zeros to the full cube cell count
    };

    ExcludedEvaluator(OperatorHandle op, const GridFunction& f)
        : op_(std::move(op)), f_(f), dk_(build_discrete_kernel(op_, f.grid)) {}

    const GridFunction& source() const { return f_; }

    const CubeData& data(const Cube& q) {
        const std::array<std::int64_t, 3> key{q.lo[0], q.lo[1], q.side};
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        CubeData d;
        d.values = apply_excluded(op_, f_, q, &dk_);
        d.sorted_abs.reserve(q.cell_count(f_.grid.dim));
        for (double v : d.values.v) d.sorted_abs.push_back(std::abs(v));
        d.sorted_abs.resize(q.cell_count(f_.grid.dim), 0.0);
        std::sort(d.sorted_abs.begin(), d.sorted_abs.end(), std::greater<double>());
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(key, std::move(d)).first->second;
    }

  private:
    OperatorHandle op_;
    GridFunction f_;
    DiscreteKernel dk_;
    std::map<std::array<std::int64_t, 3>, CubeData> cache_;
    std::mutex mutex_;
};

namespace detail {

/// Scatter per-cube scalars: out(x) = max over family cubes containing x.
template <class Scalar>
inline GridFunction scatter_max(const GridSpec& g, const CubeFamily& fam, Scalar&& per_cube) {
    GridFunction out(g);
    for (const Cube& q : fam.cubes) {
        const double s = per_cube(q);
        if (s <= 0.0) continue;
        for_each_cell_in_box(q, g, [&](std::int64_t cx, std::int64_t cy) {
            double& o = out.at(cx, cy);
            o = std::max(o, s);
        });
    }
    return out;
}

inline double p_average_from_sorted(const std::vector<double>& sorted, double cell_measure, double cube_measure,
                                    double p) {
    if (std::isinf(p)) return sorted.empty() ? 0.0 : sorted.front();
    double s = 0.0;
    for (double v : sorted) {
        if (v == 0.0) break;
        s += p == 1.0 ? v : (p == 2.0 ? v * v : std::pow(v, p));
    }
    const double avg = s * cell_measure / cube_measure;
    return p == 1.0 ? avg : std::pow(avg, 1.0 / p);
}

inline double orlicz_from_sorted(const std::vector<double>& sorted, double weight, const OrliczGauge& gauge) {
    if (sorted.empty() || sorted.front() == 0.0) return 0.0;
    auto mean_phi = [&](double alpha) {
        double s = 0.0;
        for (double v : sorted) {
            if (v == 0.0) break;
            s += gauge.phi(v / alpha);
        }
        return s * weight;
    };
    double hi = sorted.front();
    while (mean_phi(hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (lo > 1e-300 && mean_phi(lo * 0.5) <= 1.0) lo *= 0.5;
    lo *= 0.5;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_phi(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace detail

/// Hardy-Littlewood maximal function M_s f = sup_Q <|f|^s>_Q^{1/s}.
inline GridFunction hl_maximal(const GridFunction& f, double s, const CubeFamily& fam) {
    if (s < 1.0) throw parameter_error("hl_maximal: s must be >= 1");
    return detail::scatter_max(f.grid, fam, [&](const Cube& q) { return p_average(f, q, s); });
}

/// M_{lambda,T} f: per cube the lambda|Q| quantile of |T(f chi_{\3Q})| on Q.
inline GridFunction m_lambda(const OperatorHandle& op, const GridFunction& f, double lambda, const CubeFamily& fam) {
    if (!(lambda > 0.0) || lambda >= 1.0) throw parameter_error("m_lambda: lambda must be in (0,1)");
    ExcludedEvaluator ev(op, f);
    return detail::scatter_max(f.grid, fam,
                               [&](const Cube& q) { return quantile_from_sorted(ev.data(q).sorted_abs, lambda); });
}

/// Sweep over a lambda grid with one shared cache.
inline std::vector<GridFunction> m_lambda_multi(ExcludedEvaluator& ev, const std::vector<double>& lambdas,
                                                const CubeFamily& fam) {
    std::vector<GridFunction> out;
    out.reserve(lambdas.size());
    for (double l : lambdas) {
        if (!(l > 0.0) || l > 1.0) throw parameter_error("m_lambda_multi: lambda must be in (0,1]");
        out.push_back(detail::scatter_max(ev.source().grid, fam, [&](const Cube& q) {
            return quantile_from_sorted(ev.data(q).sorted_abs, l);
        }));
    }
    return out;
}

/// M_{p,T} f (p = inf gives M_T, the local sup of the excluded application).
inline GridFunction m_p(const OperatorHandle& op, const GridFunction& f, double p, const CubeFamily& fam) {
    if (p < 1.0) throw parameter_error("m_p: p must be >= 1");
    ExcludedEvaluator ev(op, f);
    const double cm = f.grid.cell_measure();
    return detail::scatter_max(f.grid, fam, [&](const Cube& q) {
        return detail::p_average_from_sorted(ev.data(q).sorted_abs, cm, q.measure(f.grid), p);
    });
}

inline GridFunction m_p_cached(ExcludedEvaluator& ev, double p, const CubeFamily& fam) {
    const GridSpec& g = ev.source().grid;
    const double cm = g.cell_measure();
    return detail::scatter_max(g, fam, [&](const Cube& q) {
        return detail::p_average_from_sorted(ev.data(q).sorted_abs, cm, q.measure(g), p);
    });
}

/// M_{expL,T} f and friends: per cube the Luxemburg norm of the excluded
/// application under the gauge.
inline GridFunction m_orlicz(const OperatorHandle& op, const GridFunction& f, const OrliczGauge& gauge,
                             const CubeFamily& fam) {
    ExcludedEvaluator ev(op, f);
    const double cm = f.grid.cell_measure();
    return detail::scatter_max(f.grid, fam, [&](const Cube& q) {
        return detail::orlicz_from_sorted(ev.data(q).sorted_abs, cm / q.measure(f.grid), gauge);
    });
}

/// Bi-sublinear M_T(f,g) = sup_Q (1/|Q|) int_Q |T(f chi_{\3Q})| |g|.
inline GridFunction bilinear_m(const OperatorHandle& op, const GridFunction& f, const GridFunction& g,
                               const CubeFamily& fam) {
    if (!(f.grid == g.grid)) throw alignment_error("bilinear_m: f and g must share a grid");
    ExcludedEvaluator ev(op, f);
    const double cm = f.grid.cell_measure();
    return detail::scatter_max(f.grid, fam, [&](const Cube& q) {
        const GridFunction& tv = ev.data(q).values;
        double s = 0.0;
        for (std::int64_t cy = tv.grid.lo[1]; cy < tv.grid.hi[1]; ++cy)
            for (std::int64_t cx = tv.grid.lo[0]; cx < tv.grid.hi[0]; ++cx)
                s += std::abs(tv.at(cx, cy)) * std::abs(g.at(cx, cy));
        return s * cm / q.measure(f.grid);
    });
}

/// M_{T_j} for the annular piece T_j f = K_j * f.
inline GridFunction annular_maximal(const SphereKernel& omega, int j, const GridFunction& f, const CubeFamily& fam) {
    return m_p(OperatorHandle::annular(omega, j), f, std::numeric_limits<double>::infinity(), fam);
}

}  // namespace rsi
