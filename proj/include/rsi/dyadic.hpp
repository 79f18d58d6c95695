#pragma once

#include <map>
#include <vector>

#include "rsi/cube.hpp"
#include "rsi/field.hpp"
#include "rsi/grid.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Dyadic lattices on the cell grid, truncated to a level window. Level L
// cubes have side base_side * 2^L cells and per-level corner offsets; the
// offsets satisfy the child-coherence relation so each cube splits exactly
// into 2^n children of the lattice.
// ---------------------------------------------------------------------------

struct DyadicLattice {
    int dim = 1;
    int grid_k = 0;              // h = 2^-grid_k, for real-coordinate views
    std::int64_t base_side = 1;  // side in cells at level 0
    int level_min = 0;
    int level_max = 0;
    std::vector<CellIdx> offsets;  // per level, level_min first

    std::int64_t side_cells(int level) const { return base_side << level; }
    const CellIdx& offset(int level) const { return offsets[static_cast<std::size_t>(level - level_min)]; }

    Cube cube_at(int level, std::int64_t mx, std::int64_t my = 0) const {
        const std::int64_t s = side_cells(level);
        const CellIdx& o = offset(level);
        return Cube{{o[0] + s * mx, dim == 2 ? o[1] + s * my : 0}, s};
    }

    /// The level-L lattice cube whose half-open footprint holds the cell.
    Cube cube_containing_cell(int level, std::int64_t cx, std::int64_t cy = 0) const {
        const std::int64_t s = side_cells(level);
        const CellIdx& o = offset(level);
        auto fdiv = [](std::int64_t a, std::int64_t b) {
            std::int64_t q = a / b;
            if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
            return q;
        };
        return cube_at(level, fdiv(cx - o[0], s), dim == 2 ? fdiv(cy - o[1], s) : 0);
    }

    bool member(const Cube& q, int* level_out = nullptr) const {
        for (int level = level_min; level <= level_max; ++level) {
            const std::int64_t s = side_cells(level);
            if (s != q.side) continue;
            const CellIdx& o = offset(level);
            auto aligned = [&](std::int64_t c, std::int64_t off) {
                const std::int64_t r = (c - off) % s;
                return r == 0;
            };
            if (!aligned(q.lo[0], o[0])) return false;
            if (dim == 2 && !aligned(q.lo[1], o[1])) return false;
            if (level_out) *level_out = level;
            return true;
        }
        return false;
    }
};

inline DyadicLattice standard_lattice(int dim, int grid_k, int level_min, int level_max) {
    if (level_max < level_min) throw parameter_error("standard_lattice: empty level range");
    DyadicLattice d;
    d.dim = dim;
    d.grid_k = grid_k;
    d.base_side = 1;
    d.level_min = level_min;
    d.level_max = level_max;
    d.offsets.assign(static_cast<std::size_t>(level_max - level_min + 1), CellIdx{0, 0});
    return d;
}

/// Lattice-coordinate view of a cube: (lattice_id, level, integer coords).
struct DyadicCube {
    int lattice_id = 0;
    int level = 0;
    CellIdx coords{0, 0};
};

// ---------------------------------------------------------------------------
// Three Lattice construction: for a lattice D there are 3^n lattices D^(j)
// with {3Q : Q in D} = union_j D^(j), and for each Q in D and each j a
// unique R in D^(j) of side 3*side(Q) containing Q. Level-L membership of
// 3Q in D^(j) is a mod-3 residue of the cube coordinate; the residues
// evolve down the levels as rho_{L-1} = 2*rho_L - 1 + delta (mod 3), which
// is exactly what makes every D^(j) closed under taking children.
// ---------------------------------------------------------------------------

struct ShiftedSystem {
    DyadicLattice base;
    std::vector<DyadicLattice> derived;                 // 3^n lattices
    std::vector<std::vector<std::array<int, 2>>> rho;   // [j][level - level_min][dim]

    int lattice_count() const { return static_cast<int>(derived.size()); }

    /// Index j with 3Q in D^(j); Q must be a base-lattice cube.
    int classify(const Cube& q) const {
        int level = 0;
        if (!base.member(q, &level)) throw invalid_input_error("ShiftedSystem::classify: not a base-lattice cube");
        const std::int64_t s = base.side_cells(level);
        const CellIdx& o = base.offset(level);
        std::array<int, 2> r{0, 0};
        for (int d = 0; d < base.dim; ++d) {
            const std::int64_t m = (q.lo[static_cast<std::size_t>(d)] - o[static_cast<std::size_t>(d)]) / s;
            r[static_cast<std::size_t>(d)] = static_cast<int>(((m % 3) + 3) % 3);
        }
        const std::size_t li = static_cast<std::size_t>(level - base.level_min);
        for (int j = 0; j < lattice_count(); ++j)
            if (rho[static_cast<std::size_t>(j)][li] == r) return j;
        throw error("ShiftedSystem::classify: residue table is inconsistent");
    }

    /// The unique R in D^(j) with side 3*side(Q) containing Q.
    Cube containing(const Cube& q, int j) const {
        int level = 0;
        if (!base.member(q, &level)) throw invalid_input_error("ShiftedSystem::containing: not a base-lattice cube");
        const std::int64_t s = base.side_cells(level);
        const CellIdx& o = base.offset(level);
        const std::size_t li = static_cast<std::size_t>(level - base.level_min);
        Cube r;
        r.side = 3 * s;
        for (int d = 0; d < base.dim; ++d) {
            const std::size_t dd = static_cast<std::size_t>(d);
            const std::int64_t qc = (q.lo[dd] - o[dd]) / s;
            const int want = rho[static_cast<std::size_t>(j)][li][dd];
            std::int64_t m = qc - 1;
            for (std::int64_t cand = qc - 1; cand <= qc + 1; ++cand)
                if (static_cast<int>(((cand % 3) + 3) % 3) == want) m = cand;
            r.lo[dd] = o[dd] + s * (m - 1);
        }
        if (base.dim == 1) r.lo[1] = 0;
        return r;
    }
};

inline ShiftedSystem three_lattice(const DyadicLattice& d) {
    if (d.level_max < d.level_min) throw parameter_error("three_lattice: empty level range");
    const int nlat = d.dim == 2 ? 9 : 3;
    const int L = d.level_max - d.level_min + 1;
    ShiftedSystem sys;
    sys.base = d;
    sys.derived.reserve(static_cast<std::size_t>(nlat));
    sys.rho.assign(static_cast<std::size_t>(nlat), std::vector<std::array<int, 2>>(static_cast<std::size_t>(L), {0, 0}));
    for (int j = 0; j < nlat; ++j) {
        std::array<int, 2> top{j % 3, (j / 3) % 3};
        auto& levels = sys.rho[static_cast<std::size_t>(j)];
        levels[static_cast<std::size_t>(L - 1)] = top;
        for (int li = L - 2; li >= 0; --li) {
            const int level = d.level_min + li;
            for (int dd = 0; dd < d.dim; ++dd) {
                // offset coherence term between adjacent base-lattice levels
                const std::int64_t step = d.side_cells(level);
                const std::int64_t diff = d.offset(level + 1)[static_cast<std::size_t>(dd)] -
                                          d.offset(level)[static_cast<std::size_t>(dd)];
                if (diff % step != 0) throw invalid_input_error("three_lattice: base lattice offsets are incoherent");
                const std::int64_t delta = diff / step;
                const int up = levels[static_cast<std::size_t>(li + 1)][static_cast<std::size_t>(dd)];
                levels[static_cast<std::size_t>(li)][static_cast<std::size_t>(dd)] =
                    static_cast<int>((((2 * up - 1 + delta) % 3) + 3) % 3);
            }
        }
        DyadicLattice der;
        der.dim = d.dim;
        der.grid_k = d.grid_k;
        der.base_side = 3 * d.base_side;
        der.level_min = d.level_min;
        der.level_max = d.level_max;
        der.offsets.resize(static_cast<std::size_t>(L));
        for (int li = 0; li < L; ++li) {
            const int level = d.level_min + li;
            const std::int64_t s = d.side_cells(level);
            CellIdx off{0, 0};
            for (int dd = 0; dd < d.dim; ++dd)
                off[static_cast<std::size_t>(dd)] =
                    d.offset(level)[static_cast<std::size_t>(dd)] +
                    s * (levels[static_cast<std::size_t>(li)][static_cast<std::size_t>(dd)] - 1);
            der.offsets[static_cast<std::size_t>(li)] = off;
        }
        sys.derived.push_back(std::move(der));
    }
    return sys;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund decomposition at a height: maximal lattice cubes with
// <|f|>_P > height, bad atoms b_P = (f - avg_P f) chi_P, good part g = f - b.
// All identities are exact cell arithmetic.
// ---------------------------------------------------------------------------

struct CZAtom {
    Cube cube;
    double avg = 0.0;      // (1/|P|) int_P f, signed
    double abs_avg = 0.0;  // (1/|P|) int_P |f|
    int level = 0;         // lattice level
};

struct CZDecomposition {
    double height = 0.0;
    std::vector<CZAtom> atoms;
    GridFunction good;
    GridFunction source;  // the decomposed f, kept for atom reconstruction
    int grid_k = 0;

    /// b_P for one atom.
    GridFunction bad_atom(const CZAtom& a) const {
        GridFunction b(source.grid);
        for_each_cell_in_box(a.cube, source.grid, [&](std::int64_t cx, std::int64_t cy) {
            b.at(cx, cy) = source.at(cx, cy) - a.avg;
        });
        return b;
    }

    GridFunction bad_total() const {
        GridFunction b(source.grid);
        for (const auto& a : atoms)
            for_each_cell_in_box(a.cube, source.grid, [&](std::int64_t cx, std::int64_t cy) {
                b.at(cx, cy) = source.at(cx, cy) - a.avg;
            });
        return b;
    }

    /// B_l: sum of bad atoms over stopping cubes of real side 2^l.
    GridFunction level_sum(int l) const {
        GridFunction b(source.grid);
        const std::int64_t want = std::int64_t{1} << (l + grid_k);  // side in cells
        for (const auto& a : atoms) {
            if (a.cube.side != want) continue;
            for_each_cell_in_box(a.cube, source.grid, [&](std::int64_t cx, std::int64_t cy) {
                b.at(cx, cy) = source.at(cx, cy) - a.avg;
            });
        }
        return b;
    }

    /// Absolute dyadic scales l (side 2^l) present among the atoms.
    std::vector<int> levels_present() const {
        std::vector<int> ls;
        for (const auto& a : atoms) {
            int l = 0;
            std::int64_t s = a.cube.side;
            while (s > 1) {
                s >>= 1;
                ++l;
            }
            l -= grid_k;
            bool seen = false;
            for (int x : ls) seen |= (x == l);
            if (!seen) ls.push_back(l);
        }
        std::sort(ls.begin(), ls.end());
        return ls;
    }
};

namespace detail {

inline void cz_descend(const GridFunction& f, const DyadicLattice& lat, int level, const Cube& cube, double height,
                       std::vector<CZAtom>& out) {
    if (cells_inside_box(cube, f.grid) == 0) return;
    double sum_abs = 0.0, sum = 0.0;
    for_each_cell_in_box(cube, f.grid, [&](std::int64_t cx, std::int64_t cy) {
        const double v = f.at(cx, cy);
        sum += v;
        sum_abs += std::abs(v);
    });
    const double denom = static_cast<double>(cube.cell_count(f.grid.dim));
    const double avg_abs = sum_abs / denom;
    if (avg_abs > height) {
        out.push_back({cube, sum / denom, avg_abs, level});
        return;
    }
    if (level == lat.level_min) return;
    const std::int64_t half = cube.side / 2;
    const int kids = f.grid.dim == 2 ? 4 : 2;
    for (int c = 0; c < kids; ++c) {
        Cube child;
        child.side = half;
        child.lo[0] = cube.lo[0] + (c & 1 ? half : 0);
        child.lo[1] = f.grid.dim == 2 ? cube.lo[1] + (c & 2 ? half : 0) : 0;
        cz_descend(f, lat, level - 1, child, height, out);
    }
}

}  // namespace detail

/// Stopping rule is strict: <|f|>_P > height. Heights must be positive.
/// The descent starts from the maximal lattice cubes covering the grid box.
inline CZDecomposition cz_decompose(const GridFunction& f, const DyadicLattice& lat, double height) {
    if (!(height > 0.0)) throw parameter_error("cz_decompose: height must be positive");
    if (lat.dim != f.grid.dim) throw invalid_input_error("cz_decompose: lattice/grid dimension mismatch");
    CZDecomposition dec;
    dec.height = height;
    dec.grid_k = f.grid.k;
    dec.source = f;

    const int top = lat.level_max;
    const Cube first = lat.cube_containing_cell(top, f.grid.lo[0], f.grid.lo[1]);
    const std::int64_t s = first.side;
    for (std::int64_t my = first.lo[1]; my < f.grid.hi[1] || (f.grid.dim == 1 && my == first.lo[1]); my += s) {
        for (std::int64_t mx = first.lo[0]; mx < f.grid.hi[0]; mx += s) {
            Cube root{{mx, f.grid.dim == 2 ? my : 0}, s};
            detail::cz_descend(f, lat, top, root, height, dec.atoms);
        }
        if (f.grid.dim == 1) break;
    }

    dec.good = f;
    for (const auto& a : dec.atoms)
        for_each_cell_in_box(a.cube, f.grid, [&](std::int64_t cx, std::int64_t cy) { dec.good.at(cx, cy) = a.avg; });
    return dec;
}

/// Dyadic maximal function: cellwise sup of <|f|>_Q over lattice cubes
/// containing the cell (ancestors only).
inline GridFunction dyadic_maximal(const GridFunction& f, const DyadicLattice& lat) {
    if (lat.dim != f.grid.dim) throw invalid_input_error("dyadic_maximal: dimension mismatch");
    GridFunction out(f.grid);
    for (int level = lat.level_min; level <= lat.level_max; ++level) {
        const Cube first = lat.cube_containing_cell(level, f.grid.lo[0], f.grid.lo[1]);
        const std::int64_t s = first.side;
        for (std::int64_t my = first.lo[1]; my < f.grid.hi[1] || (f.grid.dim == 1 && my == first.lo[1]); my += s) {
            for (std::int64_t mx = first.lo[0]; mx < f.grid.hi[0]; mx += s) {
                Cube q{{mx, f.grid.dim == 2 ? my : 0}, s};
                const double avg = p_average(f, q, 1.0);
                for_each_cell_in_box(q, f.grid, [&](std::int64_t cx, std::int64_t cy) {
                    out.at(cx, cy) = std::max(out.at(cx, cy), avg);
                });
            }
            if (f.grid.dim == 1) break;
        }
    }
    return out;
}

}  // namespace rsi
