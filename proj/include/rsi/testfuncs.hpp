#pragma once

#include <string>
#include <vector>

#include "rsi/common.hpp"
#include "rsi/grid.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Seeded test-function families for the experiments. Three types:
//   spike - unit mass on a single cell (probes the kernel singularity),
//   atom  - mean-zero on a random dyadic cube (probes cancellation),
//   comb  - random +-1 masses on scattered cells.
// All values are dyadic rationals so downstream cell arithmetic stays exact.
// ---------------------------------------------------------------------------

struct TestFunction {
    std::string id;
    GridFunction f;
};

struct FamilySpec {
    int count = 6;
    std::uint64_t seed = 0;
    bool spikes = true;
    bool atoms = true;
    bool combs = true;
};

namespace detail {

inline CellIdx random_cell(const GridSpec& g, SplitMix64& rng) {
    const std::int64_t cx = g.lo[0] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.nx())));
    const std::int64_t cy =
        g.dim == 2 ? g.lo[1] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.ny()))) : 0;
    return {cx, cy};
}

}  // namespace detail

/// Unit-mass single cell.
inline GridFunction make_spike(const GridSpec& g, CellIdx cell) {
    GridFunction f(g);
    f.at(cell[0], cell[1]) = 1.0 / g.cell_measure();
    return f;
}

/// Mean-zero dyadic atom: +-1 pattern on a dyadic cube, normalized to unit
/// L1 mass. max_side caps the cube side in cells (0: up to the box).
inline GridFunction make_atom(const GridSpec& g, SplitMix64& rng, std::int64_t max_side = 0) {
    const std::int64_t cap = max_side > 1 ? max_side : std::min(g.nx(), g.dim == 2 ? g.ny() : g.nx());
    const std::int64_t max_log = [&] {
        std::int64_t m = 0;
        while ((std::int64_t{2} << m) <= cap) ++m;
        return m;
    }();
    const std::int64_t side = std::int64_t{1} << (1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_log))));
    const std::int64_t px = g.lo[0] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.nx() / side))) * side;
    const std::int64_t py =
        g.dim == 2 ? g.lo[1] + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.ny() / side))) * side : 0;
    GridFunction f(g);
    // balanced signs: exactly half the cells +1, half -1, shuffled
    const std::size_t cells = static_cast<std::size_t>(side) * static_cast<std::size_t>(g.dim == 2 ? side : 1);
    std::vector<double> signs(cells);
    for (std::size_t i = 0; i < cells; ++i) signs[i] = i < cells / 2 ? 1.0 : -1.0;
    for (std::size_t i = cells - 1; i > 0; --i) std::swap(signs[i], signs[rng.below(i + 1)]);
    std::size_t idx = 0;
    const double amp = 1.0 / (static_cast<double>(cells) * g.cell_measure());
    for (std::int64_t cy = py; cy < (g.dim == 2 ? py + side : py + 1); ++cy)
        for (std::int64_t cx = px; cx < px + side; ++cx) f.at(cx, cy) = amp * signs[idx++];
    return f;
}

/// Random-sign comb on scattered cells, unit L1 mass.
inline GridFunction make_comb(const GridSpec& g, SplitMix64& rng, int teeth = 32) {
    GridFunction f(g);
    const int m = std::max(2, teeth);
    const double amp = 1.0 / (static_cast<double>(m) * g.cell_measure());
    for (int i = 0; i < m; ++i) {
        const CellIdx c = detail::random_cell(g, rng);
        f.at(c[0], c[1]) += (rng.next() & 1 ? amp : -amp);
    }
    return f;
}

inline std::vector<TestFunction> make_family(const GridSpec& g, const FamilySpec& spec) {
    std::vector<TestFunction> fam;
    SplitMix64 rng(spec.seed ^ 0x5eedf00dULL);
    std::vector<std::string> kinds;
    if (spec.spikes) kinds.push_back("spike");
    if (spec.atoms) kinds.push_back("atom");
    if (spec.combs) kinds.push_back("comb");
    if (kinds.empty()) throw parameter_error("make_family: no function types enabled");
    for (int i = 0; i < spec.count; ++i) {
        const std::string kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
        TestFunction tf;
        tf.id = kind + "-" + std::to_string(i);
        if (kind == "spike")
            tf.f = make_spike(g, detail::random_cell(g, rng));
        else if (kind == "atom")
            tf.f = make_atom(g, rng);
        else
            tf.f = make_comb(g, rng);
        fam.push_back(std::move(tf));
    }
    return fam;
}

}  // namespace rsi
