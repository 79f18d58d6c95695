#pragma once

#include "rsi/common.hpp"
#include "rsi/grid.hpp"

namespace rsi {

// Axis-aligned cube in cell coordinates: [lo, lo+side) per axis. Cube
// arithmetic stays in integers; real center/side are derived views.

struct Cube {
    CellIdx lo{0, 0};
    std::int64_t side = 1;  // in cells, >= 1

    bool operator==(const Cube& o) const { return lo == o.lo && side == o.side; }

    bool contains_cell(std::int64_t cx, std::int64_t cy, int dim) const {
        if (cx < lo[0] || cx >= lo[0] + side) return false;
        if (dim == 2 && (cy < lo[1] || cy >= lo[1] + side)) return false;
        return true;
    }

    bool contains(const Cube& q, int dim) const {
        if (q.lo[0] < lo[0] || q.lo[0] + q.side > lo[0] + side) return false;
        if (dim == 2 && (q.lo[1] < lo[1] || q.lo[1] + q.side > lo[1] + side)) return false;
        return true;
    }

    double side_real(const GridSpec& g) const { return static_cast<double>(side) * g.h(); }
    Vec center(const GridSpec& g) const {
        const double hh = g.h();
        return {(static_cast<double>(lo[0]) + static_cast<double>(side) / 2.0) * hh,
                g.dim == 2 ? (static_cast<double>(lo[1]) + static_cast<double>(side) / 2.0) * hh : 0.0};
    }
    /// |Q| = (side*h)^dim, full measure irrespective of the grid box.
    double measure(const GridSpec& g) const {
        const double s = side_real(g);
        return g.dim == 2 ? s * s : s;
    }
    std::size_t cell_count(int dim) const {
        return dim == 2 ? static_cast<std::size_t>(side) * static_cast<std::size_t>(side)
                        : static_cast<std::size_t>(side);
    }
};

/// Concentric dilation; factor must be odd so the result stays cell-aligned.
inline Cube dilate(const Cube& q, int factor) {
    if (factor < 1 || factor % 2 == 0) throw parameter_error("dilate: factor must be odd and positive");
    const std::int64_t pad = q.side * (factor - 1) / 2;
    return Cube{{q.lo[0] - pad, q.lo[1] - pad}, q.side * factor};
}

/// Cube from real center/side; throws alignment_error unless both are exact
/// in grid cells.
inline Cube cube_from_real(const GridSpec& g, Vec center, double side) {
    const double scale = std::ldexp(1.0, g.k);
    const double sc = side * scale;
    const double sr = std::nearbyint(sc);
    if (std::abs(sc - sr) > 1e-9 || sr < 1.0) throw alignment_error("cube_from_real: side not a whole number of cells");
    const std::int64_t s = static_cast<std::int64_t>(sr);
    auto corner = [&](double c) {
        const double v = c * scale - static_cast<double>(s) / 2.0;
        const double r = std::nearbyint(v);
        if (std::abs(v - r) > 1e-9) throw alignment_error("cube_from_real: corner not cell-aligned");
        return static_cast<std::int64_t>(r);
    };
    Cube q;
    q.lo[0] = corner(center.x);
    q.lo[1] = g.dim == 2 ? corner(center.y) : 0;
    q.side = s;
    return q;
}

/// Iterate cells of Q that lie inside the grid box (row-major order).
template <class F>
inline void for_each_cell_in_box(const Cube& q, const GridSpec& g, F&& fn) {
    const std::int64_t x0 = std::max(q.lo[0], g.lo[0]);
    const std::int64_t x1 = std::min(q.lo[0] + q.side, g.hi[0]);
    if (g.dim == 1) {
        for (std::int64_t cx = x0; cx < x1; ++cx) fn(cx, std::int64_t{0});
        return;
    }
    const std::int64_t y0 = std::max(q.lo[1], g.lo[1]);
    const std::int64_t y1 = std::min(q.lo[1] + q.side, g.hi[1]);
    for (std::int64_t cy = y0; cy < y1; ++cy)
        for (std::int64_t cx = x0; cx < x1; ++cx) fn(cx, cy);
}

inline std::size_t cells_inside_box(const Cube& q, const GridSpec& g) {
    const std::int64_t x0 = std::max(q.lo[0], g.lo[0]);
    const std::int64_t x1 = std::min(q.lo[0] + q.side, g.hi[0]);
    const std::int64_t w = std::max<std::int64_t>(0, x1 - x0);
    if (g.dim == 1) return static_cast<std::size_t>(w);
    const std::int64_t y0 = std::max(q.lo[1], g.lo[1]);
    const std::int64_t y1 = std::min(q.lo[1] + q.side, g.hi[1]);
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(std::max<std::int64_t>(0, y1 - y0));
}

}  // namespace rsi
