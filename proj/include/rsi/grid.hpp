#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "rsi/common.hpp"

namespace rsi {

// ---------------------------------------------------------------------------
// Uniform dyadic grid over an axis-aligned box. Cells are indexed by
// integers; cell c occupies [c*h, (c+1)*h) per axis with h = 2^-k, and all
// geometry in the library is done on cell indices so set operations are
// exact. Functions are piecewise constant per cell, which turns every
// integral into a finite sum.
// ---------------------------------------------------------------------------

struct GridSpec {
    int dim = 1;      // 1 or 2
    int k = 0;        // h = 2^-k
    CellIdx lo{0, 0}; // inclusive cell bounds
    CellIdx hi{1, 1}; // exclusive

    double h() const { return std::ldexp(1.0, -k); }
    std::int64_t nx() const { return hi[0] - lo[0]; }
    std::int64_t ny() const { return dim == 2 ? hi[1] - lo[1] : 1; }
    std::size_t cell_count() const { return static_cast<std::size_t>(nx()) * static_cast<std::size_t>(ny()); }
    double cell_measure() const { return dim == 2 ? h() * h() : h(); }

    bool contains_cell(std::int64_t cx, std::int64_t cy) const {
        if (cx < lo[0] || cx >= hi[0]) return false;
        if (dim == 2 && (cy < lo[1] || cy >= hi[1])) return false;
        return true;
    }

    Vec cell_center(std::int64_t cx, std::int64_t cy) const {
        const double hh = h();
        return {(static_cast<double>(cx) + 0.5) * hh, dim == 2 ? (static_cast<double>(cy) + 0.5) * hh : 0.0};
    }

    bool operator==(const GridSpec& o) const { return dim == o.dim && k == o.k && lo == o.lo && hi == o.hi; }
};

/// Make a grid for the real box [a0,b0) x [a1,b1); bounds must be exact
/// multiples of h = 2^-k.
inline GridSpec make_grid(int dim, int k, double a0, double b0, double a1 = 0.0, double b1 = 0.0) {
    if (dim != 1 && dim != 2) throw parameter_error("make_grid: dim must be 1 or 2");
    GridSpec g;
    g.dim = dim;
    g.k = k;
    const double scale = std::ldexp(1.0, k);
    auto to_cell = [&](double v, const char* what) {
        const double c = v * scale;
        const double r = std::nearbyint(c);
        if (std::abs(c - r) > 1e-9) throw alignment_error(std::string("make_grid: ") + what + " not aligned to h");
        return static_cast<std::int64_t>(r);
    };
    g.lo[0] = to_cell(a0, "x lower bound");
    g.hi[0] = to_cell(b0, "x upper bound");
    if (dim == 2) {
        g.lo[1] = to_cell(a1, "y lower bound");
        g.hi[1] = to_cell(b1, "y upper bound");
    } else {
        g.lo[1] = 0;
        g.hi[1] = 1;
    }
    if (g.hi[0] <= g.lo[0] || (dim == 2 && g.hi[1] <= g.lo[1])) throw parameter_error("make_grid: empty box");
    return g;
}

struct GridFunction {
    GridSpec grid;
    std::vector<double> v;  // row-major: index = (cy - lo1)*nx + (cx - lo0)

    GridFunction() = default;
    explicit GridFunction(const GridSpec& g) : grid(g), v(g.cell_count(), 0.0) {}

    std::size_t index(std::int64_t cx, std::int64_t cy) const {
        return static_cast<std::size_t>(cy - grid.lo[1]) * static_cast<std::size_t>(grid.nx()) +
               static_cast<std::size_t>(cx - grid.lo[0]);
    }
    double at(std::int64_t cx, std::int64_t cy = 0) const { return v[index(cx, cy)]; }
    double& at(std::int64_t cx, std::int64_t cy = 0) { return v[index(cx, cy)]; }

    double sup_norm() const {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    }
    /// ||f||_p^p as the exact cell sum.
    double lp_norm_pow(double p) const {
        double s = 0.0;
        for (double a : v) s += std::pow(std::abs(a), p);
        return s * grid.cell_measure();
    }
    double l1_norm() const {
        double s = 0.0;
        for (double a : v) s += std::abs(a);
        return s * grid.cell_measure();
    }
    double l2_norm() const {
        double s = 0.0;
        for (double a : v) s += a * a;
        return std::sqrt(s * grid.cell_measure());
    }
    double integral() const {
        double s = 0.0;
        for (double a : v) s += a;
        return s * grid.cell_measure();
    }
    std::size_t support_size() const {
        std::size_t c = 0;
        for (double a : v) c += (a != 0.0);
        return c;
    }
};

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid == b.grid)) throw alignment_error("GridFunction +: grids differ");
    GridFunction r = a;
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += b.v[i];
    return r;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid == b.grid)) throw alignment_error("GridFunction -: grids differ");
    GridFunction r = a;
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] -= b.v[i];
    return r;
}

inline GridFunction operator*(double c, const GridFunction& a) {
    GridFunction r = a;
    for (auto& x : r.v) x *= c;
    return r;
}

// ------------------------------ file formats ------------------------------
//
// Flat binary: magic, dim, k, lo, hi, then the value array; a JSON sidecar
// with the same header fields is written next to it for tooling.

inline void save_gridfunction(const GridFunction& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw domain_error("save_gridfunction: cannot open " + path);
    const char magic[8] = {'R', 'S', 'I', 'G', 'F', '0', '1', '\0'};
    out.write(magic, 8);
    auto w64 = [&](std::int64_t x) { out.write(reinterpret_cast<const char*>(&x), 8); };
    w64(f.grid.dim);
    w64(f.grid.k);
    w64(f.grid.lo[0]);
    w64(f.grid.lo[1]);
    w64(f.grid.hi[0]);
    w64(f.grid.hi[1]);
    out.write(reinterpret_cast<const char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));

    std::ofstream side(path + ".json");
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "{\"format\":\"rsi-gridfunction-v1\",\"dim\":%d,\"k\":%d,\"lo\":[%lld,%lld],\"hi\":[%lld,%lld]}\n",
                  f.grid.dim, f.grid.k, static_cast<long long>(f.grid.lo[0]), static_cast<long long>(f.grid.lo[1]),
                  static_cast<long long>(f.grid.hi[0]), static_cast<long long>(f.grid.hi[1]));
    side << buf;
}

inline GridFunction load_gridfunction(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw domain_error("load_gridfunction: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "RSIGF01", 7) != 0) throw invalid_input_error("load_gridfunction: bad magic");
    auto r64 = [&]() {
        std::int64_t x = 0;
        in.read(reinterpret_cast<char*>(&x), 8);
        return x;
    };
    GridSpec g;
    g.dim = static_cast<int>(r64());
    g.k = static_cast<int>(r64());
    g.lo[0] = r64();
    g.lo[1] = r64();
    g.hi[0] = r64();
    g.hi[1] = r64();
    GridFunction f(g);
    in.read(reinterpret_cast<char*>(f.v.data()), static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!in) throw invalid_input_error("load_gridfunction: truncated file");
    return f;
}

inline void export_csv(const GridFunction& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw domain_error("export_csv: cannot open " + path);
    char buf[128];
    if (f.grid.dim == 1) {
        out << "x,value\n";
        for (std::int64_t cx = f.grid.lo[0]; cx < f.grid.hi[0]; ++cx) {
            const Vec c = f.grid.cell_center(cx, 0);
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", c.x, f.at(cx));
            out << buf;
        }
    } else {
        out << "x,y,value\n";
        for (std::int64_t cy = f.grid.lo[1]; cy < f.grid.hi[1]; ++cy)
            for (std::int64_t cx = f.grid.lo[0]; cx < f.grid.hi[0]; ++cx) {
                const Vec c = f.grid.cell_center(cx, cy);
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", c.x, c.y, f.at(cx, cy));
                out << buf;
            }
    }
}

}  // namespace rsi
