#pragma once

#include <string>

#include "json.hpp"
#include "rsi/dyadic.hpp"
#include "rsi/kernel.hpp"
#include "rsi/sparse.hpp"

namespace rsi {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Kernel specs. Accepted forms:
//   {"dimension": 1|2, "samples": [...]}
//   {"dimension": 1|2, "preset": "hilbert"|"cos"|"sign-bands"|"random-rademacher",
//    "seed": <u64>, "n2_samples": <N>}
// ---------------------------------------------------------------------------

inline SphereKernel load_sphere_kernel(const ordered_json& j) {
    if (!j.contains("dimension")) throw invalid_input_error("kernel spec: missing dimension");
    const int dim = j.at("dimension").get<int>();
    if (j.contains("samples")) {
        std::vector<double> samples = j.at("samples").get<std::vector<double>>();
        return project_zero_mean(std::move(samples), dim);
    }
    if (j.contains("preset")) {
        const std::string preset = j.at("preset").get<std::string>();
        const std::uint64_t seed = j.value("seed", std::uint64_t{0});
        const std::size_t n2 = j.value("n2_samples", std::size_t{64});
        return make_preset(preset, dim, n2, seed);
    }
    throw invalid_input_error("kernel spec: need either samples or preset");
}

inline ordered_json sphere_kernel_to_json(const SphereKernel& k) {
    ordered_json j;
    j["dimension"] = k.dim;
    j["samples"] = k.samples;
    return j;
}

// ---------------------------------------------------------------------------
// Cube families in lattice coordinates (lattice_id, level, coords), for
// reproducible experiment records.
// ---------------------------------------------------------------------------

inline ordered_json dyadic_cubes_to_json(const DyadicLattice& lat, const std::vector<Cube>& cubes, int lattice_id = 0) {
    ordered_json arr = ordered_json::array();
    for (const Cube& q : cubes) {
        int level = 0;
        if (!lat.member(q, &level)) throw invalid_input_error("dyadic_cubes_to_json: cube not in lattice");
        const std::int64_t s = lat.side_cells(level);
        const CellIdx& o = lat.offset(level);
        ordered_json item;
        item["lattice_id"] = lattice_id;
        item["level"] = level;
        item["coords"] = {(q.lo[0] - o[0]) / s, lat.dim == 2 ? (q.lo[1] - o[1]) / s : 0};
        arr.push_back(item);
    }
    return arr;
}

inline ordered_json cube_to_json(const Cube& q) {
    ordered_json j;
    j["lo"] = {q.lo[0], q.lo[1]};
    j["side"] = q.side;
    return j;
}

inline Cube cube_from_json(const ordered_json& j) {
    Cube q;
    q.lo[0] = j.at("lo")[0].get<std::int64_t>();
    q.lo[1] = j.at("lo")[1].get<std::int64_t>();
    q.side = j.at("side").get<std::int64_t>();
    return q;
}

// ---------------------------------------------------------------------------
// Sparse families: each entry carries its cube and the witness cells as a
// run-length encoding of the cube's row-major scan.
// ---------------------------------------------------------------------------

inline ordered_json sparse_family_to_json(const SparseFamily& fam) {
    ordered_json j;
    j["dim"] = fam.dim;
    j["eta"] = fam.eta;
    ordered_json arr = ordered_json::array();
    for (const auto& e : fam.entries) {
        ordered_json item;
        item["cube"] = cube_to_json(e.cube);
        // mark witness cells on the cube scan, then RLE as [value, run, ...]
        const std::size_t n = e.cube.cell_count(fam.dim);
        std::vector<std::uint8_t> mask(n, 0);
        const std::int64_t w = e.cube.side;
        for (const auto& c : e.witness) {
            const std::int64_t dx = c[0] - e.cube.lo[0];
            const std::int64_t dy = fam.dim == 2 ? c[1] - e.cube.lo[1] : 0;
            mask[static_cast<std::size_t>(dy * w + dx)] = 1;
        }
        ordered_json rle = ordered_json::array();
        std::size_t i = 0;
        while (i < n) {
            std::size_t jdx = i;
            while (jdx < n && mask[jdx] == mask[i]) ++jdx;
            rle.push_back(static_cast<int>(mask[i]));
            rle.push_back(jdx - i);
            i = jdx;
        }
        item["witness_rle"] = rle;
        arr.push_back(item);
    }
    j["entries"] = arr;
    return j;
}

inline SparseFamily sparse_family_from_json(const ordered_json& j) {
    SparseFamily fam;
    fam.dim = j.at("dim").get<int>();
    fam.eta = j.at("eta").get<double>();
    for (const auto& item : j.at("entries")) {
        SparseFamily::Entry e;
        e.cube = cube_from_json(item.at("cube"));
        const auto& rle = item.at("witness_rle");
        std::size_t pos = 0;
        for (std::size_t i = 0; i + 1 < rle.size(); i += 2) {
            const int val = rle[i].get<int>();
            const std::size_t run = rle[i + 1].get<std::size_t>();
            if (val) {
                for (std::size_t r = 0; r < run; ++r) {
                    const std::size_t p = pos + r;
                    const std::int64_t dy = fam.dim == 2 ? static_cast<std::int64_t>(p) / e.cube.side : 0;
                    const std::int64_t dx = static_cast<std::int64_t>(p) - dy * e.cube.side;
                    e.witness.push_back({e.cube.lo[0] + dx, fam.dim == 2 ? e.cube.lo[1] + dy : 0});
                }
            }
            pos += run;
        }
        fam.entries.push_back(std::move(e));
    }
    return fam;
}

inline ordered_json sparseness_report_to_json(const SparsenessReport& rep, double eta) {
    ordered_json j;
    j["eta"] = eta;
    j["pass"] = rep.pass;
    j["worst_ratio"] = rep.worst_ratio;
    j["overlap_cells"] = rep.overlap_cells;
    j["containment_violations"] = rep.containment_violations;
    return j;
}

}  // namespace rsi
