#include "doctest.h"

#include "rsi/maximal.hpp"

using namespace rsi;

namespace {

GridFunction random_dyadic_function(const GridSpec& g, std::uint64_t seed) {
    GridFunction f(g);
    SplitMix64 rng(seed);
    for (auto& v : f.v) v = static_cast<double>(static_cast<std::int64_t>(rng.below(2049)) - 1024) * 0x1.0p-8;
    return f;
}

}  // namespace

TEST_CASE("hl maximal: constants, pointwise lower bound, Holder in s") {
    const GridSpec g = make_grid(1, 4, 0.0, 2.0);
    const CubeFamily fam = all_intervals_family(g);

    GridFunction c(g);
    for (auto& v : c.v) v = -1.5;
    const GridFunction mc = hl_maximal(c, 1.0, fam);
    for (double v : mc.v) CHECK(v == doctest::Approx(1.5).epsilon(1e-14));

    const GridFunction f = random_dyadic_function(g, 3);
    const GridFunction m1 = hl_maximal(f, 1.0, fam);
    const GridFunction m2 = hl_maximal(f, 2.0, fam);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        CHECK(m1.v[i] >= std::abs(f.v[i]) - 1e-14);  // side-1 cubes are in the family
        CHECK(m1.v[i] <= m2.v[i] * (1.0 + 1e-13));
    }
}

TEST_CASE("hl maximal approximates the continuum supremum 1/x") {
    // f = chi_[0,1), M f(x) = 1/x for x > 1; best cube is [0, x+]
    const GridSpec g = make_grid(1, 6, 0.0, 4.0);
    GridFunction f(g);
    for (std::int64_t cx = 0; cx < 64; ++cx) f.at(cx) = 1.0;
    const CubeFamily fam = all_intervals_family(g);
    const GridFunction m = hl_maximal(f, 1.0, fam);
    const std::int64_t cell = 160;  // x = 2.5 + h/2
    const double x = g.cell_center(cell, 0).x;
    CHECK(m.at(cell) == doctest::Approx(1.0 / x).epsilon(0.05));
}

TEST_CASE("dyadic maximal never exceeds hl maximal over all intervals") {
    const GridSpec g = make_grid(1, 5, 0.0, 2.0);
    const GridFunction f = random_dyadic_function(g, 17);
    const DyadicLattice lat = standard_lattice(1, 5, 0, 6);
    const GridFunction md = dyadic_maximal(f, lat);
    const GridFunction mh = hl_maximal(f, 1.0, all_intervals_family(g));
    for (std::size_t i = 0; i < f.v.size(); ++i) CHECK(md.v[i] <= mh.v[i] * (1.0 + 1e-13));
}

TEST_CASE("m_lambda: exclusion empties the only cube") {
    const GridSpec g = make_grid(1, 5, -2.0, 2.0);
    const Cube q = cube_from_real(g, {0.0, 0.0}, 1.0);
    CubeFamily fam;
    fam.dim = 1;
    fam.cubes = {q};
    GridFunction f(g);
    for (std::int64_t cx = -40; cx < 40; ++cx) f.at(cx) = 2.0;  // inside 3Q = [-1.5,1.5)
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    CHECK(m_lambda(h, f, 0.5, fam).sup_norm() == 0.0);
}

TEST_CASE("m_p vanishes when every containing cube excludes the support") {
    const GridSpec g = make_grid(1, 5, -2.0, 2.0);
    const Cube q = cube_from_real(g, {0.0, 0.0}, 1.0);
    CubeFamily fam;
    fam.dim = 1;
    fam.cubes = {q};
    GridFunction f(g);
    for (std::int64_t cx = -40; cx < 40; ++cx) f.at(cx) = 2.0;  // inside 3Q
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()})
        CHECK(m_p(h, f, p, fam).sup_norm() == 0.0);
}

TEST_CASE("m_lambda: hilbert spike median example") {
    // f = chi_[8,9), Q = [0,1): the lambda=1/2 quantile of log((9-x)/(8-x))
    // over Q is its value at the midpoint
    const GridSpec g = make_grid(1, 8, 0.0, 16.0);
    const Cube q = cube_from_real(g, {0.5, 0.0}, 1.0);
    CubeFamily fam;
    fam.dim = 1;
    fam.cubes = {q};
    GridFunction f(g);
    for (std::int64_t cx = 8 << 8; cx < 9 << 8; ++cx) f.at(cx) = 1.0;
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction m = m_lambda(h, f, 0.5, fam);
    CHECK(std::log(8.5 / 7.5) == doctest::Approx(0.1252).epsilon(1e-3));
    for (std::int64_t cx = 0; cx < 256; ++cx) CHECK(m.at(cx) == doctest::Approx(std::log(8.5 / 7.5)).epsilon(1e-2));
}

TEST_CASE("m_lambda is non-increasing in lambda, cellwise") {
    const GridSpec g = make_grid(1, 6, 0.0, 2.0);
    const GridFunction f = random_dyadic_function(g, 91);
    const DyadicLattice lat = standard_lattice(1, 6, 0, 7);
    const CubeFamily fam = family_from_lattice(lat, g, 4, 64);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    ExcludedEvaluator ev(h, f);
    const std::vector<double> lambdas{0.5, 0.25, 0.125, 0.0625};
    const auto ms = m_lambda_multi(ev, lambdas, fam);
    for (std::size_t k = 1; k < ms.size(); ++k)
        for (std::size_t i = 0; i < ms[k].v.size(); ++i) CHECK(ms[k].v[i] >= ms[k - 1].v[i] - 1e-15);
    // shared-cache sweep agrees with the one-shot evaluation
    const GridFunction direct = m_lambda(h, f, 0.25, fam);
    for (std::size_t i = 0; i < direct.v.size(); ++i) CHECK(direct.v[i] == ms[1].v[i]);
}

TEST_CASE("chebyshev bridge and the p = infinity end") {
    const GridSpec g = make_grid(1, 6, 0.0, 2.0);
    const DyadicLattice lat = standard_lattice(1, 6, 0, 7);
    const CubeFamily fam = family_from_lattice(lat, g, 4, 32);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    for (int rep = 0; rep < 5; ++rep) {
        const GridFunction f = random_dyadic_function(g, 200 + static_cast<std::uint64_t>(rep));
        ExcludedEvaluator ev(h, f);
        for (double p : {1.0, 2.0, 4.0}) {
            const GridFunction mp = m_p_cached(ev, p, fam);
            for (double lam : {0.5, 0.25, 0.125, 0.015625}) {
                const auto ml = m_lambda_multi(ev, {lam}, fam)[0];
                const double factor = std::pow(lam, -1.0 / p);
                for (std::size_t i = 0; i < ml.v.size(); ++i)
                    CHECK(ml.v[i] <= factor * mp.v[i] * (1.0 + 1e-12));
            }
        }
        // lambda small enough that lambda |Q| is below one cell: the
        // quantile saturates to the local sup, i.e. M_T
        const GridFunction minf = m_p_cached(ev, std::numeric_limits<double>::infinity(), fam);
        const auto msat = m_lambda_multi(ev, {1.0 / 64.0}, fam)[0];
        for (std::size_t i = 0; i < minf.v.size(); ++i) CHECK(msat.v[i] == minf.v[i]);
    }
}

TEST_CASE("layer-cake identity per cube before the supremum") {
    const GridSpec g = make_grid(1, 5, 0.0, 2.0);
    const GridFunction f = random_dyadic_function(g, 303);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    ExcludedEvaluator ev(h, f);
    const DyadicLattice lat = standard_lattice(1, 5, 0, 6);
    const CubeFamily fam = family_from_lattice(lat, g, 4, 16);
    const double cm = g.cell_measure();
    for (const Cube& q : fam.cubes) {
        const auto& sorted = ev.data(q).sorted_abs;
        for (double p : {1.0, 2.0}) {
            double integral = 0.0;  // int_0^1 quantile(lambda)^p dlambda, exact step sum
            for (double v : sorted) integral += std::pow(v, p);
            integral /= static_cast<double>(sorted.size());
            const double avg = detail::p_average_from_sorted(sorted, cm, q.measure(g), p);
            CHECK(integral == doctest::Approx(std::pow(avg, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("m_orlicz: exclusion zero and the exp gauge dominates p=2") {
    const GridSpec g = make_grid(1, 6, 0.0, 2.0);
    const DyadicLattice lat = standard_lattice(1, 6, 0, 7);
    const CubeFamily fam = family_from_lattice(lat, g, 4, 32);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));

    CubeFamily one;
    one.dim = 1;
    one.cubes = {Cube{{64, 0}, 16}};
    GridFunction local(g);
    for (std::int64_t cx = 48; cx < 96; ++cx) local.at(cx) = 1.0;  // exactly 3Q
    CHECK(m_orlicz(h, local, OrliczGauge::expl(), one).sup_norm() == 0.0);

    // scalar gauge comparison t^2 <= e^{sqrt2 t} - 1 and the cellwise bound
    for (double t = 0.0; t <= 60.0; t += 0.01) CHECK(t * t <= std::expm1(std::sqrt(2.0) * t) + 1e-12);
    const GridFunction f = random_dyadic_function(g, 404);
    const GridFunction mexp = m_orlicz(h, f, OrliczGauge::expl(), fam);
    const GridFunction m2 = m_p(h, f, 2.0, fam);
    for (std::size_t i = 0; i < f.v.size(); ++i) CHECK(m2.v[i] <= std::sqrt(2.0) * mexp.v[i] * (1.0 + 1e-9));
}

TEST_CASE("bilinear maximal: degenerate g and the Holder domination") {
    const GridSpec g = make_grid(1, 6, 0.0, 2.0);
    const DyadicLattice lat = standard_lattice(1, 6, 0, 7);
    const CubeFamily fam = family_from_lattice(lat, g, 4, 32);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction f = random_dyadic_function(g, 505);

    GridFunction zero(g);
    CHECK(bilinear_m(h, f, zero, fam).sup_norm() == 0.0);

    GridFunction one(g);
    for (auto& v : one.v) v = 1.0;
    const GridFunction bi = bilinear_m(h, f, one, fam);
    const GridFunction m1 = m_p(h, f, 1.0, fam);
    for (std::size_t i = 0; i < bi.v.size(); ++i) CHECK(bi.v[i] == doctest::Approx(m1.v[i]).epsilon(1e-13));

    const GridFunction gg = random_dyadic_function(g, 506);
    const GridFunction big = bilinear_m(h, f, gg, fam);
    const GridFunction mf2 = m_p(h, f, 2.0, fam);
    const GridFunction mg2 = hl_maximal(gg, 2.0, fam);
    for (std::size_t i = 0; i < big.v.size(); ++i)
        CHECK(big.v[i] <= mf2.v[i] * mg2.v[i] * (1.0 + 1e-12));
}

TEST_CASE("annular maximal: vanishing thresholds and the amplitude bound") {
    const GridSpec g = make_grid(1, 6, -8.0, 8.0);
    const SphereKernel om = make_preset("hilbert", 1);
    GridFunction spike(g);
    spike.at(0) = 1.0 / g.h();  // unit mass at x ~ 0

    // cubes with side > 2^{j+1} contribute nothing: every source point is
    // farther than the support of K_j
    const int j = 0;
    CubeFamily big;
    big.dim = 1;
    for (std::int64_t lo = -512; lo < 512; lo += 64) big.cubes.push_back(Cube{{lo, 0}, 192});  // side 3 > 2^{j+1}
    CHECK(annular_maximal(om, j, spike, big).sup_norm() == 0.0);

    GridFunction zero(g);
    const DyadicLattice lat = standard_lattice(1, 6, 0, 9);
    const CubeFamily fam = family_from_lattice(lat, g, 1, 512);
    CHECK(annular_maximal(om, j, zero, fam).sup_norm() == 0.0);

    const GridFunction m = annular_maximal(om, j, spike, fam);
    const double radius = std::ldexp(1.0, j + 1) * 2.0;  // 2^{j+1} (1 + sqrt n), n = 1
    for (std::int64_t cx = g.lo[0]; cx < g.hi[0]; ++cx) {
        CHECK(m.at(cx) <= 2.0 * om.sup_norm + 1e-12);  // |K_j| <= sup|Omega| 2^{-(j-1)n}
        if (std::abs(g.cell_center(cx, 0).x) > radius + 0.1) CHECK(m.at(cx) == 0.0);
    }

    // restricted to cubes with side <= 2^{j-1}, the classical bound with
    // radius 2^j (2 + sqrt n / 2) holds
    const CubeFamily small_fam = family_from_lattice(lat, g, 1, 32);  // sides <= 0.5 = 2^{j-1}
    const GridFunction ms = annular_maximal(om, j, spike, small_fam);
    const double paper_radius = std::ldexp(1.0, j) * 2.5;
    for (std::int64_t cx = g.lo[0]; cx < g.hi[0]; ++cx)
        if (std::abs(g.cell_center(cx, 0).x) > paper_radius + 0.1) CHECK(ms.at(cx) == 0.0);
}

TEST_CASE("annular maximal is L1 bounded with a modest constant") {
    // ||M_{T_j} f||_1 <= C ||Omega||_inf ||f||_1, checked across scales j
    const GridSpec g = make_grid(1, 6, -8.0, 8.0);
    const SphereKernel om = make_preset("hilbert", 1);
    const DyadicLattice lat = standard_lattice(1, 6, 0, 9);
    const CubeFamily fam = family_from_lattice(lat, g, 1, 512);
    for (int j : {-1, 0, 1}) {
        for (int rep = 0; rep < 3; ++rep) {
            const GridFunction f = random_dyadic_function(g, 700 + static_cast<std::uint64_t>(rep));
            const GridFunction m = annular_maximal(om, j, f, fam);
            // radius 2^{j+1}(1+sqrt n) ball around each unit mass: C = 2 * 2 * radius
            const double c_bound = 2.0 * om.sup_norm * 2.0 * std::ldexp(1.0, j + 1) * 2.0;
            CHECK(m.l1_norm() <= c_bound * f.l1_norm() * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("weak-L2 scaling of m_lambda for L2-bounded operators, frozen constant") {
    const GridSpec g = make_grid(1, 7, 0.0, 2.0);
    const DyadicLattice lat = standard_lattice(1, 7, 0, 8);
    const CubeFamily fam = family_from_lattice(lat, g, 4, 128);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const double opn = kPi;  // proxy for ||T||_{L2->L2}
    const double frozen_c = 3.0;
    for (int rep = 0; rep < 4; ++rep) {
        GridFunction f = random_dyadic_function(g, 800 + static_cast<std::uint64_t>(rep));
        const double n2 = f.l2_norm();
        for (auto& v : f.v) v /= n2;
        ExcludedEvaluator ev(h, f);
        for (int e = 1; e <= 8; ++e) {
            const double lam = std::ldexp(1.0, -e);
            const auto m = m_lambda_multi(ev, {lam}, fam)[0];
            const double w2 = weak_quasinorm(m, 2.0);
            CHECK(w2 * std::sqrt(lam) <= frozen_c * opn);
        }
    }
}
