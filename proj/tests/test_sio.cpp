#include "doctest.h"

#include "rsi/sio.hpp"

using namespace rsi;

namespace {

GridFunction random_dyadic_function(const GridSpec& g, std::uint64_t seed) {
    GridFunction f(g);
    SplitMix64 rng(seed);
    for (auto& v : f.v) v = static_cast<double>(static_cast<std::int64_t>(rng.below(2049)) - 1024) * 0x1.0p-8;
    return f;
}

}  // namespace

TEST_CASE("apply_excluded: support inside 3Q gives zero") {
    const GridSpec g = make_grid(1, 6, -4.0, 4.0);
    const Cube q = cube_from_real(g, {0.5, 0.0}, 1.0);
    GridFunction f(g);
    for (std::int64_t cx = -32; cx < 64; ++cx) f.at(cx) = 1.0;  // inside 3Q = [-1,2)
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    CHECK(apply_excluded(h, f, q).sup_norm() == 0.0);
}

TEST_CASE("apply_excluded: hilbert closed form on a far indicator") {
    // T(chi_[8,9])(x) = log((8-x)/(9-x)) for x < 8
    const GridSpec g = make_grid(1, 10, 0.0, 16.0);
    const Cube q = cube_from_real(g, {0.5, 0.0}, 1.0);
    GridFunction f(g);
    for (std::int64_t cx = 8 << 10; cx < 9 << 10; ++cx) f.at(cx) = 1.0;
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction t = apply_excluded(h, f, q);
    double worst = 0.0;
    for (std::int64_t cx = t.grid.lo[0]; cx < t.grid.hi[0]; ++cx) {
        const double x = t.grid.cell_center(cx, 0).x;
        const double closed = std::log((8.0 - x) / (9.0 - x));
        worst = std::max(worst, std::abs(t.at(cx) - closed));
    }
    CHECK(worst <= 1e-3);
    const double x0 = t.grid.cell_center(0, 0).x;
    CHECK(t.at(0) == doctest::Approx(std::log((8.0 - x0) / (9.0 - x0))).epsilon(1e-4));
    CHECK(std::log(8.0 / 9.0) == doctest::Approx(-0.11778).epsilon(1e-4));
}

TEST_CASE("apply_excluded is linear") {
    const GridSpec g = make_grid(1, 6, -2.0, 2.0);
    const Cube q = cube_from_real(g, {0.0, 0.0}, 0.5);
    const GridFunction f = random_dyadic_function(g, 21), f2 = random_dyadic_function(g, 22);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction a = apply_excluded(h, f + f2, q);
    const GridFunction b = apply_excluded(h, f, q) + apply_excluded(h, f2, q);
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-12));
}

TEST_CASE("apply_truncated: odd-kernel cancellation at a symmetry center") {
    const GridSpec g = make_grid(1, 8, 0.0, 4.0);
    GridFunction f(g);
    const std::int64_t c0 = 300;
    for (std::int64_t j = -100; j <= 100; ++j) f.at(c0 + j) = 1.0;
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction t = apply_truncated(h, f, g.h());
    CHECK(std::abs(t.at(c0)) <= 1e-12);
}

TEST_CASE("apply_truncated: hilbert closed form log|x+1| - log|x-1|") {
    const GridSpec g = make_grid(1, 10, -8.0, 8.0);
    GridFunction f(g);
    for (std::int64_t cx = -1024; cx < 1024; ++cx) f.at(cx) = 1.0;  // chi_[-1,1]
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction t = apply_truncated(h, f, 0.5);
    double worst = 0.0;
    for (std::int64_t cx = g.lo[0]; cx < g.hi[0]; ++cx) {
        const double x = g.cell_center(cx, 0).x;
        if (std::abs(x) < 1.5 || std::abs(x) > 4.0) continue;
        const double closed = std::log(std::abs(x + 1.0)) - std::log(std::abs(x - 1.0));
        worst = std::max(worst, std::abs(t.at(cx) - closed));
    }
    CHECK(worst <= 1e-3);
    // spot value at x = 2
    const std::int64_t c2 = 2048;
    const double x2 = g.cell_center(c2, 0).x;
    CHECK(t.at(c2) == doctest::Approx(std::log((x2 + 1.0) / (x2 - 1.0))).epsilon(1e-3));
    CHECK(std::log(3.0) == doctest::Approx(1.09861).epsilon(1e-4));

    // far truncation: delta beyond every pairwise distance kills the sum
    const GridFunction dead = apply_truncated(h, f, 17.0);
    CHECK(dead.sup_norm() == 0.0);

    CHECK_THROWS_AS(apply_truncated(h, f, 0.5 * g.h()), resolution_error);
}

TEST_CASE("apply_truncated: translation equivariance is exact") {
    const GridSpec g = make_grid(1, 7, 0.0, 4.0);
    GridFunction f(g);
    for (std::int64_t cx = 64; cx < 96; ++cx) f.at(cx) = 1.0 + 0.25 * static_cast<double>(cx % 5);
    GridFunction fs(g);
    const std::int64_t shift = 37;
    for (std::int64_t cx = 64; cx < 96; ++cx) fs.at(cx + shift) = f.at(cx);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    const GridFunction t = apply_truncated(h, f, g.h());
    const GridFunction ts = apply_truncated(h, fs, g.h());
    for (std::int64_t cx = 128; cx < 256; ++cx) CHECK(ts.at(cx + shift) == t.at(cx));
}

TEST_CASE("splitting consistency: rough = mollified + difference, cellwise") {
    const SphereKernel om = make_preset("sign-bands", 2, 64);
    const MollifierSpec m(0.25);
    const MollifiedOmega tab = build_mollified_omega(om, m, MollifierQuadrature{}, 128);
    const OperatorHandle rough = OperatorHandle::rough(om);
    const OperatorHandle diff = OperatorHandle::rough_difference(om, tab);
    const OperatorHandle smooth = diff.smooth_part();

    const GridSpec g = make_grid(2, 4, 0.0, 1.0, 0.0, 1.0);
    const GridFunction f = random_dyadic_function(g, 55);
    const GridFunction a = apply_truncated(rough, f, g.h());
    const GridFunction b = apply_truncated(smooth, f, g.h()) + apply_truncated(diff, f, g.h());
    const double scale = a.sup_norm();
    for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(std::abs(a.v[i] - b.v[i]) <= 1e-10 * std::max(scale, 1.0));
}

TEST_CASE("fft convolution path agrees with direct summation to 1e-8") {
    SUBCASE("1d") {
        const GridSpec g = make_grid(1, 8, 0.0, 1.0);
        const GridFunction f = random_dyadic_function(g, 99);
        const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
        const GridFunction a = apply_truncated(h, f, 4.0 * g.h());
        const GridFunction b = apply_truncated_fft(h, f, 4.0 * g.h());
        for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(std::abs(a.v[i] - b.v[i]) <= 1e-8);
    }
    SUBCASE("2d") {
        const GridSpec g = make_grid(2, 5, 0.0, 1.0, 0.0, 1.0);
        const GridFunction f = random_dyadic_function(g, 98);
        const OperatorHandle h = OperatorHandle::rough(make_preset("sign-bands", 2, 64));
        const GridFunction a = apply_truncated(h, f, 2.0 * g.h());
        const GridFunction b = apply_truncated_fft(h, f, 2.0 * g.h());
        for (std::size_t i = 0; i < a.v.size(); ++i) CHECK(std::abs(a.v[i] - b.v[i]) <= 1e-8);
    }
}

TEST_CASE("maximal truncation dominates and reduces to a single truncation") {
    const GridSpec g = make_grid(1, 8, -8.0, 8.0);
    GridFunction f(g);
    for (std::int64_t cx = -256; cx < 256; ++cx) f.at(cx) = 1.0;  // chi_[-1,1]
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));

    const GridFunction single = maximal_truncation(h, f, {0.5});
    const GridFunction direct = apply_truncated(h, f, 0.5);
    for (std::size_t i = 0; i < single.v.size(); ++i) CHECK(single.v[i] == std::abs(direct.v[i]));

    GridFunction zero(g);
    CHECK(maximal_truncation(h, zero, {0.5, 1.0}).sup_norm() == 0.0);

    const std::vector<double> grid_deltas{0.125, 0.25, 0.5, 1.0, 2.0};
    const GridFunction star = maximal_truncation(h, f, grid_deltas);
    for (double d : grid_deltas) {
        const GridFunction td = apply_truncated(h, f, d);
        for (std::size_t i = 0; i < star.v.size(); ++i) CHECK(star.v[i] >= std::abs(td.v[i]) - 1e-15);
    }
    // at the cell center nearest x = 2 the grid contains delta = 0.5, so
    // T* is at least that truncation's closed-form value
    const std::int64_t c2 = 512;
    const double xc = g.cell_center(c2, 0).x;
    CHECK(star.at(c2) >= std::log((xc + 1.0) / (xc - 1.0)) - 1e-3);

    CHECK_THROWS_AS(maximal_truncation(h, f, {}), parameter_error);
}

TEST_CASE("opnorm: zero kernel, identity estimator") {
    const GridSpec g = make_grid(1, 6, 0.0, 1.0);
    const SphereKernel zero = make_sphere_kernel(1, {0.0, 0.0});
    CHECK(opnorm_l2(OperatorHandle::rough(zero), g) == 0.0);
    CHECK(opnorm_l2(OperatorHandle::identity_test(), g) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("opnorm of the discrete hilbert transform is pi within 2%") {
    const GridSpec g = make_grid(1, 12, 0.0, 1.0);
    const OperatorHandle h = OperatorHandle::rough(make_preset("hilbert", 1));
    OpNormOptions opts;
    opts.delta = g.h();
    const double s = opnorm_l2(h, g, opts);
    CHECK(s == doctest::Approx(kPi).epsilon(0.02));

    // symbol oracle: the zero-padded section norm is at most the sup of the
    // padded circulant multiplier
    const DiscreteKernel dk = build_discrete_kernel(h, g, opts.delta);
    const std::size_t p = next_pow2(2 * static_cast<std::size_t>(g.nx()));
    std::vector<std::complex<double>> row(p, 0.0);
    for (std::int64_t dx = -dk.rx; dx <= dk.rx; ++dx)
        row[static_cast<std::size_t>((dx + static_cast<std::int64_t>(p)) % static_cast<std::int64_t>(p))] =
            dk.at(dx, 0);
    fft_inplace(row, false);
    double symbol_max = 0.0;
    for (const auto& z : row) symbol_max = std::max(symbol_max, std::abs(z));
    CHECK(s <= symbol_max * (1.0 + 1e-6));
    // the circulant sup carries the Gibbs overshoot of the truncated sign
    // series: max_w sum 2 sin(kw)/k -> 2 Si(pi)
    double si_pi = 0.0;
    const int nsi = 20000;
    for (int i = 0; i < nsi; ++i) {
        const double t = (i + 0.5) * kPi / nsi;
        si_pi += std::sin(t) / t * (kPi / nsi);
    }
    CHECK(symbol_max == doctest::Approx(2.0 * si_pi).epsilon(0.01));
}

TEST_CASE("opnorm decay of the rough-difference operator (smoke)") {
    // three epsilons only; the full sweep runs in the acceptance suite
    const GridSpec g = make_grid(2, 5, 0.0, 1.0, 0.0, 1.0);
    const SphereKernel om = make_preset("hilbert", 2, 64);
    std::vector<double> lx, ly;
    for (int e : {2, 4, 6}) {
        const double eps = std::ldexp(1.0, -e);
        const MollifiedOmega tab = build_mollified_omega(om, MollifierSpec(eps), MollifierQuadrature{}, 512);
        OpNormOptions opts;
        opts.seed = 3;
        const double s = opnorm_l2(OperatorHandle::rough_difference(om, tab), g, opts);
        lx.push_back(std::log(eps));
        ly.push_back(std::log(s));
    }
    const double slope = fit_slope(lx, ly);
    CHECK(slope >= 0.3);
    CHECK(slope <= 1.6);
}
