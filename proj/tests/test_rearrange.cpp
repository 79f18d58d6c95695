#include "doctest.h"

#include "rsi/field.hpp"
#include "rsi/rearrange.hpp"

using namespace rsi;

namespace {

GridFunction random_dyadic_function(const GridSpec& g, std::uint64_t seed) {
    GridFunction f(g);
    SplitMix64 rng(seed);
    for (auto& v : f.v) v = static_cast<double>(static_cast<std::int64_t>(rng.below(2049)) - 1024) * 0x1.0p-8;
    return f;
}

}  // namespace

TEST_CASE("rearrangement of an indicator is a single step") {
    const GridSpec g = make_grid(1, 4, 0.0, 2.0);
    GridFunction f(g);
    for (std::int64_t cx = 4; cx < 12; ++cx) f.at(cx) = 1.0;  // |B| = 0.5
    const Rearrangement r = rearrange(f);
    CHECK(r.value_at(0.0) == 1.0);
    CHECK(r.value_at(0.49) == 1.0);
    CHECK(r.value_at(0.5) == 0.0);
    CHECK(r.value_at(5.0) == 0.0);
}

TEST_CASE("rearrangement of {1,2,3,4} steps down by quarters") {
    const GridSpec g = make_grid(1, 2, 0.0, 1.0);
    GridFunction f(g);
    f.at(0) = 1;
    f.at(1) = 2;
    f.at(2) = 3;
    f.at(3) = 4;
    const Rearrangement r = rearrange(f);
    CHECK(r.value_at(0.0) == 4.0);
    CHECK(r.value_at(0.25) == 3.0);
    CHECK(r.value_at(0.5) == 2.0);
    CHECK(r.value_at(0.75) == 1.0);
    CHECK(r.value_at(0.999) == 1.0);
    CHECK(r.value_at(1.0) == 0.0);
}

TEST_CASE("quantile follows the inf convention with ties by measure") {
    const GridSpec g = make_grid(1, 0, 0.0, 4.0);
    GridFunction f(g);
    f.at(0) = 1;
    f.at(1) = 2;
    f.at(2) = 3;
    f.at(3) = 4;
    const Cube q{{0, 0}, 4};
    CHECK(quantile(f, q, 0.5) == 2.0);    // |{f>2}| = 2 cells = 0.5|Q|
    CHECK(quantile(f, q, 0.25) == 3.0);
    CHECK(quantile(f, q, 1.0) == 1.0);  // full-measure quantile = min
    CHECK_THROWS_AS(quantile(f, q, 0.0), parameter_error);
    CHECK_THROWS_AS(quantile(f, q, 1.5), parameter_error);
}

TEST_CASE("quantile of a constant and lambda monotonicity") {
    const GridSpec g = make_grid(1, 3, 0.0, 1.0);
    GridFunction f(g);
    for (auto& v : f.v) v = -2.5;
    const Cube q{{0, 0}, 8};
    for (double lam : {0.1, 0.5, 1.0}) CHECK(quantile(f, q, lam) == 2.5);

    const GridFunction r = random_dyadic_function(g, 11);
    double prev = quantile(r, q, 0.05);
    for (double lam : {0.1, 0.2, 0.4, 0.8, 1.0}) {
        const double cur = quantile(r, q, lam);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("equimeasurability, exact for every p") {
    for (int rep = 0; rep < 100; ++rep) {
        const GridSpec g = make_grid(1, 5, 0.0, 1.0);
        const GridFunction f = random_dyadic_function(g, 500 + static_cast<std::uint64_t>(rep));
        const Rearrangement r = rearrange(f);
        for (double p : {1.0, 2.0}) {
            double s = 0.0;
            for (double v : r.sorted) s += std::pow(v, p);
            CHECK(s * r.cell_measure == doctest::Approx(f.lp_norm_pow(p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("subadditivity at halved argument over all breakpoints") {
    for (int rep = 0; rep < 100; ++rep) {
        const GridSpec g = make_grid(1, 4, 0.0, 1.0);
        const GridFunction f = random_dyadic_function(g, 1500 + static_cast<std::uint64_t>(rep));
        const GridFunction h = random_dyadic_function(g, 2500 + static_cast<std::uint64_t>(rep));
        const Rearrangement rf = rearrange(f), rh = rearrange(h), rs = rearrange(f + h);
        for (std::size_t k = 0; k < rs.sorted.size(); ++k) {
            const double t = static_cast<double>(k) * rs.cell_measure;
            CHECK(rs.value_at(t) <= rf.value_at(t / 2.0) + rh.value_at(t / 2.0) + 1e-15);
        }
    }
}

TEST_CASE("layer-cake identity per cube is exact") {
    for (int rep = 0; rep < 100; ++rep) {
        const GridSpec g = rep % 2 == 0 ? make_grid(1, 4, 0.0, 1.0) : make_grid(2, 2, 0.0, 1.0, 0.0, 1.0);
        const GridFunction f = random_dyadic_function(g, 3500 + static_cast<std::uint64_t>(rep));
        const Cube q{{0, 0}, g.nx()};
        const auto sorted = sorted_abs_on_cube(f, q);
        for (double p : {1.0, 2.0, 4.0}) {
            // int_0^1 quantile(lambda)^p dlambda, exact as the step sum
            double lhs = 0.0;
            for (double v : sorted) lhs += std::pow(v, p);
            lhs /= static_cast<double>(sorted.size());
            const double rhs = std::pow(p_average(f, q, p), p);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("chebyshev: quantile <= (1/lambda) <f>_1") {
    for (int rep = 0; rep < 50; ++rep) {
        const GridSpec g = make_grid(1, 4, 0.0, 1.0);
        const GridFunction f = random_dyadic_function(g, 4500 + static_cast<std::uint64_t>(rep));
        const Cube q{{0, 0}, 16};
        for (double lam : {0.125, 0.25, 0.5, 1.0})
            CHECK(quantile(f, q, lam) <= p_average(f, q, 1.0) / lam * (1.0 + 1e-13));
    }
}

TEST_CASE("weak quasinorm attains the level just below each jump") {
    const GridSpec g = make_grid(1, 4, 0.0, 2.0);

    GridFunction ind(g);
    for (std::int64_t cx = 0; cx < 12; ++cx) ind.at(cx) = 1.0;
    CHECK(weak_quasinorm(ind, 1.0) == doctest::Approx(12.0 * g.h()).epsilon(1e-14));

    GridFunction zero(g);
    CHECK(weak_quasinorm(zero, 1.0) == 0.0);

    // {3 on one cell, 1 on measure 1}: sup is max(3h, 1+h)
    GridFunction two(g);
    two.at(0) = 3.0;
    for (std::int64_t cx = 1; cx <= 16; ++cx) two.at(cx) = 1.0;
    const double h = g.h();
    CHECK(weak_quasinorm(two, 1.0) == doctest::Approx(std::max(3.0 * h, 1.0 + h)).epsilon(1e-14));

    // matches sup over breakpoints of t^{1/p} f*(t)
    const GridFunction f = random_dyadic_function(g, 77);
    const Rearrangement r = rearrange(f);
    for (double p : {1.0, 2.0}) {
        double sup = 0.0;
        for (std::size_t k = 1; k <= r.sorted.size(); ++k) {
            const double t = static_cast<double>(k) * r.cell_measure;
            sup = std::max(sup, std::pow(t, 1.0 / p) * r.sorted[k - 1]);
        }
        CHECK(weak_quasinorm(f, p) == doctest::Approx(sup).epsilon(1e-13));
    }
}

TEST_CASE("rearrange rejects an empty cell set") {
    const GridSpec g = make_grid(1, 2, 0.0, 1.0);
    GridFunction f(g);
    std::vector<std::uint8_t> mask(f.v.size(), 0);
    CHECK_THROWS_AS(rearrange(f, mask), invalid_input_error);
}
