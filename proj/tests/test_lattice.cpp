#include <doctest.h>

#include <cmath>

#include "speclab/lattice.hpp"
#include "speclab/rng.hpp"

using namespace speclab;

TEST_CASE("uniform cycle geometry") {
    const auto base = build_cycle(4, 2.0 * M_PI);
    CHECK(base.vertex_count == 4);
    CHECK(base.edges.size() == 8);
    CHECK(base.edges[0].length == doctest::Approx(M_PI / 2).epsilon(1e-15));
    CHECK(base.vertex_volume == doctest::Approx(M_PI / 2).epsilon(1e-15));

    const auto b3 = build_cycle(3, 3.0);
    CHECK(b3.edges[0].length == doctest::Approx(1.0));
    CHECK(b3.total_measure == doctest::Approx(3.0));
}

TEST_CASE("cycle volume sums to circumference") {
    const auto base = build_cycle(64, 2.0 * M_PI);
    double total = 0.0;
    for (int i = 0; i < base.vertex_count; ++i) total += base.vertex_volume;
    CHECK(std::abs(total - 2.0 * M_PI) <= 1e-12);
}

TEST_CASE("cycle rejects bad geometry") {
    CHECK_THROWS_AS(build_cycle(2, 1.0), InvalidGeometry);
    CHECK_THROWS_AS(build_cycle(8, 0.0), InvalidGeometry);
    CHECK_THROWS_AS(build_cycle(8, -1.0), InvalidGeometry);
}

TEST_CASE("torus geometry") {
    const auto base = build_torus(3, 3, 3.0, 3.0);
    CHECK(base.vertex_count == 9);
    CHECK(base.edges.size() == 36);
    CHECK(base.edges[0].length == doctest::Approx(1.0));

    const auto b = build_torus(4, 6, 2.0 * M_PI, 2.0 * M_PI);
    CHECK(b.vertex_volume == doctest::Approx((2.0 * M_PI / 4) * (2.0 * M_PI / 6)));

    const auto big = build_torus(12, 12, 2.0 * M_PI, 2.0 * M_PI);
    double total = 0.0;
    for (int i = 0; i < big.vertex_count; ++i) total += big.vertex_volume;
    CHECK(std::abs(total - 4.0 * M_PI * M_PI) <= 1e-12);
    CHECK_THROWS_AS(build_torus(2, 4, 1.0, 1.0), InvalidGeometry);
}

TEST_CASE("edge reversal is an involution with swapped endpoints") {
    for (const auto &base : {build_cycle(5, 1.0), build_torus(3, 4, 1.0, 2.0)}) {
        for (int e = 0; e < static_cast<int>(base.edges.size()); ++e) {
            const Edge &f = base.edges[e];
            const Edge &r = base.edges[f.reverse];
            CHECK(r.reverse == e);
            CHECK(r.tail == f.head);
            CHECK(r.head == f.tail);
            CHECK(r.length == f.length);
        }
    }
}

TEST_CASE("l2 inner product") {
    const auto base = build_cycle(4, 2.0 * M_PI);
    auto a = make_section(base, 2);
    for (int i = 0; i < 4; ++i) a.at(i) << 1.0, 0.0;
    CHECK(l2_inner(a, a, base) == doctest::Approx(2.0 * M_PI).epsilon(1e-14));

    auto b = make_section(base, 2);
    for (int i = 0; i < 4; ++i) b.at(i) << 0.0, 1.0;
    CHECK(l2_inner(a, b, base) == 0.0);

    const auto big = build_cycle(64, 2.0 * M_PI);
    auto c = make_section(big, 2);
    for (int i = 0; i < 64; ++i) {
        const double th = 2.0 * M_PI * i / 64;
        c.at(i) << std::cos(th), std::sin(th);
    }
    CHECK(std::abs(l2_inner(c, c, big) - 2.0 * M_PI) <= 1e-12);

    auto wrong = make_section(base, 3);
    CHECK_THROWS_AS(l2_inner(a, wrong, base), ShapeMismatch);
}

TEST_CASE("l2 inner is symmetric and positive definite on random sections") {
    const auto base = build_torus(3, 5, 2.0, 3.0);
    Xoshiro256 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = make_section(base, 2);
        auto b = make_section(base, 2);
        for (long i = 0; i < a.values.size(); ++i) {
            a.values[i] = rng.next_normal();
            b.values[i] = rng.next_normal();
        }
        CHECK(l2_inner(a, b, base) == l2_inner(b, a, base));
        CHECK(l2_inner(a, a, base) > 0.0);
    }
    auto zero = make_section(base, 2);
    CHECK(l2_inner(zero, zero, base) == 0.0);
}
