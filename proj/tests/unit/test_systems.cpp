#include "diagorb/errors.hpp"
#include "diagorb/planted.hpp"
#include "diagorb/systems.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace diagorb;

TEST_CASE("apply_product on the Z4 shifts")
{
    const auto sys = fixture::z4();
    CHECK(apply_product(sys, {0, 0}, 1) == FinitePoint{1, 2});
    CHECK(apply_product(sys, {1, 2}, -1) == FinitePoint{0, 0});
    CHECK(apply_product(sys, {3, 1}, 0) == FinitePoint{3, 1});
    CHECK(apply_product(sys, {0, 0}, -5) == oracle::step(sys, {0, 0}, -5));
    CHECK_THROWS_AS(apply_product(sys, {4, 0}, 1), InvalidPoint);
    CHECK_THROWS_AS(apply_product(sys, {0}, 1), InvalidPoint);
}

TEST_CASE("group action law and bijectivity, exhaustively on random systems")
{
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const FiniteSystem sys = random_finite_system(rng, 6, 3);
        for (std::size_t flat = 0; flat < sys.product_size(); ++flat) {
            const FinitePoint z = sys.point_at(flat);
            for (std::int64_t n = -7; n <= 7; ++n) {
                for (std::int64_t m = -7; m <= 7; m += 3) {
                    REQUIRE(apply_product(sys, z, n + m) == apply_product(sys, apply_product(sys, z, m), n));
                }
                REQUIRE(apply_product(sys, z, n) == oracle::step(sys, z, n));
            }
        }
        for (std::int64_t n : {-3, 1, 4}) {
            std::vector<bool> hit(sys.product_size(), false);
            for (std::size_t flat = 0; flat < sys.product_size(); ++flat) {
                hit[sys.flat_index(apply_product(sys, sys.point_at(flat), n))] = true;
            }
            CHECK(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
        }
    }
}

TEST_CASE("maps preserve the weights and invert exactly")
{
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const FiniteSystem sys = random_finite_system(rng, 8, 3);
        for (const auto& t : sys.maps()) {
            for (std::size_t x = 0; x < sys.atoms(); ++x) {
                CHECK(t.inverse(t.forward(x)) == x);
                CHECK(sys.space().weight(t.forward(x)) == sys.space().weight(x));
            }
        }
    }
}

TEST_CASE("system construction rejects broken inputs")
{
    CHECK_THROWS_AS(FiniteMap({0, 0, 1}), InvalidSystem);
    CHECK_THROWS_AS(FiniteMap({1, 0}, {0, 1}), InvalidSystem);
    CHECK_THROWS_AS(FiniteSpace({Rational(1, 2), Rational(1, 3)}), InvalidSystem);
    CHECK_THROWS_AS(FiniteSpace({Rational(3, 2), Rational(-1, 2)}), InvalidSystem);
    CHECK_THROWS_AS(FiniteSpace({Rational(1, 2), Rational(1, 2)}, {"a", "a"}), InvalidSystem);
    // 0 <-> 1 moves mass 1/4 onto mass 3/4
    CHECK_THROWS_AS(FiniteSystem(FiniteSpace({Rational(1, 4), Rational(3, 4)}), {FiniteMap({1, 0})}), InvalidSystem);
    CHECK_THROWS_AS(FiniteSystem(FiniteSpace(3), {FiniteMap::identity(4)}), InvalidSystem);
    CHECK_THROWS_AS(FiniteSystem(FiniteSpace(3), {}), InvalidSystem);
    CHECK_THROWS_AS(CircleSystem(std::vector<CircleRotation>{{1.5}}), InvalidSystem);
}

TEST_CASE("non-commuting maps are accepted")
{
    FiniteMap a({1, 0, 2});
    FiniteMap b({0, 2, 1});
    CHECK(a.forward(b.forward(1)) != b.forward(a.forward(1)));
    FiniteSystem sys(FiniteSpace(3), {a, b});
    CHECK(orbit_of(sys, {0, 0}).period >= 1);
}

TEST_CASE("orbit_of finds the first return")
{
    const auto sys = fixture::z4();
    auto o = orbit_of(sys, {0, 0});
    CHECK(o.period == 4);
    CHECK(o.cycle == std::vector<FinitePoint>{{0, 0}, {1, 2}, {2, 0}, {3, 2}});

    FiniteSystem one(FiniteSpace(1), {FiniteMap::identity(1), FiniteMap::identity(1), FiniteMap::identity(1)});
    CHECK(orbit_of(one, {0, 0, 0}).period == 1);

    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const FiniteSystem s = random_finite_system(rng, 8, 3);
        for (std::size_t flat = 0; flat < s.product_size(); ++flat) {
            auto orb = orbit_of(s, s.point_at(flat));
            CHECK(orb.period <= s.product_size());
            CHECK(apply_product(s, orb.cycle.back(), 1) == orb.cycle.front());
        }
    }
}

TEST_CASE("circle windows and comparison")
{
    CircleSystem sys(std::vector<CircleRotation>{{golden_conjugate}});
    auto w = orbit_of(sys, {0.0}, 3);
    REQUIRE(w.points.size() == 7);
    for (std::int64_t n = -3; n <= 3; ++n) {
        const double expected = static_cast<double>(n) * golden_conjugate - std::floor(static_cast<double>(n) * golden_conjugate);
        CHECK(same_point(w.at(n), {expected}));
    }
    CHECK_THROWS_AS(orbit_of(sys, {0.0}, 0), ParameterError);
    CHECK_THROWS_AS(apply_product(sys, {1.0}, 1), InvalidPoint);
    CHECK(same_point({0.0}, {1.0 - 1e-14}));
    CHECK_FALSE(same_point({0.0}, {0.5}));
    CHECK(wrap_unit(-1e-20) < 1.0);
}
