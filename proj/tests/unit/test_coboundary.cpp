#include "diagorb/coboundary.hpp"
#include "diagorb/errors.hpp"
#include "diagorb/planted.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace diagorb;

namespace {

std::vector<Rational> z4_two_point_f(const NuSupport& s)
{
    std::vector<Rational> f(s.size(), Rational(0));
    f[s.find({0, 0})] = 1;
    f[s.find({1, 2})] = -1;
    return f;
}

void check_constant_per_orbit(const NuSupport& s, const std::vector<Rational>& a, const std::vector<Rational>& b)
{
    for (const auto& cycle : s.cycles()) {
        const Rational shift = a[cycle.front()] - b[cycle.front()];
        for (auto i : cycle) {
            REQUIRE(a[i] - b[i] == shift);
        }
    }
}

} // namespace

TEST_CASE("solve_orbit: zero observable")
{
    const NuSupport s = build_nu_support(fixture::z4());
    std::vector<Rational> f(s.size(), Rational(0));
    auto c = solve_orbit(s, f);
    CHECK(c.status == CoboundaryStatus::Coboundary);
    CHECK(c.residual_sup == 0);
    CHECK(c.v_sup == 0);
}

TEST_CASE("solve_orbit: hand-solved Z4 cycle")
{
    const NuSupport s = build_nu_support(fixture::z4());
    auto f = z4_two_point_f(s);
    auto c = solve_orbit(s, f);
    REQUIRE(c.status == CoboundaryStatus::Coboundary);
    CHECK(c.residual_sup == 0);
    const std::vector<FinitePoint> cycle{{0, 0}, {1, 2}, {2, 0}, {3, 2}};
    const std::vector<Rational> expected{0, -1, 0, 0};
    for (std::size_t j = 0; j < cycle.size(); ++j) {
        CHECK(c.V[s.find(cycle[j])] == expected[j]);
    }
    CHECK(c.v_sup == 1);

    std::vector<Rational> consts(s.cycles().size(), Rational(7, 2));
    auto shifted = solve_orbit(s, f, consts);
    CHECK(shifted.residual_sup == 0);
    CHECK(shifted.V[s.find({0, 0})] == Rational(7, 2));
    check_constant_per_orbit(s, shifted.V, c.V);
    CHECK_THROWS_AS(solve_orbit(s, f, std::vector<Rational>(2)), ParameterError);
    CHECK_THROWS_AS(solve_orbit(s, std::vector<Rational>(3)), StateError);
}

TEST_CASE("solve_orbit: constants are not coboundaries")
{
    const NuSupport s = build_nu_support(fixture::z4());
    std::vector<Rational> ones(s.size(), Rational(1));
    auto c = solve_orbit(s, ones);
    CHECK(c.status == CoboundaryStatus::NotACoboundary);
    REQUIRE(c.witness.has_value());
    CHECK(c.witness->cycle_sum == static_cast<long>(c.witness->atoms.size()));
    CHECK(c.witness->cycle_sum != 0);
}

TEST_CASE("solve_orbit is sound and complete on random fixtures")
{
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const FiniteSystem sys = random_finite_system(rng, 8, 3);
        const NuSupport s = build_nu_support(sys);
        std::vector<Rational> f(s.size());
        for (auto& v : f) {
            v = Rational(rng.integer(-4, 4), rng.integer(1, 4));
        }
        auto c = solve_orbit(s, f);
        auto sums = cycle_sums(s, f);
        const bool zero_sums = std::all_of(sums.begin(), sums.end(), [](const Rational& x) { return x == 0; });
        CHECK((c.status == CoboundaryStatus::Coboundary) == zero_sums);
        if (c.status == CoboundaryStatus::Coboundary) {
            for (const auto& r : residual(s, f, c.V)) {
                REQUIRE(r == 0);
            }
        } else {
            REQUIRE(c.witness.has_value());
            // summing F = V - V o Phi around the witness cycle gives zero for any V
            std::vector<Rational> any_v(s.size());
            for (auto& v : any_v) {
                v = Rational(rng.integer(-9, 9));
            }
            auto res = residual(s, f, any_v);
            Rational around = 0;
            for (auto i : c.witness->atoms) {
                around += res[i];
            }
            CHECK(around == c.witness->cycle_sum);
        }
    }
}

TEST_CASE("Cesaro average of partial sums matches the literal double sum")
{
    Rng rng(17);
    for (int trial = 0; trial < 8; ++trial) {
        const FinitePlanted p = std::get<FinitePlanted>(make_planted(PlantedKind::FiniteRandom, {}, rng.next()));
        const NuSupport& s = p.support;
        const FiniteSystem& sys = s.system();
        auto f_at = [&](const FinitePoint& z) { return p.f[s.find(z)]; };
        for (std::uint64_t n : {1u, 2u, 5u, 13u, 24u}) {
            auto d = cesaro_partial_sum_average(s, p.f, n);
            for (std::size_t i = 0; i < s.size(); ++i) {
                REQUIRE(d[i] == oracle::cesaro_double_sum(sys, f_at, s.atom(i).point, n));
            }
        }
    }
    const NuSupport s = build_nu_support(fixture::z4());
    CHECK_THROWS_AS(cesaro_partial_sum_average(s, std::vector<Rational>(s.size(), Rational(1)), 4), StateError);
}

TEST_CASE("Komlos construction on the Z4 example")
{
    const NuSupport s = build_nu_support(fixture::z4());
    auto f = z4_two_point_f(s);
    auto r = komlos_construct(s, f, SubsequenceRule::PowersOfTwoAligned, 6);
    REQUIRE(r.certificate.status == CoboundaryStatus::Coboundary);
    CHECK(r.certificate.residual_sup == 0);
    CHECK(r.trace.identity_exact);
    CHECK(r.trace.sup_bound_holds);
    for (auto n : r.trace.subsequence) {
        CHECK(n % 4 == 0);
    }
    // D_4 = (1/4) sum_{n=1}^4 S0_n, the cycle average of the partial sums
    const FiniteSystem& sys = s.system();
    auto f_at = [&](const FinitePoint& z) { return f[s.find(z)]; };
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(r.certificate.V[i] == oracle::cesaro_double_sum(sys, f_at, s.atom(i).point, 4));
    }
    for (const auto& inc : r.trace.increments) {
        CHECK(inc == 0);
    }
    check_constant_per_orbit(s, r.certificate.V, solve_orbit(s, f).V);
}

TEST_CASE("Komlos construction: trivial and failing hypotheses")
{
    const NuSupport s = build_nu_support(fixture::z4());
    std::vector<Rational> zero(s.size(), Rational(0));
    for (std::size_t k : {1u, 3u, 7u}) {
        auto r = komlos_construct(s, zero, SubsequenceRule::PowersOfTwoAligned, k);
        CHECK(r.certificate.status == CoboundaryStatus::Coboundary);
        CHECK(r.certificate.v_sup == 0);
        CHECK(r.certificate.residual_sup == 0);
    }
    std::vector<Rational> ones(s.size(), Rational(1));
    auto bad = komlos_construct(s, ones, SubsequenceRule::PowersOfTwoAligned, 4);
    CHECK(bad.certificate.status == CoboundaryStatus::Undetermined);
    CHECK(bad.certificate.witness.has_value());
    CHECK(bad.trace.subsequence.empty());
    CHECK_THROWS_AS(komlos_construct(s, zero, SubsequenceRule::PowersOfTwo, 0), ParameterError);
}

TEST_CASE("unaligned subsequence: exact identity with the correction term, which shrinks")
{
    // a 3-cycle cannot align with powers of two
    FiniteSystem sys(FiniteSpace(3), {FiniteMap::cyclic_shift(3, 1)});
    const NuSupport s = build_nu_support(sys);
    std::vector<Rational> f{Rational(2), Rational(-1), Rational(-1)};
    Rational previous = -1;
    for (std::size_t k : {2u, 4u, 8u, 16u}) {
        auto r = komlos_construct(s, f, SubsequenceRule::PowersOfTwo, k);
        CHECK(r.trace.identity_exact);
        CHECK(r.trace.sup_bound_holds);
        CHECK(r.certificate.status == CoboundaryStatus::Undetermined);
        Rational corr = 0;
        for (const auto& c : r.trace.correction) {
            corr = std::max(corr, abs(c));
        }
        CHECK(corr == r.certificate.residual_sup);
        if (previous >= 0) {
            CHECK(corr < previous);
        }
        previous = corr;
    }
}

TEST_CASE("subsequence rules")
{
    const NuSupport s = build_nu_support(fixture::z4());
    CHECK(komlos_subsequence(s, SubsequenceRule::PowersOfTwo, 4) == std::vector<std::uint64_t>{2, 4, 8, 16});
    CHECK(komlos_subsequence(s, SubsequenceRule::PowersOfTwoAligned, 4) == std::vector<std::uint64_t>{4, 8, 12, 16});
    FiniteSystem sys(FiniteSpace(3), {FiniteMap::cyclic_shift(3, 1)});
    CHECK(komlos_subsequence(build_nu_support(sys), SubsequenceRule::PowersOfTwoAligned, 5)
          == std::vector<std::uint64_t>{3, 6, 9, 18, 33});
    CHECK(parse_subsequence_rule("pow2") == SubsequenceRule::PowersOfTwo);
    CHECK_THROWS_AS(parse_subsequence_rule("fib"), ParameterError);
}

TEST_CASE("verify_certificate")
{
    const NuSupport s = build_nu_support(fixture::z4());
    std::vector<Rational> zero(s.size(), Rational(0));
    auto trivial = verify_certificate(s, zero, solve_orbit(s, zero), 8);
    CHECK(trivial.passed());

    auto f = z4_two_point_f(s);
    auto cert = solve_orbit(s, f);
    auto rep = verify_certificate(s, f, cert, 32);
    CHECK(rep.passed());
    CHECK(rep.sum_sup <= 2 * cert.v_sup);

    auto corrupted = cert;
    const std::size_t target = s.find({2, 0});
    corrupted.V[target] += 1;
    auto bad = verify_certificate(s, f, corrupted, 8);
    CHECK_FALSE(bad.residual_ok);
    std::vector<std::size_t> expected{target, s.prev(target)};
    std::sort(expected.begin(), expected.end());
    CHECK(bad.residual_failures == expected);

    std::vector<Rational> ones(s.size(), Rational(1));
    CHECK_THROWS_AS(verify_certificate(s, ones, solve_orbit(s, ones), 8), StateError);
}

TEST_CASE("reverse direction")
{
    const NuSupport s = build_nu_support(fixture::z4());
    std::vector<Rational> c(s.size(), Rational(-3));
    auto rc = reverse_direction(s, c, 16);
    for (const auto& x : rc.f) {
        CHECK(x == 0);
    }
    CHECK(rc.sum_sup == 0);
    CHECK(rc.holds());

    Rng rng(4);
    std::vector<Rational> v(s.size());
    for (auto& x : v) {
        x = Rational(rng.integer(-10, 10));
    }
    auto rv = reverse_direction(s, v, 64);
    CHECK(rv.holds());
    CHECK(rv.sum_sup <= 2 * rv.v_sup);

    for (std::size_t i = 0; i < s.size(); ++i) {
        std::vector<Rational> ind(s.size(), Rational(0));
        ind[i] = 1;
        auto r = reverse_direction(s, ind, 64);
        CHECK(r.holds());
        CHECK(r.sum_sup <= 2);
    }
}

TEST_CASE("circle partial solver")
{
    const double a = golden_conjugate;
    CircleSystem sys(std::vector<CircleRotation>{{a}});
    auto planted = CircleObservable::tensor({CircleFactor{
        [a](double x) { return std::cos(2 * std::numbers::pi * x) - std::cos(2 * std::numbers::pi * (x + a)); }, 2.0,
        "planted"}});
    const CirclePoint z{0.3};
    auto sol = circle_partial_solver(sys, planted, z, 200);
    CHECK(sol.status == CoboundaryStatus::Undetermined);
    for (std::int64_t n = -200; n <= 200; ++n) {
        const double expected = std::cos(2 * std::numbers::pi * sol.window.at(n)[0]) - std::cos(2 * std::numbers::pi * z[0]);
        CHECK(std::fabs(sol.at(n) - expected) <= 1e-9);
    }
    CHECK(sol.window_sup <= 2.0);

    auto zero = CircleObservable::tensor({CircleFactor{[](double) { return 0.0; }, 0.0, "zero"}});
    auto sz = circle_partial_solver(sys, zero, z, 10);
    CHECK(sz.window_sup == 0.0);

    auto one = CircleObservable::tensor({CircleFactor{[](double) { return 1.0; }, 1.0, "one"}});
    auto so = circle_partial_solver(sys, one, z, 50);
    for (std::int64_t n = -50; n <= 50; ++n) {
        CHECK(std::fabs(sol.at(0)) == 0.0);
        CHECK(std::fabs(so.at(n)) == doctest::Approx(static_cast<double>(n < 0 ? -n : n)));
    }
    CHECK(so.window_sup == doctest::Approx(50.0));
    CHECK_THROWS_AS(circle_partial_solver(sys, one, z, 0), ParameterError);
}
