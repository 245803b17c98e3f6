#include "diagorb/errors.hpp"
#include "diagorb/planted.hpp"
#include "diagorb/sums.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace diagorb;

namespace {

/// f_1 = g - g o T_1 with g the indicator of atom 0, f_2 = 1.
TensorObservable z4_coboundary()
{
    return TensorObservable({{Rational(1), Rational(0), Rational(0), Rational(-1)},
                             {Rational(1), Rational(1), Rational(1), Rational(1)}});
}

} // namespace

TEST_CASE("eval_F")
{
    const auto sys = fixture::z4();
    CHECK(eval_F(TensorObservable::constant(2, 4, Rational(1)), {2, 3}) == 1);
    CHECK(eval_F(z4_coboundary(), {0, 0}) == 1);
    CHECK(eval_F(z4_coboundary(), {3, 1}) == -1);
    TensorObservable with_zero({{Rational(3), Rational(2), Rational(1), Rational(7)},
                                {Rational(0), Rational(0), Rational(0), Rational(0)}});
    for (std::size_t flat = 0; flat < sys.product_size(); ++flat) {
        CHECK(eval_F(with_zero, sys.point_at(flat)) == 0);
        CHECK(abs(eval_F(z4_coboundary(), sys.point_at(flat))) <= z4_coboundary().bound());
    }
    CHECK_THROWS_AS(TensorObservable({{Rational(1)}, {Rational(1), Rational(2)}}), ParameterError);
}

TEST_CASE("ergodic sums on the Z4 coboundary example")
{
    const auto sys = fixture::z4();
    auto s = ergodic_sums(sys, z4_coboundary(), {0, 0}, 8);
    const std::vector<Rational> expected{0, 0, -1, 0, 0, 0, -1, 0};
    CHECK(s.values == expected);
    CHECK(s.sup() == 1);

    auto zero = ergodic_sums(sys, TensorObservable::constant(2, 4, Rational(0)), {1, 3}, 10);
    for (const auto& v : zero.values) {
        CHECK(v == 0);
    }
    auto ones = ergodic_sums(sys, TensorObservable::constant(2, 4, Rational(1)), {1, 3}, 10);
    for (std::size_t n = 0; n < ones.values.size(); ++n) {
        CHECK(ones.values[n] == static_cast<long>(n + 1));
    }
    CHECK_THROWS_AS(ergodic_sums(sys, z4_coboundary(), {0, 0}, 0), ParameterError);
    CHECK_THROWS_AS(ergodic_sums(sys, z4_coboundary(), {0, 0}, 4, 2), ParameterError);
}

TEST_CASE("increment and shift identities on random observables")
{
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const FiniteSystem sys = random_finite_system(rng, 6, 3);
        std::vector<std::vector<Rational>> factors(sys.arity(), std::vector<Rational>(sys.atoms()));
        for (auto& f : factors) {
            for (auto& v : f) {
                v = Rational(rng.integer(-3, 3), rng.integer(1, 3));
            }
        }
        const TensorObservable obs(factors);
        const NuSupport support = build_nu_support(sys);
        const auto table = tabulate(support, obs);
        for (std::size_t i = 0; i < support.size(); ++i) {
            const FinitePoint& z = support.atom(i).point;
            auto s = ergodic_sums(sys, obs, z, 20);
            auto via_table = ergodic_sums(support, table, i, 20);
            CHECK(s.values == via_table.values);
            for (std::size_t n = 2; n <= 20; ++n) {
                REQUIRE(s.values[n - 1] - s.values[n - 2] == eval_F(obs, oracle::step(sys, z, static_cast<std::int64_t>(n))));
            }
            auto shifted = ergodic_sums(sys, obs, apply_product(sys, z, 1), 19);
            const Rational f_phi = eval_F(obs, apply_product(sys, z, 1));
            for (std::size_t n = 1; n <= 19; ++n) {
                REQUIRE(shifted.values[n - 1] == s.values[n] - f_phi);
            }
            auto from_zero = ergodic_sums(sys, obs, z, 20, 0);
            for (std::size_t n = 1; n <= 20; ++n) {
                REQUIRE(from_zero.values[n - 1] == eval_F(obs, z) + (n >= 2 ? s.values[n - 2] : Rational(0)));
            }
        }
    }
}

TEST_CASE("sup norm diagnostic")
{
    const auto sys = fixture::z4();
    const NuSupport support = build_nu_support(sys);

    auto zero = tabulate(support, TensorObservable::constant(2, 4, Rational(0)));
    auto rz = sup_norm_diagnostic(support, zero, 32, LpExponent(1));
    CHECK(rz.sup == 0.0);
    CHECK(rz.slope == 0.0);
    CHECK(*rz.bounded_exact);
    CHECK(rz.bounded_looking);

    auto ones = tabulate(support, TensorObservable::constant(2, 4, Rational(1)));
    auto r1 = sup_norm_diagnostic(support, ones, 32, LpExponent(2));
    for (std::size_t n = 0; n < r1.norms.size(); ++n) {
        CHECK(r1.norms[n] == doctest::Approx(static_cast<double>(n + 1)));
    }
    CHECK(r1.slope == doctest::Approx(1.0));
    CHECK_FALSE(r1.bounded_looking);
    CHECK_FALSE(*r1.bounded_exact);

    auto cob = tabulate(support, z4_coboundary());
    for (std::size_t n_max : {1u, 4u, 9u, 64u}) {
        auto r = sup_norm_diagnostic(support, cob, n_max, LpExponent::infinity());
        CHECK(*r.exact_sup == (n_max >= 1 ? 1 : 0));
        CHECK(*r.bounded_exact);
    }
}

TEST_CASE("Cesaro decay under bounded sums")
{
    Rng rng(12);
    for (int trial = 0; trial < 5; ++trial) {
        const FinitePlanted planted = std::get<FinitePlanted>(make_planted(PlantedKind::FiniteRandom, {}, rng.next()));
        Rational v_sup = 0;
        for (const auto& v : planted.v) {
            v_sup = std::max(v_sup, abs(v));
        }
        // sup_N ||S_N||_1 <= C := 2 ||V||_inf, so ||S_N / N||_1 <= C / N
        auto norms = norm_series(planted.support, planted.f, 256, LpExponent(1));
        for (std::size_t n = 0; n < norms.size(); ++n) {
            const Rational n_count(static_cast<long>(n + 1));
            REQUIRE(*norms[n].exact / n_count <= 2 * v_sup / n_count);
        }
        CHECK(to_double(*norms.back().exact) / 256.0 <= to_double(2 * v_sup) / 256.0);
    }
}

TEST_CASE("least squares slope")
{
    std::vector<double> y{3.0, 5.0, 7.0, 9.0};
    CHECK(least_squares_slope(y, 10) == doctest::Approx(2.0));
    CHECK(least_squares_slope(std::vector<double>{4.0}, 1) == 0.0);
}

TEST_CASE("shifted-sum condition")
{
    const auto sys = fixture::z4();
    const NuSupport support = build_nu_support(sys);

    auto zero = tabulate(support, TensorObservable::constant(2, 4, Rational(0)));
    auto rz = shifted_sum_condition(support, zero, 16, 4, LpExponent::infinity());
    CHECK(*rz.shifted_sup_exact == 0);
    CHECK(*rz.single_sup_exact == 0);
    CHECK(rz.bounded_exact);

    auto ones = tabulate(support, TensorObservable::constant(2, 4, Rational(1)));
    for (std::size_t n_max : {8u, 16u, 32u}) {
        auto r = shifted_sum_condition(support, ones, n_max, 4, LpExponent(1));
        CHECK(*r.shifted_sup_exact == static_cast<long>(n_max));
        CHECK(*r.single_sup_exact == static_cast<long>(n_max + 1));
        CHECK_FALSE(r.bounded_exact);
    }

    auto cob = tabulate(support, z4_coboundary());
    for (std::size_t n_max : {4u, 16u, 64u}) {
        auto r = shifted_sum_condition(support, cob, n_max, 32, LpExponent::infinity());
        CHECK(*r.shifted_sup_exact <= 2);
        CHECK(*r.single_sup_exact <= 2);
        CHECK(r.bounded_exact);
        auto r2 = shifted_sum_condition(support, cob, n_max, 32, LpExponent(2));
        CHECK(r2.shifted_sup <= 2.0);
    }
}

TEST_CASE("circle observables and sums")
{
    CircleSystem sys(std::vector<CircleRotation>{{golden_conjugate}});
    auto obs = CircleObservable::tensor({CircleFactor{[](double) { return 1.0; }, 1.0, "one"}});
    auto s = ergodic_sums(sys, obs, {0.25}, 10);
    CHECK(s.values.back() == doctest::Approx(10.0));
    CHECK(obs.is_tensor());

    const double a = golden_conjugate;
    auto planted = CircleObservable::tensor({CircleFactor{
        [a](double x) { return std::cos(2 * M_PI * x) - std::cos(2 * M_PI * (x + a)); }, 2.0, "planted"}});
    auto d = sup_norm_diagnostic(sys, planted, 256, LpExponent(2), 5, 200);
    CHECK(d.sup <= 2.0);
    auto d1 = sup_norm_diagnostic(sys, obs, 64, LpExponent(1), 5, 50);
    CHECK(d1.slope == doctest::Approx(1.0));
}
