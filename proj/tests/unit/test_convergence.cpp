#include "diagorb/convergence.hpp"
#include "diagorb/planted.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace diagorb;

namespace {

FunctionSequence random_sequence(const FiniteSystem& sys, Rng& rng)
{
    std::vector<EventuallyPeriodic> seqs(sys.product_size());
    for (auto& s : seqs) {
        const auto prefix = rng.integer(0, 3);
        for (std::int64_t k = 0; k < prefix; ++k) {
            s.prefix.push_back(Rational(rng.integer(-3, 3)));
        }
        const Rational limit(rng.integer(-2, 2));
        const auto len = rng.integer(1, 3);
        const bool diverge = rng.integer(0, 3) == 0;
        for (std::int64_t k = 0; k < len; ++k) {
            s.block.push_back(diverge && k == len - 1 && len > 1 ? limit + 1 : limit);
        }
    }
    return FunctionSequence(sys, std::move(seqs));
}

} // namespace

TEST_CASE("eventually periodic sequences")
{
    EventuallyPeriodic a{{Rational(5)}, {Rational(1), Rational(1)}};
    CHECK(a.converges());
    CHECK(a.at(0) == 5);
    CHECK(a.at(7) == 1);
    EventuallyPeriodic b{{}, {Rational(0), Rational(1)}};
    CHECK_FALSE(b.converges());
    CHECK(b.at(3) == 1);
}

TEST_CASE("divergence sets pull back under Phi")
{
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const FiniteSystem sys = random_finite_system(rng, 5, 3);
        const NuSupport support = build_nu_support(sys);
        const FunctionSequence f = random_sequence(sys, rng);
        const auto div_f = f.divergence_set();
        const auto div_g = f.compose_with_product().divergence_set();
        CHECK(div_g == product_preimage(sys, div_f));
        if (nu_of_points(support, div_f) == 0) {
            CHECK(nu_of_points(support, div_g) == 0);
        }
    }
}

TEST_CASE("mu_Delta alone does not pull null sets back to null sets")
{
    const auto sys = fixture::z4();
    auto w = mu_delta_pullback_witness(sys);
    REQUIRE(w.has_value());
    CHECK(w->point == FinitePoint{1, 2});
    CHECK(w->preimage == FinitePoint{0, 0});
    CHECK(mu_delta_of_points(sys, {sys.flat_index(w->point)}) == 0);
    CHECK(mu_delta_of_points(sys, product_preimage(sys, {sys.flat_index(w->point)})) == Rational(1, 4));
    // whereas nu sees the point
    CHECK(nu_of_points(build_nu_support(sys), {sys.flat_index(w->point)}) > 0);

    FiniteMap t = FiniteMap::cyclic_shift(3, 1);
    CHECK_FALSE(mu_delta_pullback_witness(FiniteSystem(FiniteSpace(3), {t, t})).has_value());
}
