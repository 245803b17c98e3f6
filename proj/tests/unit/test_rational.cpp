#include "diagorb/errors.hpp"
#include "diagorb/rational.hpp"

#include <doctest.h>

using namespace diagorb;

TEST_CASE("rational literals parse exactly")
{
    CHECK(parse_rational("17/180") == Rational(17, 180));
    CHECK(parse_rational("-3") == Rational(-3));
    CHECK(parse_rational("0.1") == Rational(1, 10));
    CHECK(parse_rational("-2.5e-1") == Rational(-1, 4));
    CHECK(parse_rational(" 6/4 ") == Rational(3, 2));
    CHECK(parse_rational("1e3") == Rational(1000));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("007/010") == Rational(7, 10));
    CHECK_THROWS_AS(parse_rational("1/0"), ParameterError);
    CHECK_THROWS_AS(parse_rational("abc"), ParameterError);
    CHECK_THROWS_AS(parse_rational(""), ParameterError);
    CHECK_THROWS_AS(parse_rational("1.2.3"), ParameterError);
}

TEST_CASE("doubles convert to their exact binary value")
{
    CHECK(rational_from_double(0.25) == Rational(1, 4));
    CHECK(rational_from_double(-3.0) == Rational(-3));
    CHECK(rational_from_double(0.1) != Rational(1, 10));
    CHECK(to_double(rational_from_double(0.1)) == 0.1);
}

TEST_CASE("formatting and powers of two")
{
    CHECK(to_string(Rational(17, 180)) == "17/180");
    CHECK(to_string(Rational(-4, 2)) == "-2");
    CHECK(pow2(0) == 1);
    CHECK(pow2(70) == Integer("1180591620717411303424"));
    CHECK(abs(Rational(-2, 3)) == Rational(2, 3));
}
