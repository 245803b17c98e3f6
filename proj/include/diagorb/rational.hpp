#ifndef DIAGORB_RATIONAL_HPP
#define DIAGORB_RATIONAL_HPP

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace diagorb {

/// Exact arithmetic for finite systems: weights, observables, transfer functions.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;

/// 2^k for k >= 0.
Integer pow2(unsigned k);

Rational abs(const Rational& q);

/// Parses "p", "p/q" or a decimal literal ("0.25", "-1e-3") exactly.
Rational parse_rational(std::string_view text);

/// Exact binary value of a finite double.
Rational rational_from_double(double x);

/// "p/q", or "p" when q = 1.
std::string to_string(const Rational& q);

double to_double(const Rational& q);

} // namespace diagorb

#endif
