#include "diagorb/rational.hpp"

#include "diagorb/errors.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace diagorb {

Integer pow2(unsigned k)
{
    Integer r = 1;
    r <<= k;
    return r;
}

Rational abs(const Rational& q)
{
    return q < 0 ? Rational(-q) : q;
}

namespace {

bool all_digits(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

Integer parse_integer(std::string_view s)
{
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (!all_digits(s)) {
        throw ParameterError("malformed integer '" + std::string(s) + "'");
    }
    // a leading 0 would make GMP read the digits as octal
    while (s.size() > 1 && s.front() == '0') {
        s.remove_prefix(1);
    }
    Integer v{std::string(s)};
    return negative ? Integer(-v) : v;
}

} // namespace

Rational parse_rational(std::string_view text)
{
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
        text.remove_prefix(1);
    }
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
        text.remove_suffix(1);
    }
    if (text.empty()) {
        throw ParameterError("empty rational literal");
    }
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        Integer num = parse_integer(text.substr(0, slash));
        Integer den = parse_integer(text.substr(slash + 1));
        if (den == 0) {
            throw ParameterError("zero denominator in '" + std::string(text) + "'");
        }
        return Rational(num, den);
    }

    // decimal with optional exponent, parsed exactly
    std::string_view mantissa = text;
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        mantissa = text.substr(0, e);
        std::string_view exp_text = text.substr(e + 1);
        try {
            exponent = std::stol(std::string(exp_text));
        } catch (const std::exception&) {
            throw ParameterError("malformed exponent in '" + std::string(text) + "'");
        }
    }
    bool negative = false;
    if (!mantissa.empty() && (mantissa.front() == '-' || mantissa.front() == '+')) {
        negative = mantissa.front() == '-';
        mantissa.remove_prefix(1);
    }
    std::string digits;
    long frac_digits = 0;
    if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
        std::string_view ip = mantissa.substr(0, dot);
        std::string_view fp = mantissa.substr(dot + 1);
        if ((ip.empty() && fp.empty()) || (!ip.empty() && !all_digits(ip))
            || (!fp.empty() && !all_digits(fp))) {
            throw ParameterError("malformed decimal '" + std::string(text) + "'");
        }
        digits = std::string(ip) + std::string(fp);
        frac_digits = static_cast<long>(fp.size());
    } else {
        if (!all_digits(mantissa)) {
            throw ParameterError("malformed number '" + std::string(text) + "'");
        }
        digits = std::string(mantissa);
    }
    long scale = exponent - frac_digits;
    if (scale > 4096 || scale < -4096) {
        throw ParameterError("exponent out of range in '" + std::string(text) + "'");
    }
    const auto nz = digits.find_first_not_of('0');
    Integer num{nz == std::string::npos ? std::string("0") : digits.substr(nz)};
    Integer ten_pow = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(scale < 0 ? -scale : scale));
    Rational r = scale >= 0 ? Rational(num * ten_pow) : Rational(num, ten_pow);
    return negative ? Rational(-r) : r;
}

Rational rational_from_double(double x)
{
    if (!std::isfinite(x)) {
        throw ParameterError("non-finite value cannot be made exact");
    }
    int exp = 0;
    double frac = std::frexp(x, &exp);
    // frac * 2^53 is an exact integer
    auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
    exp -= 53;
    Rational r{Integer(mant)};
    if (exp >= 0) {
        r *= Rational(pow2(static_cast<unsigned>(exp)));
    } else {
        r /= Rational(pow2(static_cast<unsigned>(-exp)));
    }
    return r;
}

std::string to_string(const Rational& q)
{
    Integer den = boost::multiprecision::denominator(q);
    Integer num = boost::multiprecision::numerator(q);
    if (den == 1) {
        return num.str();
    }
    return num.str() + "/" + den.str();
}

double to_double(const Rational& q)
{
    return q.convert_to<double>();
}

} // namespace diagorb
