#ifndef DIAGORB_SYSTEMS_HPP
#define DIAGORB_SYSTEMS_HPP

#include "diagorb/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace diagorb {

/// A point of X^H on a finite space: one atom index per coordinate.
using FinitePoint = std::vector<std::size_t>;

/// A point of X^H on the circle [0,1): one reduced coordinate per rotation.
using CirclePoint = std::vector<double>;

/// Probability space on atoms 0..m-1 with exact weights.
class FiniteSpace {
public:
    /// Uniform weights on m atoms labelled "0".."m-1".
    explicit FiniteSpace(std::size_t m);
    /// Weights must be nonnegative and sum to exactly 1.
    explicit FiniteSpace(std::vector<Rational> weights, std::vector<std::string> labels = {});

    std::size_t size() const { return weights_.size(); }
    const Rational& weight(std::size_t atom) const { return weights_.at(atom); }
    std::span<const Rational> weights() const { return weights_; }
    const std::string& label(std::size_t atom) const { return labels_.at(atom); }

private:
    std::vector<Rational> weights_;
    std::vector<std::string> labels_;
};

/// Invertible map on a finite space, kept together with its inverse.
class FiniteMap {
public:
    explicit FiniteMap(std::vector<std::size_t> forward);
    FiniteMap(std::vector<std::size_t> forward, std::vector<std::size_t> inverse);

    /// x -> x + shift (mod m).
    static FiniteMap cyclic_shift(std::size_t m, std::size_t shift);
    static FiniteMap identity(std::size_t m);

    std::size_t size() const { return forward_.size(); }
    std::size_t forward(std::size_t x) const { return forward_[x]; }
    std::size_t inverse(std::size_t x) const { return inverse_[x]; }
    std::span<const std::size_t> forward_table() const { return forward_; }

    /// T^n x for any signed n.
    std::size_t power(std::size_t x, std::int64_t n) const;

    /// Length of the cycle of T through x.
    std::size_t cycle_length(std::size_t x) const;

private:
    std::vector<std::size_t> forward_;
    std::vector<std::size_t> inverse_;
};

/// (X, mu, T_1..T_H) with X finite. The T_i need not commute.
class FiniteSystem {
public:
    FiniteSystem(FiniteSpace space, std::vector<FiniteMap> maps);

    const FiniteSpace& space() const { return space_; }
    const std::vector<FiniteMap>& maps() const { return maps_; }
    std::size_t arity() const { return maps_.size(); }
    std::size_t atoms() const { return space_.size(); }

    /// m^H, the number of points of X^H.
    std::size_t product_size() const;
    std::size_t flat_index(const FinitePoint& z) const;
    FinitePoint point_at(std::size_t flat) const;

    FinitePoint diagonal(std::size_t x) const { return FinitePoint(arity(), x); }

    /// Throws InvalidPoint unless z has H coordinates, each an atom.
    void validate(const FinitePoint& z) const;

private:
    FiniteSpace space_;
    std::vector<FiniteMap> maps_;
};

/// x -> x + alpha (mod 1) with Lebesgue measure.
struct CircleRotation {
    double alpha = 0.0;
};

/// The circle with H rotations.
class CircleSystem {
public:
    explicit CircleSystem(std::vector<CircleRotation> rotations);

    const std::vector<CircleRotation>& rotations() const { return rotations_; }
    std::size_t arity() const { return rotations_.size(); }

    CirclePoint diagonal(double x) const { return CirclePoint(arity(), x); }

    void validate(const CirclePoint& z) const;

private:
    std::vector<CircleRotation> rotations_;
};

/// Tolerance for comparing circle coordinates after reduction mod 1.
inline constexpr double circle_tolerance = 1e-12;

/// Reduces into [0,1).
double wrap_unit(double x);

/// Coordinatewise comparison up to circle_tolerance in the circular metric.
bool same_point(const CirclePoint& a, const CirclePoint& b, double tol = circle_tolerance);

/// Phi^n z = (T_1^n z_1, ..., T_H^n z_H).
FinitePoint apply_product(const FiniteSystem& sys, const FinitePoint& z, std::int64_t n);
CirclePoint apply_product(const CircleSystem& sys, const CirclePoint& z, std::int64_t n);

struct FiniteOrbit {
    std::size_t period = 0;
    /// z, Phi z, ..., Phi^{period-1} z
    std::vector<FinitePoint> cycle;
};

struct CircleWindow {
    std::int64_t horizon = 0;
    /// Phi^{-horizon} z, ..., Phi^{horizon} z
    std::vector<CirclePoint> points;

    const CirclePoint& at(std::int64_t n) const { return points.at(static_cast<std::size_t>(n + horizon)); }
};

/// Every orbit of a finite system is periodic with period <= m^H.
FiniteOrbit orbit_of(const FiniteSystem& sys, const FinitePoint& z);
CircleWindow orbit_of(const CircleSystem& sys, const CirclePoint& z, std::int64_t horizon);

std::string format_point(const FinitePoint& z);

} // namespace diagorb

#endif
