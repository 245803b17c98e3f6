#ifndef DIAGORB_MEASURES_HPP
#define DIAGORB_MEASURES_HPP

#include "diagorb/rational.hpp"
#include "diagorb/systems.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diagorb {

/// Mixture weight (1/3) 2^{-|n|} of the n-th translate of the diagonal measure.
Rational shift_weight(std::int64_t n);
double shift_weight_double(std::int64_t n);

/// Sum of 2^{-|n|} over all n = residue (mod period), in closed form:
/// (2^{P-r} + 2^r) / (2^P - 1) for 0 <= r < P.
Rational progression_mass(std::int64_t residue, std::size_t period);

/// n = residue (mod period) are the shifts with Phi^n(x,...,x) equal to the atom's point.
struct ShiftProgression {
    std::size_t base = 0;
    std::size_t residue = 0;
    std::size_t period = 0;
};

struct SupportAtom {
    FinitePoint point;
    Rational nu_weight;
    std::vector<ShiftProgression> contributing_shifts;
};

/// The Phi-orbit of the diagonal, with the exact diagonal-orbit weights.
///
/// Atoms are grouped in Phi-cycles. Cycles are discovered by scanning the diagonal
/// atoms x = 0..m-1 (skipping mu(x) = 0), and each cycle starts at the diagonal
/// point of the smallest atom on it. Every stored atom has positive weight.
class NuSupport {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    const FiniteSystem& system() const { return system_; }
    std::size_t size() const { return atoms_.size(); }
    const SupportAtom& atom(std::size_t i) const { return atoms_.at(i); }
    std::span<const SupportAtom> atoms() const { return atoms_; }

    /// Support index of z, or npos when z is off the support.
    std::size_t find(const FinitePoint& z) const;

    /// Support index of Phi z and Phi^{-1} z.
    std::size_t next(std::size_t i) const { return next_[i]; }
    std::size_t prev(std::size_t i) const { return prev_[i]; }
    /// Support index of Phi^n z.
    std::size_t advance(std::size_t i, std::int64_t n) const;

    const std::vector<std::vector<std::size_t>>& cycles() const { return cycles_; }
    std::size_t cycle_of(std::size_t i) const { return cycle_of_[i]; }
    std::size_t position_in_cycle(std::size_t i) const { return position_[i]; }
    /// lcm of all cycle lengths.
    std::uint64_t period_lcm() const;

    /// nu(Phi^{-s}{z_i}) evaluated by re-weighting the contributing shifts.
    Rational shifted_mass(std::size_t i, std::int64_t s) const;

    Rational total_weight() const;

private:
    friend NuSupport build_nu_support(const FiniteSystem& sys);
    explicit NuSupport(const FiniteSystem& sys);

    FiniteSystem system_;
    std::vector<SupportAtom> atoms_;
    std::vector<std::size_t> by_flat_;
    std::vector<std::size_t> next_;
    std::vector<std::size_t> prev_;
    std::vector<std::vector<std::size_t>> cycles_;
    std::vector<std::size_t> cycle_of_;
    std::vector<std::size_t> position_;
};

NuSupport build_nu_support(const FiniteSystem& sys);

template <typename Point>
struct NuSample {
    Point point;
    std::int64_t shift = 0;
    Point base;
};

/// Draws n from the two-sided geometric law (1/3)2^{-|n|} by inverse CDF of u in [0,1).
std::int64_t shift_from_uniform(double u);

/// i.i.d. draws from nu: n by inverse CDF, then x from mu, point = Phi^n(x,...,x).
std::vector<NuSample<FinitePoint>> sample_nu(const FiniteSystem& sys, std::uint64_t seed, std::size_t count);
std::vector<NuSample<CirclePoint>> sample_nu(const CircleSystem& sys, std::uint64_t seed, std::size_t count);

/// Exponent p in [1, inf].
class LpExponent {
public:
    explicit LpExponent(double p);
    static LpExponent infinity() { return LpExponent(std::numeric_limits<double>::infinity()); }

    double value() const { return p_; }
    bool is_infinite() const { return p_ == std::numeric_limits<double>::infinity(); }
    /// p as an integer when p is a positive integer.
    std::optional<unsigned> as_integer() const;

private:
    double p_;
};

/// "1", "2", "2.5", "inf".
LpExponent parse_exponent(const std::string& text);

struct LpNorm {
    double value = 0.0;
    /// Present for p = 1 and p = inf.
    std::optional<Rational> exact;
};

/// ||G||_{L^p(nu)} for G tabulated on the support.
LpNorm lp_norm_nu(const NuSupport& support, std::span<const Rational> values, LpExponent p);

struct MonteCarloNorm {
    double estimate = 0.0;
    double std_error = 0.0;
    /// Set for p = inf: the sample maximum only bounds the essential sup from below.
    bool lower_bound_only = false;
};

/// Estimate of ||G||_{L^p(nu)} from values of G at nu-samples.
MonteCarloNorm lp_norm_monte_carlo(std::span<const double> sample_values, LpExponent p);

struct SandwichCheck {
    Rational nu_set;
    Rational nu_preimage;
    Rational nu_preimage_reweighted;
    bool holds = false;
    bool consistent = false;
};

/// nu(A), nu(Phi^{-1}A) two ways, and (1/3)nu(A) <= nu(Phi^{-1}A) <= 2nu(A).
SandwichCheck check_sandwich(const NuSupport& support, std::span<const std::size_t> subset);

struct NonsingularityReport {
    std::size_t subsets_checked = 0;
    std::size_t violations = 0;
    std::size_t inconsistencies = 0;
    /// Extremal nu(Phi^{-1}A)/nu(A) over the nonempty subsets checked.
    std::optional<Rational> min_ratio;
    std::optional<Rational> max_ratio;
    /// First violating subset, if any.
    std::vector<std::size_t> offending_subset;

    bool passed() const { return violations == 0 && inconsistencies == 0; }
};

/// Checks the full support, the empty set, then `trials` random subsets.
NonsingularityReport check_nonsingularity(const NuSupport& support, std::size_t trials, std::uint64_t seed);

/// Support indices of Phi^{-1}A.
std::vector<std::size_t> preimage(const NuSupport& support, std::span<const std::size_t> subset);

Rational nu_measure(const NuSupport& support, std::span<const std::size_t> subset);

} // namespace diagorb

#endif
