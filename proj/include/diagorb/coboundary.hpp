#ifndef DIAGORB_COBOUNDARY_HPP
#define DIAGORB_COBOUNDARY_HPP

#include "diagorb/measures.hpp"
#include "diagorb/sums.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diagorb {

enum class CoboundaryStatus { Coboundary, NotACoboundary, Undetermined };

std::string to_string(CoboundaryStatus s);

/// A Phi-cycle around which F does not sum to zero.
struct CycleWitness {
    std::size_t cycle = 0;
    std::vector<std::size_t> atoms;
    Rational cycle_sum;
};

/// A transfer function V on the support with F = V - V o Phi checked by full scan.
struct CoboundaryCertificate {
    CoboundaryStatus status = CoboundaryStatus::Undetermined;
    std::vector<Rational> V;
    /// max over the support of |F - (V - V o Phi)|
    Rational residual_sup;
    Rational v_sup;
    Rational v_l1;
    /// Value of V at the first atom of each cycle.
    std::vector<Rational> per_orbit_constants;
    std::optional<CycleWitness> witness;
    std::string diagnostic;
};

/// F - (V - V o Phi) at every support atom.
std::vector<Rational> residual(const NuSupport& support, std::span<const Rational> f, std::span<const Rational> v);

/// Solves F = V - V o Phi cycle by cycle: V(z_0) = c, V(z_{j+1}) = V(z_j) - F(z_j).
/// `constants` gives c per cycle (empty means 0 everywhere).
CoboundaryCertificate solve_orbit(const NuSupport& support, std::span<const Rational> f,
                                  std::span<const Rational> constants = {});

enum class SubsequenceRule {
    /// N_k = 2^k
    PowersOfTwo,
    /// N_k = least multiple of the period lcm that is >= 2^k and > N_{k-1}
    PowersOfTwoAligned,
};

std::string to_string(SubsequenceRule r);
SubsequenceRule parse_subsequence_rule(const std::string& text);

/// N_1..N_K for the rule on this support.
std::vector<std::uint64_t> komlos_subsequence(const NuSupport& support, SubsequenceRule rule, std::size_t k_max);

/// D_N = (1/N) sum_{n=1}^N sum_{j=0}^{n-1} F o Phi^j on the support.
/// Requires every cycle sum of F to vanish; exact for any N.
std::vector<Rational> cesaro_partial_sum_average(const NuSupport& support, std::span<const Rational> f,
                                                 std::uint64_t n);

struct KomlosTrace {
    std::vector<std::uint64_t> subsequence;
    /// D_{N_k} tables
    std::vector<std::vector<Rational>> averages;
    /// ||V_K - V_{K-1}||_inf for K = 2..K_max
    std::vector<Rational> increments;
    /// ||D_{N_k}||_inf
    std::vector<Rational> average_sups;
    /// (1/K) sum_k (1/N_k) sum_{n=1}^{N_k} F o Phi^n, the term with F = V_K - V_K o Phi + correction
    std::vector<Rational> correction;
    /// sup_N ||S_N||_{L^inf(nu)}
    Rational sum_sup;
    /// F = V_K - V_K o Phi + correction held exactly at every atom.
    bool identity_exact = false;
    /// ||D_{N_k}||_inf <= sup_N ||S_N||_inf for every k, and ||V_K||_inf as well.
    bool sup_bound_holds = false;
};

struct KomlosResult {
    CoboundaryCertificate certificate;
    KomlosTrace trace;
};

/// Cesaro average V_K = (1/K) sum_{k<=K} D_{N_k} of the averaged partial sums.
/// Returns Undetermined when some cycle sum is nonzero (S_N unbounded).
KomlosResult komlos_construct(const NuSupport& support, std::span<const Rational> f, SubsequenceRule rule,
                              std::size_t k_max);

struct TelescopingFailure {
    std::size_t atom = 0;
    std::size_t n = 0;
};

struct VerificationReport {
    /// (a) F = V - V o Phi on the support
    bool residual_ok = false;
    /// same identity restricted to the diagonal points (x,...,x) with mu(x) > 0
    bool diagonal_residual_ok = false;
    /// (b) S_N = V o Phi - V o Phi^{N+1} for 1 <= N <= N_max
    bool telescoping_ok = false;
    /// (c) ||S_N||_inf <= 2 ||V||_inf for 1 <= N <= N_max
    bool bound_ok = false;
    std::vector<std::size_t> residual_failures;
    std::optional<TelescopingFailure> telescoping_failure;
    std::optional<std::size_t> bound_failure_n;
    Rational sum_sup;
    std::size_t n_max = 0;

    bool passed() const { return residual_ok && diagonal_residual_ok && telescoping_ok && bound_ok; }
};

/// Throws StateError unless the certificate claims Coboundary.
VerificationReport verify_certificate(const NuSupport& support, std::span<const Rational> f,
                                      const CoboundaryCertificate& cert, std::size_t n_max);

struct ReverseReport {
    std::vector<Rational> f;
    Rational v_sup;
    Rational sum_sup;
    std::optional<std::size_t> violation_n;

    bool holds() const { return !violation_n; }
};

/// F := V - V o Phi, then sup_{N <= N_max} ||S_N||_inf <= 2 ||V||_inf.
ReverseReport reverse_direction(const NuSupport& support, std::span<const Rational> v, std::size_t n_max);

struct CircleSolution {
    CircleWindow window;
    /// V(Phi^n z) for n = -horizon..horizon with V(z) = 0
    std::vector<double> values;
    /// max |V| over the window, a lower bound for the minimal sup of V on the orbit
    double window_sup = 0.0;
    /// Never Coboundary: a finite window cannot decide boundedness.
    CoboundaryStatus status = CoboundaryStatus::Undetermined;

    double at(std::int64_t n) const { return values.at(static_cast<std::size_t>(n + window.horizon)); }
};

/// Inverts partial sums along the orbit of z:
/// V(Phi^n z) = -sum_{j=0}^{n-1} F(Phi^j z), V(Phi^{-n} z) = sum_{j=1}^n F(Phi^{-j} z).
CircleSolution circle_partial_solver(const CircleSystem& sys, const CircleObservable& obs, const CirclePoint& z,
                                     std::int64_t horizon);

} // namespace diagorb

#endif
