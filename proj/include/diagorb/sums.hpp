#ifndef DIAGORB_SUMS_HPP
#define DIAGORB_SUMS_HPP

#include "diagorb/measures.hpp"
#include "diagorb/rational.hpp"
#include "diagorb/systems.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace diagorb {

/// F = f_1 (x) ... (x) f_H on a finite system, each factor a value table over the atoms.
class TensorObservable {
public:
    explicit TensorObservable(std::vector<std::vector<Rational>> factors);

    /// f_i = 1 for every i.
    static TensorObservable constant(std::size_t arity, std::size_t atoms, const Rational& value);

    std::size_t arity() const { return factors_.size(); }
    const std::vector<Rational>& factor(std::size_t i) const { return factors_.at(i); }
    /// prod_i max_x |f_i(x)|, an upper bound for |F|.
    const Rational& bound() const { return bound_; }

private:
    std::vector<std::vector<Rational>> factors_;
    Rational bound_;
};

Rational eval_F(const TensorObservable& obs, const FinitePoint& z);

/// F restricted to the support, indexed like the support's atoms.
std::vector<Rational> tabulate(const NuSupport& support, const TensorObservable& obs);

/// One factor of a circle observable, with a bound on its sup norm.
struct CircleFactor {
    std::function<double(double)> f;
    double sup = 0.0;
    std::string name;
};

/// Bounded function on circle X^H: a tensor product of factors, or a general
/// function of the whole point.
class CircleObservable {
public:
    static CircleObservable tensor(std::vector<CircleFactor> factors);
    static CircleObservable general(std::function<double(const CirclePoint&)> f, double bound, std::string name);

    double operator()(const CirclePoint& z) const;
    double bound() const { return bound_; }
    bool is_tensor() const { return !factors_.empty(); }
    const std::string& name() const { return name_; }

private:
    std::vector<CircleFactor> factors_;
    std::function<double(const CirclePoint&)> general_;
    double bound_ = 0.0;
    std::string name_;
};

double eval_F(const CircleObservable& obs, const CirclePoint& z);

/// Trajectory N -> S_N(z) = sum_{n=s}^{N-1+s} F(Phi^n z), s = start_index in {0, 1}.
template <typename Scalar>
struct SumSeries {
    int start_index = 1;
    /// values[N-1] = S_N
    std::vector<Scalar> values;
    /// running_sup[N-1] = max_{n <= N} |S_n|
    std::vector<Scalar> running_sup;

    const Scalar& sup() const { return running_sup.back(); }
};

SumSeries<Rational> ergodic_sums(const FiniteSystem& sys, const TensorObservable& obs, const FinitePoint& z,
                                 std::size_t n_max, int start_index = 1);
SumSeries<Rational> ergodic_sums(const NuSupport& support, std::span<const Rational> f, std::size_t atom,
                                 std::size_t n_max, int start_index = 1);
SumSeries<double> ergodic_sums(const CircleSystem& sys, const CircleObservable& obs, const CirclePoint& z,
                               std::size_t n_max, int start_index = 1);

/// Sum of F around each Phi-cycle of the support. S_N is bounded on the support
/// iff every entry vanishes.
std::vector<Rational> cycle_sums(const NuSupport& support, std::span<const Rational> f);

/// ||S_N||_{L^p(nu)} for N = 1..n_max.
std::vector<LpNorm> norm_series(const NuSupport& support, std::span<const Rational> f, std::size_t n_max,
                                LpExponent p, int start_index = 1);

/// Least-squares slope of y against N = first..first+y.size()-1.
double least_squares_slope(std::span<const double> y, std::size_t first);

struct SupNormReport {
    std::vector<double> norms;
    double sup = 0.0;
    /// Exact sup for p = 1 and p = inf on finite systems.
    std::optional<Rational> exact_sup;
    /// Standard errors of norms, for sampled estimates.
    std::vector<double> std_errors;
    /// Slope of ||S_N|| over the top half of the N range.
    double slope = 0.0;
    double bound = 0.0;
    bool bounded_looking = false;
    /// Exact boundedness on finite systems (all cycle sums zero); absent for samples.
    std::optional<bool> bounded_exact;
};

inline constexpr double bounded_slope_threshold = 1e-6;

/// Diagnoses sup_N ||S_N||_{L^p(nu)}; never a proof of boundedness on its own.
SupNormReport sup_norm_diagnostic(const NuSupport& support, std::span<const Rational> f, std::size_t n_max,
                                  LpExponent p);
/// Monte Carlo version over `samples` draws from nu.
SupNormReport sup_norm_diagnostic(const CircleSystem& sys, const CircleObservable& obs, std::size_t n_max,
                                  LpExponent p, std::uint64_t seed, std::size_t samples);

struct ShiftedSumReport {
    /// sup over 1 <= N <= n_max, |m| <= m_max of ||sum_{n=1}^N F o Phi^{n+m}||_{L^p(mu)} on the diagonal.
    double shifted_sup = 0.0;
    /// sup over 0 <= N <= n_max of ||sum_{n=0}^N F o Phi^n||_{L^p(mu)} on the diagonal.
    double single_sup = 0.0;
    std::optional<Rational> shifted_sup_exact;
    std::optional<Rational> single_sup_exact;
    /// Where shifted_sup is attained.
    std::size_t argmax_n = 0;
    std::int64_t argmax_m = 0;
    /// Both sups are bounded in N iff the cycle sums through the diagonal vanish.
    bool bounded_exact = false;
};

ShiftedSumReport shifted_sum_condition(const NuSupport& support, std::span<const Rational> f, std::size_t n_max,
                                       std::size_t m_max, LpExponent p);

} // namespace diagorb

#endif
