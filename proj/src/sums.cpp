#include "diagorb/sums.hpp"

#include "diagorb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace diagorb {

namespace {

void check_start_index(int s)
{
    if (s != 0 && s != 1) {
        throw ParameterError("start index must be 0 or 1");
    }
}

void check_n_max(std::size_t n_max)
{
    if (n_max == 0) {
        throw ParameterError("N_max must be at least 1");
    }
}

void check_table(const NuSupport& support, std::span<const Rational> f)
{
    if (f.size() != support.size()) {
        throw StateError("function table does not match the support size");
    }
}

} // namespace

TensorObservable::TensorObservable(std::vector<std::vector<Rational>> factors)
    : factors_(std::move(factors))
    , bound_(1)
{
    if (factors_.empty()) {
        throw ParameterError("tensor observable needs at least one factor");
    }
    for (const auto& f : factors_) {
        if (f.size() != factors_.front().size() || f.empty()) {
            throw ParameterError("tensor factors must tabulate the same nonempty space");
        }
        Rational m = 0;
        for (const auto& v : f) {
            m = std::max(m, abs(v));
        }
        bound_ *= m;
    }
}

TensorObservable TensorObservable::constant(std::size_t arity, std::size_t atoms, const Rational& value)
{
    std::vector<std::vector<Rational>> factors(arity, std::vector<Rational>(atoms, Rational(1)));
    factors.front().assign(atoms, value);
    return TensorObservable(std::move(factors));
}

Rational eval_F(const TensorObservable& obs, const FinitePoint& z)
{
    if (z.size() != obs.arity()) {
        throw InvalidPoint("point arity differs from observable arity");
    }
    Rational v = 1;
    for (std::size_t i = 0; i < z.size(); ++i) {
        v *= obs.factor(i).at(z[i]);
    }
    return v;
}

std::vector<Rational> tabulate(const NuSupport& support, const TensorObservable& obs)
{
    std::vector<Rational> out;
    out.reserve(support.size());
    for (const auto& a : support.atoms()) {
        out.push_back(eval_F(obs, a.point));
    }
    return out;
}

CircleObservable CircleObservable::tensor(std::vector<CircleFactor> factors)
{
    if (factors.empty()) {
        throw ParameterError("tensor observable needs at least one factor");
    }
    CircleObservable o;
    o.bound_ = 1.0;
    for (const auto& f : factors) {
        o.bound_ *= f.sup;
        o.name_ += (o.name_.empty() ? "" : "*") + f.name;
    }
    o.factors_ = std::move(factors);
    return o;
}

CircleObservable CircleObservable::general(std::function<double(const CirclePoint&)> f, double bound,
                                           std::string name)
{
    CircleObservable o;
    o.general_ = std::move(f);
    o.bound_ = bound;
    o.name_ = std::move(name);
    return o;
}

double CircleObservable::operator()(const CirclePoint& z) const
{
    if (!factors_.empty()) {
        if (z.size() != factors_.size()) {
            throw InvalidPoint("point arity differs from observable arity");
        }
        double v = 1.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            v *= factors_[i].f(z[i]);
        }
        return v;
    }
    return general_(z);
}

double eval_F(const CircleObservable& obs, const CirclePoint& z)
{
    return obs(z);
}

namespace {

template <typename Scalar>
void push_sum(SumSeries<Scalar>& s, const Scalar& value)
{
    using std::abs;
    using diagorb::abs;
    Scalar a = abs(value);
    s.running_sup.push_back(s.running_sup.empty() ? a : std::max(s.running_sup.back(), a));
    s.values.push_back(value);
}

} // namespace

SumSeries<Rational> ergodic_sums(const FiniteSystem& sys, const TensorObservable& obs, const FinitePoint& z,
                                 std::size_t n_max, int start_index)
{
    check_n_max(n_max);
    check_start_index(start_index);
    SumSeries<Rational> s;
    s.start_index = start_index;
    FinitePoint w = apply_product(sys, z, start_index);
    Rational acc = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        acc += eval_F(obs, w);
        push_sum(s, acc);
        w = apply_product(sys, w, 1);
    }
    return s;
}

SumSeries<Rational> ergodic_sums(const NuSupport& support, std::span<const Rational> f, std::size_t atom,
                                 std::size_t n_max, int start_index)
{
    check_n_max(n_max);
    check_start_index(start_index);
    check_table(support, f);
    SumSeries<Rational> s;
    s.start_index = start_index;
    std::size_t w = support.advance(atom, start_index);
    Rational acc = 0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        acc += f[w];
        push_sum(s, acc);
        w = support.next(w);
    }
    return s;
}

SumSeries<double> ergodic_sums(const CircleSystem& sys, const CircleObservable& obs, const CirclePoint& z,
                               std::size_t n_max, int start_index)
{
    check_n_max(n_max);
    check_start_index(start_index);
    SumSeries<double> s;
    s.start_index = start_index;
    double acc = 0.0;
    for (std::size_t n = 1; n <= n_max; ++n) {
        // evaluate Phi^k z directly so rounding does not accumulate along the orbit
        const auto k = static_cast<std::int64_t>(n) - 1 + start_index;
        acc += obs(apply_product(sys, z, k));
        push_sum(s, acc);
    }
    return s;
}

std::vector<Rational> cycle_sums(const NuSupport& support, std::span<const Rational> f)
{
    check_table(support, f);
    std::vector<Rational> out;
    for (const auto& cycle : support.cycles()) {
        Rational s = 0;
        for (auto i : cycle) {
            s += f[i];
        }
        out.push_back(s);
    }
    return out;
}

std::vector<LpNorm> norm_series(const NuSupport& support, std::span<const Rational> f, std::size_t n_max,
                                LpExponent p, int start_index)
{
    check_n_max(n_max);
    check_start_index(start_index);
    check_table(support, f);
    const std::size_t size = support.size();
    std::vector<Rational> sums(size, Rational(0));
    std::vector<std::size_t> cursor(size);
    for (std::size_t i = 0; i < size; ++i) {
        cursor[i] = support.advance(i, start_index);
    }
    std::vector<LpNorm> out;
    out.reserve(n_max);
    for (std::size_t n = 1; n <= n_max; ++n) {
        for (std::size_t i = 0; i < size; ++i) {
            sums[i] += f[cursor[i]];
            cursor[i] = support.next(cursor[i]);
        }
        out.push_back(lp_norm_nu(support, sums, p));
    }
    return out;
}

double least_squares_slope(std::span<const double> y, std::size_t first)
{
    if (y.size() < 2) {
        return 0.0;
    }
    const auto n = static_cast<double>(y.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        mx += static_cast<double>(first + k);
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double dx = static_cast<double>(first + k) - mx;
        sxy += dx * (y[k] - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

void finish_diagnostic(SupNormReport& r)
{
    const std::size_t n_max = r.norms.size();
    const std::size_t first = n_max / 2 + 1;
    r.slope = least_squares_slope(std::span<const double>(r.norms).subspan(first - 1), first);
    r.sup = *std::max_element(r.norms.begin(), r.norms.end());
    r.bounded_looking = r.slope <= bounded_slope_threshold * r.bound;
}

} // namespace

SupNormReport sup_norm_diagnostic(const NuSupport& support, std::span<const Rational> f, std::size_t n_max,
                                  LpExponent p)
{
    SupNormReport r;
    auto series = norm_series(support, f, n_max, p);
    for (const auto& s : series) {
        r.norms.push_back(s.value);
        if (s.exact) {
            if (!r.exact_sup || *s.exact > *r.exact_sup) {
                r.exact_sup = *s.exact;
            }
        }
    }
    Rational bound = 0;
    for (const auto& v : f) {
        bound = std::max(bound, abs(v));
    }
    r.bound = to_double(bound);
    auto sums = cycle_sums(support, f);
    r.bounded_exact = std::all_of(sums.begin(), sums.end(), [](const Rational& c) { return c == 0; });
    finish_diagnostic(r);
    return r;
}

SupNormReport sup_norm_diagnostic(const CircleSystem& sys, const CircleObservable& obs, std::size_t n_max,
                                  LpExponent p, std::uint64_t seed, std::size_t samples)
{
    check_n_max(n_max);
    auto draws = sample_nu(sys, seed, samples);
    // per_n[N-1][s] = S_N at sample s
    std::vector<std::vector<double>> per_n(n_max, std::vector<double>(draws.size()));
    for (std::size_t s = 0; s < draws.size(); ++s) {
        auto series = ergodic_sums(sys, obs, draws[s].point, n_max);
        for (std::size_t n = 0; n < n_max; ++n) {
            per_n[n][s] = series.values[n];
        }
    }
    SupNormReport r;
    r.bound = obs.bound();
    for (const auto& column : per_n) {
        auto est = lp_norm_monte_carlo(column, p);
        r.norms.push_back(est.estimate);
        r.std_errors.push_back(est.std_error);
    }
    finish_diagnostic(r);
    return r;
}

ShiftedSumReport shifted_sum_condition(const NuSupport& support, std::span<const Rational> f, std::size_t n_max,
                                       std::size_t m_max, LpExponent p)
{
    check_n_max(n_max);
    check_table(support, f);
    const FiniteSystem& sys = support.system();

    std::vector<std::size_t> diag;
    std::vector<Rational> mu;
    for (std::size_t x = 0; x < sys.atoms(); ++x) {
        if (sys.space().weight(x) > 0) {
            diag.push_back(support.find(sys.diagonal(x)));
            mu.push_back(sys.space().weight(x));
        }
    }

    // L^p(mu) norm of x -> values[x] on the diagonal
    auto norm = [&](const std::vector<Rational>& values) {
        LpNorm out;
        if (p.is_infinite()) {
            Rational m = 0;
            for (const auto& v : values) {
                m = std::max(m, abs(v));
            }
            out.exact = m;
            out.value = to_double(m);
        } else if (p.value() == 1.0) {
            Rational acc = 0;
            for (std::size_t k = 0; k < values.size(); ++k) {
                acc += abs(values[k]) * mu[k];
            }
            out.exact = acc;
            out.value = to_double(acc);
        } else {
            double acc = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) {
                acc += std::pow(std::fabs(to_double(values[k])), p.value()) * to_double(mu[k]);
            }
            out.value = std::pow(acc, 1.0 / p.value());
        }
        return out;
    };

    ShiftedSumReport r;
    auto take_max = [](double& best, std::optional<Rational>& best_exact, const LpNorm& n) {
        bool improved = n.exact ? (!best_exact || *n.exact > *best_exact) : n.value > best;
        if (improved) {
            best = n.value;
            if (n.exact) {
                best_exact = n.exact;
            }
        }
        return improved;
    };

    const auto m_lim = static_cast<std::int64_t>(m_max);
    std::vector<Rational> acc(diag.size());
    std::vector<std::size_t> cursor(diag.size());
    for (std::int64_t m = -m_lim; m <= m_lim; ++m) {
        for (std::size_t k = 0; k < diag.size(); ++k) {
            acc[k] = 0;
            cursor[k] = support.advance(diag[k], m + 1);
        }
        for (std::size_t n = 1; n <= n_max; ++n) {
            for (std::size_t k = 0; k < diag.size(); ++k) {
                acc[k] += f[cursor[k]];
                cursor[k] = support.next(cursor[k]);
            }
            if (take_max(r.shifted_sup, r.shifted_sup_exact, norm(acc))) {
                r.argmax_n = n;
                r.argmax_m = m;
            }
        }
    }

    for (std::size_t k = 0; k < diag.size(); ++k) {
        acc[k] = 0;
        cursor[k] = diag[k];
    }
    for (std::size_t n = 0; n <= n_max; ++n) {
        for (std::size_t k = 0; k < diag.size(); ++k) {
            acc[k] += f[cursor[k]];
            cursor[k] = support.next(cursor[k]);
        }
        take_max(r.single_sup, r.single_sup_exact, norm(acc));
    }

    auto sums = cycle_sums(support, f);
    r.bounded_exact = true;
    for (auto i : diag) {
        if (sums[support.cycle_of(i)] != 0) {
            r.bounded_exact = false;
        }
    }
    return r;
}

} // namespace diagorb
