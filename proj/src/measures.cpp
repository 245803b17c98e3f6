#include "diagorb/measures.hpp"

#include "diagorb/errors.hpp"
#include "diagorb/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace diagorb {

Rational shift_weight(std::int64_t n)
{
    auto k = static_cast<unsigned>(n < 0 ? -n : n);
    return Rational(Integer(1), 3 * pow2(k));
}

double shift_weight_double(std::int64_t n)
{
    auto k = static_cast<int>(n < 0 ? -n : n);
    return std::ldexp(1.0, -k) / 3.0;
}

Rational progression_mass(std::int64_t residue, std::size_t period)
{
    if (period == 0) {
        throw ParameterError("progression period must be positive");
    }
    const auto p = static_cast<std::int64_t>(period);
    std::int64_t r = residue % p;
    if (r < 0) {
        r += p;
    }
    // n = r + kP (k >= 0) gives 2^{P-r}/(2^P-1); n = r - kP (k >= 1) gives 2^r/(2^P-1)
    Integer num = pow2(static_cast<unsigned>(p - r)) + pow2(static_cast<unsigned>(r));
    Integer den = pow2(static_cast<unsigned>(p)) - 1;
    return Rational(num, den);
}

NuSupport::NuSupport(const FiniteSystem& sys)
    : system_(sys)
    , by_flat_(sys.product_size(), npos)
{
    const auto& space = sys.space();
    for (std::size_t x = 0; x < sys.atoms(); ++x) {
        if (space.weight(x) == 0) {
            continue;
        }
        const FinitePoint diag = sys.diagonal(x);
        std::size_t start = by_flat_[sys.flat_index(diag)];
        if (start == npos) {
            FiniteOrbit orbit = orbit_of(sys, diag);
            const std::size_t cid = cycles_.size();
            std::vector<std::size_t> members;
            for (std::size_t j = 0; j < orbit.period; ++j) {
                const std::size_t idx = atoms_.size();
                by_flat_[sys.flat_index(orbit.cycle[j])] = idx;
                atoms_.push_back(SupportAtom{orbit.cycle[j], Rational(0), {}});
                cycle_of_.push_back(cid);
                position_.push_back(j);
                members.push_back(idx);
            }
            for (std::size_t j = 0; j < orbit.period; ++j) {
                next_.push_back(members[(j + 1) % orbit.period]);
                prev_.push_back(members[(j + orbit.period - 1) % orbit.period]);
            }
            cycles_.push_back(std::move(members));
            start = cycles_.back().front();
        }
        // the diagonal point may sit anywhere on an already known cycle
        const auto& cycle = cycles_[cycle_of_[start]];
        const std::size_t period = cycle.size();
        const std::size_t offset = position_[start];
        for (std::size_t j = 0; j < period; ++j) {
            SupportAtom& a = atoms_[cycle[(offset + j) % period]];
            a.contributing_shifts.push_back(ShiftProgression{x, j, period});
            a.nu_weight += space.weight(x) * progression_mass(static_cast<std::int64_t>(j), period) / 3;
        }
    }
}

NuSupport build_nu_support(const FiniteSystem& sys)
{
    return NuSupport(sys);
}

std::size_t NuSupport::find(const FinitePoint& z) const
{
    return by_flat_[system_.flat_index(z)];
}

std::size_t NuSupport::advance(std::size_t i, std::int64_t n) const
{
    const auto& cycle = cycles_[cycle_of_[i]];
    const auto p = static_cast<std::int64_t>(cycle.size());
    std::int64_t pos = (static_cast<std::int64_t>(position_[i]) + n % p + p) % p;
    return cycle[static_cast<std::size_t>(pos)];
}

std::uint64_t NuSupport::period_lcm() const
{
    std::uint64_t l = 1;
    for (const auto& c : cycles_) {
        l = std::lcm(l, static_cast<std::uint64_t>(c.size()));
    }
    return l;
}

Rational NuSupport::shifted_mass(std::size_t i, std::int64_t s) const
{
    Rational mass = 0;
    for (const auto& c : atoms_.at(i).contributing_shifts) {
        mass += system_.space().weight(c.base) * progression_mass(static_cast<std::int64_t>(c.residue) - s, c.period) / 3;
    }
    return mass;
}

Rational NuSupport::total_weight() const
{
    Rational t = 0;
    for (const auto& a : atoms_) {
        t += a.nu_weight;
    }
    return t;
}

std::int64_t shift_from_uniform(double u)
{
    if (u < 1.0 / 3.0) {
        return 0;
    }
    double v = (u - 1.0 / 3.0) * 1.5;
    const bool negative = v >= 0.5;
    double w = negative ? 2.0 * (v - 0.5) : 2.0 * v;
    // P(|n| = k | n != 0) = 2^{-k}: smallest k with 1 - 2^{-k} > w
    std::int64_t k = 1;
    double tail = 0.5;
    while (w >= 1.0 - tail && k < 1074) {
        ++k;
        tail *= 0.5;
    }
    return negative ? -k : k;
}

std::vector<NuSample<FinitePoint>> sample_nu(const FiniteSystem& sys, std::uint64_t seed, std::size_t count)
{
    if (count == 0) {
        throw ParameterError("sample count must be at least 1");
    }
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto& w : sys.space().weights()) {
        acc += to_double(w);
        cdf.push_back(acc);
    }
    Rng rng(seed);
    std::vector<NuSample<FinitePoint>> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const std::int64_t n = shift_from_uniform(rng.uniform());
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        auto x = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
        // atoms of weight zero are never drawn
        while (sys.space().weight(x) == 0 && x > 0) {
            --x;
        }
        FinitePoint base = sys.diagonal(x);
        out.push_back({apply_product(sys, base, n), n, std::move(base)});
    }
    return out;
}

std::vector<NuSample<CirclePoint>> sample_nu(const CircleSystem& sys, std::uint64_t seed, std::size_t count)
{
    if (count == 0) {
        throw ParameterError("sample count must be at least 1");
    }
    Rng rng(seed);
    std::vector<NuSample<CirclePoint>> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const std::int64_t n = shift_from_uniform(rng.uniform());
        CirclePoint base = sys.diagonal(rng.uniform());
        out.push_back({apply_product(sys, base, n), n, std::move(base)});
    }
    return out;
}

LpExponent::LpExponent(double p)
    : p_(p)
{
    if (!(p >= 1.0)) {
        throw ParameterError("Lp exponent must satisfy p >= 1");
    }
}

std::optional<unsigned> LpExponent::as_integer() const
{
    if (is_infinite() || p_ != std::floor(p_) || p_ > 64) {
        return std::nullopt;
    }
    return static_cast<unsigned>(p_);
}

LpExponent parse_exponent(const std::string& text)
{
    if (text == "inf" || text == "infinity" || text == "Inf") {
        return LpExponent::infinity();
    }
    double p = 0.0;
    try {
        std::size_t used = 0;
        p = std::stod(text, &used);
        if (used != text.size()) {
            throw ParameterError("malformed exponent '" + text + "'");
        }
    } catch (const std::logic_error&) {
        throw ParameterError("malformed exponent '" + text + "'");
    }
    return LpExponent(p);
}

LpNorm lp_norm_nu(const NuSupport& support, std::span<const Rational> values, LpExponent p)
{
    if (values.size() != support.size()) {
        throw StateError("function table does not match the support size");
    }
    LpNorm out;
    if (p.is_infinite()) {
        Rational m = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (support.atom(i).nu_weight > 0) {
                m = std::max(m, abs(values[i]));
            }
        }
        out.exact = m;
        out.value = to_double(m);
        return out;
    }
    if (auto k = p.as_integer()) {
        Rational acc = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            Rational a = abs(values[i]);
            Rational pw = 1;
            for (unsigned e = 0; e < *k; ++e) {
                pw *= a;
            }
            acc += pw * support.atom(i).nu_weight;
        }
        if (*k == 1) {
            out.exact = acc;
        }
        out.value = std::pow(to_double(acc), 1.0 / p.value());
        return out;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += std::pow(std::fabs(to_double(values[i])), p.value()) * to_double(support.atom(i).nu_weight);
    }
    out.value = std::pow(acc, 1.0 / p.value());
    return out;
}

MonteCarloNorm lp_norm_monte_carlo(std::span<const double> sample_values, LpExponent p)
{
    MonteCarloNorm out;
    if (sample_values.empty()) {
        throw ParameterError("Monte Carlo norm needs at least one sample");
    }
    if (p.is_infinite()) {
        for (double v : sample_values) {
            out.estimate = std::max(out.estimate, std::fabs(v));
        }
        out.lower_bound_only = true;
        return out;
    }
    // Welford on |G|^p, then the delta method for the p-th root
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double v : sample_values) {
        const double y = std::pow(std::fabs(v), p.value());
        ++n;
        const double d = y - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (y - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    const double se_mean = std::sqrt(var / static_cast<double>(n));
    out.estimate = std::pow(mean, 1.0 / p.value());
    out.std_error = mean > 0.0 ? se_mean * std::pow(mean, 1.0 / p.value() - 1.0) / p.value() : 0.0;
    return out;
}

Rational nu_measure(const NuSupport& support, std::span<const std::size_t> subset)
{
    Rational m = 0;
    for (auto i : subset) {
        m += support.atom(i).nu_weight;
    }
    return m;
}

std::vector<std::size_t> preimage(const NuSupport& support, std::span<const std::size_t> subset)
{
    std::vector<std::size_t> out;
    out.reserve(subset.size());
    for (auto i : subset) {
        out.push_back(support.prev(i));
    }
    std::sort(out.begin(), out.end());
    return out;
}

SandwichCheck check_sandwich(const NuSupport& support, std::span<const std::size_t> subset)
{
    SandwichCheck c;
    c.nu_set = nu_measure(support, subset);
    auto pre = preimage(support, subset);
    c.nu_preimage = nu_measure(support, pre);
    for (auto i : subset) {
        c.nu_preimage_reweighted += support.shifted_mass(i, 1);
    }
    c.consistent = c.nu_preimage == c.nu_preimage_reweighted;
    c.holds = c.nu_set / 3 <= c.nu_preimage && c.nu_preimage <= 2 * c.nu_set;
    return c;
}

NonsingularityReport check_nonsingularity(const NuSupport& support, std::size_t trials, std::uint64_t seed)
{
    NonsingularityReport report;
    auto record = [&](const std::vector<std::size_t>& subset) {
        SandwichCheck c = check_sandwich(support, subset);
        ++report.subsets_checked;
        if (!c.holds) {
            ++report.violations;
        }
        if (!c.consistent) {
            ++report.inconsistencies;
        }
        if ((!c.holds || !c.consistent) && report.offending_subset.empty()) {
            report.offending_subset = subset;
        }
        if (c.nu_set > 0) {
            Rational ratio = c.nu_preimage / c.nu_set;
            if (!report.min_ratio || ratio < *report.min_ratio) {
                report.min_ratio = ratio;
            }
            if (!report.max_ratio || ratio > *report.max_ratio) {
                report.max_ratio = ratio;
            }
        }
    };

    std::vector<std::size_t> all(support.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    record(all);
    record({});

    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<std::size_t> subset;
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (rng.coin()) {
                subset.push_back(i);
            }
        }
        record(subset);
    }
    return report;
}

} // namespace diagorb
