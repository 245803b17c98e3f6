#include "diagorb/coboundary.hpp"

#include "diagorb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diagorb {

std::string to_string(CoboundaryStatus s)
{
    switch (s) {
    case CoboundaryStatus::Coboundary:
        return "Coboundary";
    case CoboundaryStatus::NotACoboundary:
        return "NotACoboundary";
    case CoboundaryStatus::Undetermined:
        return "Undetermined";
    }
    return "Undetermined";
}

std::string to_string(SubsequenceRule r)
{
    return r == SubsequenceRule::PowersOfTwo ? "pow2" : "pow2_aligned";
}

SubsequenceRule parse_subsequence_rule(const std::string& text)
{
    if (text == "pow2") {
        return SubsequenceRule::PowersOfTwo;
    }
    if (text == "pow2_aligned") {
        return SubsequenceRule::PowersOfTwoAligned;
    }
    throw ParameterError("unknown subsequence rule '" + text + "'");
}

namespace {

void check_table(const NuSupport& support, std::span<const Rational> t, const char* what)
{
    if (t.size() != support.size()) {
        throw StateError(std::string(what) + " table does not match the support size");
    }
}

Rational sup_abs(std::span<const Rational> v)
{
    Rational m = 0;
    for (const auto& x : v) {
        m = std::max(m, abs(x));
    }
    return m;
}

Rational l1_nu(const NuSupport& support, std::span<const Rational> v)
{
    Rational s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += abs(v[i]) * support.atom(i).nu_weight;
    }
    return s;
}

/// Partial sums of F along one cycle, laid out over two periods.
struct CyclePrefix {
    std::size_t period = 0;
    /// pre[t] = sum_{u<t} F(z_{u mod P}), t = 0..2P
    std::vector<Rational> pre;
    /// acc[t] = pre[1] + ... + pre[t], t = 0..2P
    std::vector<Rational> acc;

    CyclePrefix(std::span<const Rational> f, const std::vector<std::size_t>& cycle)
        : period(cycle.size())
        , pre(2 * cycle.size() + 1)
        , acc(2 * cycle.size() + 1)
    {
        for (std::size_t t = 1; t <= 2 * period; ++t) {
            pre[t] = pre[t - 1] + f[cycle[(t - 1) % period]];
            acc[t] = acc[t - 1] + pre[t];
        }
    }

    /// sum_{j=0}^{n-1} F(z_{pos+j}) for 0 <= n <= P
    Rational partial(std::size_t pos, std::size_t n) const { return pre[pos + n] - pre[pos]; }

    /// sum_{n=1}^{r} partial(pos, n) for 0 <= r <= P
    Rational partial_total(std::size_t pos, std::size_t r) const
    {
        return acc[pos + r] - acc[pos] - Rational(static_cast<long>(r)) * pre[pos];
    }
};

Rational rational_of(std::uint64_t n)
{
    return Rational(Integer(n));
}

} // namespace

std::vector<Rational> residual(const NuSupport& support, std::span<const Rational> f, std::span<const Rational> v)
{
    check_table(support, f, "F");
    check_table(support, v, "V");
    std::vector<Rational> r(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        r[i] = f[i] - (v[i] - v[support.next(i)]);
    }
    return r;
}

CoboundaryCertificate solve_orbit(const NuSupport& support, std::span<const Rational> f,
                                  std::span<const Rational> constants)
{
    check_table(support, f, "F");
    const auto& cycles = support.cycles();
    if (!constants.empty() && constants.size() != cycles.size()) {
        throw ParameterError("need one per-orbit constant per cycle");
    }

    CoboundaryCertificate cert;
    cert.V.assign(support.size(), Rational(0));
    cert.per_orbit_constants.assign(cycles.size(), Rational(0));
    for (std::size_t c = 0; c < cycles.size(); ++c) {
        const auto& cycle = cycles[c];
        Rational sum = 0;
        for (auto i : cycle) {
            sum += f[i];
        }
        if (sum != 0) {
            if (!cert.witness) {
                cert.witness = CycleWitness{c, cycle, sum};
            }
            continue;
        }
        Rational v = constants.empty() ? Rational(0) : constants[c];
        cert.per_orbit_constants[c] = v;
        for (auto i : cycle) {
            cert.V[i] = v;
            v -= f[i];
        }
    }

    cert.residual_sup = sup_abs(residual(support, f, cert.V));
    cert.v_sup = sup_abs(cert.V);
    cert.v_l1 = l1_nu(support, cert.V);
    if (cert.witness) {
        cert.status = CoboundaryStatus::NotACoboundary;
        cert.diagnostic = "F sums to " + to_string(cert.witness->cycle_sum) + " around cycle "
                          + std::to_string(cert.witness->cycle) + " of length "
                          + std::to_string(cert.witness->atoms.size());
    } else if (cert.residual_sup == 0) {
        cert.status = CoboundaryStatus::Coboundary;
    } else {
        // unreachable with exact arithmetic; kept as a guard on the scan
        cert.status = CoboundaryStatus::Undetermined;
        cert.diagnostic = "residual " + to_string(cert.residual_sup) + " after cycle solve";
    }
    return cert;
}

std::vector<std::uint64_t> komlos_subsequence(const NuSupport& support, SubsequenceRule rule, std::size_t k_max)
{
    if (k_max == 0 || k_max > 62) {
        throw ParameterError("Komlos K must lie in 1..62");
    }
    const std::uint64_t lcm = support.period_lcm();
    std::vector<std::uint64_t> out;
    for (std::size_t k = 1; k <= k_max; ++k) {
        const std::uint64_t two_k = std::uint64_t{1} << k;
        if (rule == SubsequenceRule::PowersOfTwo) {
            out.push_back(two_k);
            continue;
        }
        std::uint64_t n = (two_k + lcm - 1) / lcm * lcm;
        if (!out.empty() && n <= out.back()) {
            n = out.back() + lcm;
        }
        out.push_back(n);
    }
    return out;
}

std::vector<Rational> cesaro_partial_sum_average(const NuSupport& support, std::span<const Rational> f,
                                                 std::uint64_t n)
{
    check_table(support, f, "F");
    if (n == 0) {
        throw ParameterError("Cesaro length must be positive");
    }
    std::vector<Rational> d(support.size());
    for (const auto& cycle : support.cycles()) {
        CyclePrefix prefix(f, cycle);
        if (prefix.pre[prefix.period] != 0) {
            throw StateError("Cesaro average of partial sums needs zero cycle sums");
        }
        const std::uint64_t p = prefix.period;
        const std::uint64_t q = n / p;
        const auto r = static_cast<std::size_t>(n % p);
        for (std::size_t pos = 0; pos < cycle.size(); ++pos) {
            // partial sums are P-periodic in n once the cycle sum vanishes
            Rational total = rational_of(q) * prefix.partial_total(pos, prefix.period) + prefix.partial_total(pos, r);
            d[cycle[pos]] = total / rational_of(n);
        }
    }
    return d;
}

KomlosResult komlos_construct(const NuSupport& support, std::span<const Rational> f, SubsequenceRule rule,
                              std::size_t k_max)
{
    check_table(support, f, "F");
    KomlosResult result;
    KomlosTrace& trace = result.trace;
    CoboundaryCertificate& cert = result.certificate;
    cert.per_orbit_constants.assign(support.cycles().size(), Rational(0));

    auto sums = cycle_sums(support, f);
    for (std::size_t c = 0; c < sums.size(); ++c) {
        if (sums[c] != 0) {
            cert.status = CoboundaryStatus::Undetermined;
            cert.witness = CycleWitness{c, support.cycles()[c], sums[c]};
            cert.diagnostic = "ergodic sums are unbounded: F sums to " + to_string(sums[c]) + " around cycle "
                              + std::to_string(c);
            return result;
        }
    }

    // sup_N ||S_N||_inf over one period of every cycle
    for (const auto& cycle : support.cycles()) {
        CyclePrefix prefix(f, cycle);
        for (std::size_t pos = 0; pos < cycle.size(); ++pos) {
            for (std::size_t n = 1; n <= cycle.size(); ++n) {
                trace.sum_sup = std::max(trace.sum_sup, abs(prefix.partial(pos, n)));
            }
        }
    }

    trace.subsequence = komlos_subsequence(support, rule, k_max);
    std::vector<Rational> v(support.size(), Rational(0));
    std::vector<Rational> running(support.size(), Rational(0));
    std::vector<Rational> correction_sum(support.size(), Rational(0));
    trace.sup_bound_holds = true;
    for (std::size_t k = 0; k < trace.subsequence.size(); ++k) {
        const std::uint64_t nk = trace.subsequence[k];
        auto d = cesaro_partial_sum_average(support, f, nk);
        trace.average_sups.push_back(sup_abs(d));
        if (trace.average_sups.back() > trace.sum_sup) {
            trace.sup_bound_holds = false;
        }
        const Rational count = rational_of(k + 1);
        std::vector<Rational> next_v(support.size());
        for (std::size_t i = 0; i < support.size(); ++i) {
            running[i] += d[i];
            next_v[i] = running[i] / count;
        }
        // (1/N_k) sum_{n=1}^{N_k} F(Phi^n z) = (1/N_k) S0_{N_k}(Phi z), with S0 periodic
        for (const auto& cycle : support.cycles()) {
            CyclePrefix prefix(f, cycle);
            const auto r = static_cast<std::size_t>(nk % prefix.period);
            for (std::size_t pos = 0; pos < cycle.size(); ++pos) {
                correction_sum[cycle[pos]] += prefix.partial((pos + 1) % prefix.period, r) / rational_of(nk);
            }
        }
        if (k > 0) {
            Rational inc = 0;
            for (std::size_t i = 0; i < support.size(); ++i) {
                inc = std::max(inc, abs(next_v[i] - v[i]));
            }
            trace.increments.push_back(inc);
        }
        v = std::move(next_v);
        trace.averages.push_back(std::move(d));
    }

    const Rational count = rational_of(trace.subsequence.size());
    trace.correction.resize(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        trace.correction[i] = correction_sum[i] / count;
    }
    auto res = residual(support, f, v);
    trace.identity_exact = true;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (res[i] != trace.correction[i]) {
            trace.identity_exact = false;
        }
    }

    cert.V = std::move(v);
    for (std::size_t c = 0; c < support.cycles().size(); ++c) {
        cert.per_orbit_constants[c] = cert.V[support.cycles()[c].front()];
    }
    cert.residual_sup = sup_abs(res);
    cert.v_sup = sup_abs(cert.V);
    cert.v_l1 = l1_nu(support, cert.V);
    if (cert.v_sup > trace.sum_sup) {
        trace.sup_bound_holds = false;
    }
    if (!trace.identity_exact) {
        cert.status = CoboundaryStatus::Undetermined;
        cert.diagnostic = "V_K - V_K o Phi differs from F by more than the Cesaro correction term";
    } else if (cert.residual_sup == 0) {
        cert.status = CoboundaryStatus::Coboundary;
    } else {
        cert.status = CoboundaryStatus::Undetermined;
        cert.diagnostic = "V_K solves the equation up to a correction of sup " + to_string(cert.residual_sup)
                          + " that vanishes as K grows";
    }
    return result;
}

VerificationReport verify_certificate(const NuSupport& support, std::span<const Rational> f,
                                      const CoboundaryCertificate& cert, std::size_t n_max)
{
    if (cert.status != CoboundaryStatus::Coboundary) {
        throw StateError("only Coboundary certificates can be verified, got " + to_string(cert.status));
    }
    check_table(support, f, "F");
    check_table(support, cert.V, "V");
    if (n_max == 0) {
        throw ParameterError("N_max must be at least 1");
    }
    const auto& v = cert.V;
    VerificationReport rep;
    rep.n_max = n_max;

    auto res = residual(support, f, v);
    for (std::size_t i = 0; i < res.size(); ++i) {
        if (res[i] != 0) {
            rep.residual_failures.push_back(i);
        }
    }
    rep.residual_ok = rep.residual_failures.empty();

    const FiniteSystem& sys = support.system();
    rep.diagonal_residual_ok = true;
    for (std::size_t x = 0; x < sys.atoms(); ++x) {
        if (sys.space().weight(x) > 0 && res[support.find(sys.diagonal(x))] != 0) {
            rep.diagonal_residual_ok = false;
        }
    }

    const Rational twice_v = 2 * sup_abs(v);
    rep.telescoping_ok = true;
    rep.bound_ok = true;
    std::vector<Rational> s(support.size(), Rational(0));
    std::vector<std::size_t> cursor(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        cursor[i] = support.next(i);
    }
    for (std::size_t n = 1; n <= n_max; ++n) {
        Rational sup_n = 0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            s[i] += f[cursor[i]];
            cursor[i] = support.next(cursor[i]);
            // cursor now sits at Phi^{n+1} z_i
            if (rep.telescoping_ok && s[i] != v[support.next(i)] - v[cursor[i]]) {
                rep.telescoping_ok = false;
                rep.telescoping_failure = TelescopingFailure{i, n};
            }
            sup_n = std::max(sup_n, abs(s[i]));
        }
        rep.sum_sup = std::max(rep.sum_sup, sup_n);
        if (rep.bound_ok && sup_n > twice_v) {
            rep.bound_ok = false;
            rep.bound_failure_n = n;
        }
    }
    return rep;
}

ReverseReport reverse_direction(const NuSupport& support, std::span<const Rational> v, std::size_t n_max)
{
    check_table(support, v, "V");
    ReverseReport rep;
    rep.f.resize(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        rep.f[i] = v[i] - v[support.next(i)];
    }
    rep.v_sup = sup_abs(v);
    auto norms = norm_series(support, rep.f, n_max, LpExponent::infinity());
    for (std::size_t n = 0; n < norms.size(); ++n) {
        const Rational& sn = *norms[n].exact;
        rep.sum_sup = std::max(rep.sum_sup, sn);
        if (!rep.violation_n && sn > 2 * rep.v_sup) {
            rep.violation_n = n + 1;
        }
    }
    return rep;
}

CircleSolution circle_partial_solver(const CircleSystem& sys, const CircleObservable& obs, const CirclePoint& z,
                                     std::int64_t horizon)
{
    CircleSolution sol;
    sol.window = orbit_of(sys, z, horizon);
    sol.values.assign(sol.window.points.size(), 0.0);
    const auto centre = static_cast<std::size_t>(horizon);
    double forward = 0.0;
    double backward = 0.0;
    for (std::int64_t n = 1; n <= horizon; ++n) {
        forward -= obs(sol.window.at(n - 1));
        backward += obs(sol.window.at(-n));
        sol.values[centre + static_cast<std::size_t>(n)] = forward;
        sol.values[centre - static_cast<std::size_t>(n)] = backward;
    }
    for (double v : sol.values) {
        sol.window_sup = std::max(sol.window_sup, std::fabs(v));
    }
    return sol;
}

} // namespace diagorb
