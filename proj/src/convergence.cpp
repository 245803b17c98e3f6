#include "diagorb/convergence.hpp"

#include "diagorb/errors.hpp"

#include <algorithm>

namespace diagorb {

Rational EventuallyPeriodic::at(std::size_t k) const
{
    if (k < prefix.size()) {
        return prefix[k];
    }
    if (block.empty()) {
        throw StateError("eventually periodic sequence has an empty block");
    }
    return block[(k - prefix.size()) % block.size()];
}

bool EventuallyPeriodic::converges() const
{
    if (block.empty()) {
        throw StateError("eventually periodic sequence has an empty block");
    }
    return std::all_of(block.begin(), block.end(), [&](const Rational& v) { return v == block.front(); });
}

FunctionSequence::FunctionSequence(const FiniteSystem& sys, std::vector<EventuallyPeriodic> per_point)
    : system_(sys)
    , per_point_(std::move(per_point))
{
    if (per_point_.size() != system_.product_size()) {
        throw StateError("function sequence must cover every point of X^H");
    }
}

FunctionSequence FunctionSequence::compose_with_product() const
{
    std::vector<EventuallyPeriodic> g(per_point_.size());
    for (std::size_t flat = 0; flat < per_point_.size(); ++flat) {
        const FinitePoint image = apply_product(system_, system_.point_at(flat), 1);
        g[flat] = per_point_[system_.flat_index(image)];
    }
    return FunctionSequence(system_, std::move(g));
}

std::vector<std::size_t> FunctionSequence::divergence_set() const
{
    std::vector<std::size_t> out;
    for (std::size_t flat = 0; flat < per_point_.size(); ++flat) {
        if (!per_point_[flat].converges()) {
            out.push_back(flat);
        }
    }
    return out;
}

std::vector<std::size_t> product_preimage(const FiniteSystem& sys, const std::vector<std::size_t>& flat_set)
{
    std::vector<std::size_t> out;
    out.reserve(flat_set.size());
    for (auto flat : flat_set) {
        out.push_back(sys.flat_index(apply_product(sys, sys.point_at(flat), -1)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

Rational nu_of_points(const NuSupport& support, const std::vector<std::size_t>& flat_set)
{
    Rational m = 0;
    for (auto flat : flat_set) {
        const std::size_t i = support.find(support.system().point_at(flat));
        if (i != NuSupport::npos) {
            m += support.atom(i).nu_weight;
        }
    }
    return m;
}

Rational mu_delta_of_points(const FiniteSystem& sys, const std::vector<std::size_t>& flat_set)
{
    Rational m = 0;
    for (auto flat : flat_set) {
        const FinitePoint z = sys.point_at(flat);
        if (std::all_of(z.begin(), z.end(), [&](std::size_t c) { return c == z.front(); })) {
            m += sys.space().weight(z.front());
        }
    }
    return m;
}

std::optional<MuDeltaWitness> mu_delta_pullback_witness(const FiniteSystem& sys)
{
    for (std::size_t x = 0; x < sys.atoms(); ++x) {
        if (sys.space().weight(x) == 0) {
            continue;
        }
        FinitePoint diag = sys.diagonal(x);
        FinitePoint image = apply_product(sys, diag, 1);
        const bool on_diagonal =
            std::all_of(image.begin(), image.end(), [&](std::size_t c) { return c == image.front(); });
        if (!on_diagonal) {
            return MuDeltaWitness{std::move(image), std::move(diag), sys.space().weight(x)};
        }
    }
    return std::nullopt;
}

} // namespace diagorb
