#ifndef DIAGORB_CONVERGENCE_HPP
#define DIAGORB_CONVERGENCE_HPP

#include "diagorb/measures.hpp"

#include <optional>
#include <vector>

namespace diagorb {

/// k -> a_k given by a finite prefix followed by a repeating block.
/// Such a sequence converges iff its repeating block is constant.
struct EventuallyPeriodic {
    std::vector<Rational> prefix;
    std::vector<Rational> block;

    Rational at(std::size_t k) const;
    bool converges() const;
};

/// A sequence of functions F_k on all of X^H, one eventually periodic
/// sequence per point, indexed by FiniteSystem::flat_index.
class FunctionSequence {
public:
    FunctionSequence(const FiniteSystem& sys, std::vector<EventuallyPeriodic> per_point);

    const FiniteSystem& system() const { return system_; }
    const EventuallyPeriodic& at(std::size_t flat) const { return per_point_.at(flat); }

    /// G_k = F_k o Phi.
    FunctionSequence compose_with_product() const;

    /// Flat indices of the points where F_k(z) fails to converge, ascending.
    std::vector<std::size_t> divergence_set() const;

private:
    FiniteSystem system_;
    std::vector<EventuallyPeriodic> per_point_;
};

/// Flat indices of Phi^{-1}A for A given by flat indices, ascending.
std::vector<std::size_t> product_preimage(const FiniteSystem& sys, const std::vector<std::size_t>& flat_set);

/// nu of a set of points of X^H; points off the support carry no mass.
Rational nu_of_points(const NuSupport& support, const std::vector<std::size_t>& flat_set);

/// mu_Delta of a set of points of X^H.
Rational mu_delta_of_points(const FiniteSystem& sys, const std::vector<std::size_t>& flat_set);

/// A point z off the diagonal with mu_Delta({z}) = 0 but mu_Delta(Phi^{-1}{z}) > 0.
/// Shows that the pullback property fails for mu_Delta alone. None exists when
/// Phi maps the diagonal into itself.
struct MuDeltaWitness {
    FinitePoint point;
    FinitePoint preimage;
    Rational preimage_mass;
};

std::optional<MuDeltaWitness> mu_delta_pullback_witness(const FiniteSystem& sys);

} // namespace diagorb

#endif
