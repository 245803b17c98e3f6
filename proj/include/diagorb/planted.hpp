#ifndef DIAGORB_PLANTED_HPP
#define DIAGORB_PLANTED_HPP

#include "diagorb/measures.hpp"
#include "diagorb/random.hpp"
#include "diagorb/sums.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace diagorb {

/// Random measure preserving system: atoms are split into blocks, every map
/// permutes each block, and each block carries its own (random) mass spread
/// evenly over its atoms.
FiniteSystem random_finite_system(Rng& rng, std::size_t max_atoms, std::size_t max_maps);

/// F as a tensor product of factor tables, if F (extended by zero off the
/// support) has that form on X^H.
std::optional<TensorObservable> try_tensor_decompose(const NuSupport& support, std::span<const Rational> f);

/// Finite system with a known transfer function: F := V - V o Phi.
struct FinitePlanted {
    NuSupport support;
    std::vector<Rational> v;
    std::vector<Rational> f;
    /// Present when F factors as f_1 (x) ... (x) f_H; otherwise F is a general support function.
    std::optional<TensorObservable> tensor;
};

/// Circle system with a known bounded transfer function V0.
struct CirclePlanted {
    CircleSystem system;
    std::function<double(const CirclePoint&)> v;
    CircleObservable f;
};

using Planted = std::variant<FinitePlanted, CirclePlanted>;

enum class PlantedKind { FiniteRandom, FiniteCyclic, Rotation };

PlantedKind parse_planted_kind(const std::string& text);

struct PlantedParams {
    // finite_random
    std::size_t max_atoms = 8;
    std::size_t max_maps = 3;
    // finite_cyclic: atoms 0..m-1 with T_i x = x + shifts[i] (mod m), uniform weights
    std::size_t atoms = 4;
    std::vector<std::size_t> shifts{1, 2};
    /// V = indicator of this point when set, otherwise random integers in [v_min, v_max]
    std::optional<FinitePoint> indicator;
    std::int64_t v_min = -5;
    std::int64_t v_max = 5;
    // rotation: V0(z) = prod_i cos 2 pi z_i
    std::vector<double> alphas;
};

/// Deterministic per seed.
Planted make_planted(PlantedKind kind, const PlantedParams& params, std::uint64_t seed);

FinitePlanted plant_finite(const FiniteSystem& sys, std::vector<Rational> v_on_support);
FinitePlanted plant_random_integer(const FiniteSystem& sys, Rng& rng, std::int64_t v_min, std::int64_t v_max);

/// (sqrt 5 - 1)/2
inline constexpr double golden_conjugate = 0.6180339887498948482;

} // namespace diagorb

#endif
