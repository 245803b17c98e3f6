#include "diagorb/planted.hpp"

#include "diagorb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace diagorb {

FiniteSystem random_finite_system(Rng& rng, std::size_t max_atoms, std::size_t max_maps)
{
    if (max_atoms == 0 || max_maps == 0) {
        throw ParameterError("random system needs at least one atom and one map");
    }
    const auto m = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(max_atoms)));
    const auto h = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(max_maps)));

    // random ordered partition of the atoms into blocks
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i - 1)))]);
    }
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < m; ++i) {
        if (blocks.empty() || rng.integer(0, 2) == 0) {
            blocks.emplace_back();
        }
        blocks.back().push_back(order[i]);
    }

    std::vector<Integer> mass(blocks.size());
    Integer total = 0;
    for (auto& b : mass) {
        b = rng.integer(1, 4);
        total += b;
    }
    std::vector<Rational> weights(m);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (auto x : blocks[b]) {
            weights[x] = Rational(mass[b], total * static_cast<long>(blocks[b].size()));
        }
    }

    std::vector<FiniteMap> maps;
    for (std::size_t i = 0; i < h; ++i) {
        std::vector<std::size_t> forward(m);
        for (const auto& block : blocks) {
            std::vector<std::size_t> image = block;
            for (std::size_t k = image.size(); k > 1; --k) {
                std::swap(image[k - 1], image[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(k - 1)))]);
            }
            for (std::size_t k = 0; k < block.size(); ++k) {
                forward[block[k]] = image[k];
            }
        }
        maps.emplace_back(std::move(forward));
    }
    return FiniteSystem(FiniteSpace(std::move(weights)), std::move(maps));
}

std::optional<TensorObservable> try_tensor_decompose(const NuSupport& support, std::span<const Rational> f)
{
    const FiniteSystem& sys = support.system();
    const std::size_t m = sys.atoms();
    const std::size_t h = sys.arity();
    if (f.size() != support.size()) {
        throw StateError("function table does not match the support size");
    }
    std::vector<Rational> full(sys.product_size(), Rational(0));
    for (std::size_t i = 0; i < support.size(); ++i) {
        full[sys.flat_index(support.atom(i).point)] = f[i];
    }
    auto pivot = std::find_if(full.begin(), full.end(), [](const Rational& v) { return v != 0; });
    if (pivot == full.end()) {
        return TensorObservable::constant(h, m, Rational(0));
    }
    const FinitePoint anchor = sys.point_at(static_cast<std::size_t>(pivot - full.begin()));
    const Rational anchor_value = *pivot;
    std::vector<std::vector<Rational>> factors(h, std::vector<Rational>(m));
    for (std::size_t i = 0; i < h; ++i) {
        FinitePoint z = anchor;
        for (std::size_t x = 0; x < m; ++x) {
            z[i] = x;
            factors[i][x] = full[sys.flat_index(z)];
            if (i > 0) {
                factors[i][x] /= anchor_value;
            }
        }
    }
    TensorObservable obs(std::move(factors));
    for (std::size_t flat = 0; flat < full.size(); ++flat) {
        if (eval_F(obs, sys.point_at(flat)) != full[flat]) {
            return std::nullopt;
        }
    }
    return obs;
}

FinitePlanted plant_finite(const FiniteSystem& sys, std::vector<Rational> v_on_support)
{
    NuSupport support = build_nu_support(sys);
    if (v_on_support.size() != support.size()) {
        throw StateError("planted V does not match the support size");
    }
    std::vector<Rational> f(support.size());
    for (std::size_t i = 0; i < support.size(); ++i) {
        f[i] = v_on_support[i] - v_on_support[support.next(i)];
    }
    auto tensor = try_tensor_decompose(support, f);
    return FinitePlanted{std::move(support), std::move(v_on_support), std::move(f), std::move(tensor)};
}

FinitePlanted plant_random_integer(const FiniteSystem& sys, Rng& rng, std::int64_t v_min, std::int64_t v_max)
{
    if (v_min > v_max) {
        throw ParameterError("empty range for planted V");
    }
    const std::size_t size = build_nu_support(sys).size();
    std::vector<Rational> v(size);
    for (auto& x : v) {
        x = Rational(rng.integer(v_min, v_max));
    }
    return plant_finite(sys, std::move(v));
}

PlantedKind parse_planted_kind(const std::string& text)
{
    if (text == "finite_random") {
        return PlantedKind::FiniteRandom;
    }
    if (text == "finite_cyclic") {
        return PlantedKind::FiniteCyclic;
    }
    if (text == "rotation") {
        return PlantedKind::Rotation;
    }
    throw ParameterError("unknown planted kind '" + text + "'");
}

Planted make_planted(PlantedKind kind, const PlantedParams& params, std::uint64_t seed)
{
    Rng rng(seed);
    switch (kind) {
    case PlantedKind::FiniteRandom: {
        FiniteSystem sys = random_finite_system(rng, params.max_atoms, params.max_maps);
        return plant_random_integer(sys, rng, params.v_min, params.v_max);
    }
    case PlantedKind::FiniteCyclic: {
        if (params.atoms == 0 || params.shifts.empty()) {
            throw ParameterError("cyclic fixture needs atoms >= 1 and at least one shift");
        }
        std::vector<FiniteMap> maps;
        for (auto s : params.shifts) {
            maps.push_back(FiniteMap::cyclic_shift(params.atoms, s % params.atoms));
        }
        FiniteSystem sys(FiniteSpace(params.atoms), std::move(maps));
        if (!params.indicator) {
            return plant_random_integer(sys, rng, params.v_min, params.v_max);
        }
        const std::size_t size = build_nu_support(sys).size();
        std::vector<Rational> v(size, Rational(0));
        const std::size_t at = build_nu_support(sys).find(*params.indicator);
        if (at == NuSupport::npos) {
            throw ParameterError("indicator point " + format_point(*params.indicator) + " is off the support");
        }
        v[at] = 1;
        return plant_finite(sys, std::move(v));
    }
    case PlantedKind::Rotation: {
        std::vector<double> alphas = params.alphas.empty() ? std::vector<double>{golden_conjugate} : params.alphas;
        std::vector<CircleRotation> rotations;
        for (double a : alphas) {
            rotations.push_back({a});
        }
        CircleSystem sys(std::move(rotations));
        auto v0 = [](const CirclePoint& z) {
            double v = 1.0;
            for (double x : z) {
                v *= std::cos(2.0 * std::numbers::pi * x);
            }
            return v;
        };
        CircleObservable f;
        if (alphas.size() == 1) {
            const double a = alphas.front();
            f = CircleObservable::tensor({CircleFactor{
                [a](double x) { return std::cos(2.0 * std::numbers::pi * x) - std::cos(2.0 * std::numbers::pi * (x + a)); },
                2.0, "planted_coboundary"}});
        } else {
            f = CircleObservable::general(
                [sys, v0](const CirclePoint& z) { return v0(z) - v0(apply_product(sys, z, 1)); }, 2.0,
                "planted_coboundary");
        }
        return CirclePlanted{std::move(sys), v0, std::move(f)};
    }
    }
    throw ParameterError("unknown planted kind");
}

} // namespace diagorb
