#include "diagorb/systems.hpp"

#include "diagorb/errors.hpp"

#include <cmath>
#include <set>

namespace diagorb {

FiniteSpace::FiniteSpace(std::size_t m)
    : FiniteSpace(std::vector<Rational>(m, m == 0 ? Rational(0) : Rational(1, static_cast<long>(m))))
{
}

FiniteSpace::FiniteSpace(std::vector<Rational> weights, std::vector<std::string> labels)
    : weights_(std::move(weights))
    , labels_(std::move(labels))
{
    if (weights_.empty()) {
        throw InvalidSystem("finite space needs at least one atom");
    }
    Rational total = 0;
    for (const auto& w : weights_) {
        if (w < 0) {
            throw InvalidSystem("negative atom weight " + to_string(w));
        }
        total += w;
    }
    if (total != 1) {
        throw InvalidSystem("atom weights sum to " + to_string(total) + ", not 1");
    }
    if (labels_.empty()) {
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            labels_.push_back(std::to_string(i));
        }
    }
    if (labels_.size() != weights_.size()) {
        throw InvalidSystem("label count differs from atom count");
    }
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
        throw InvalidSystem("atom labels are not unique");
    }
}

namespace {

std::vector<std::size_t> invert_permutation(const std::vector<std::size_t>& forward)
{
    const std::size_t m = forward.size();
    std::vector<std::size_t> inverse(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        if (forward[i] >= m || inverse[forward[i]] != m) {
            throw InvalidSystem("map is not a permutation of 0.." + std::to_string(m - 1));
        }
        inverse[forward[i]] = i;
    }
    return inverse;
}

} // namespace

FiniteMap::FiniteMap(std::vector<std::size_t> forward)
    : forward_(std::move(forward))
    , inverse_(invert_permutation(forward_))
{
}

FiniteMap::FiniteMap(std::vector<std::size_t> forward, std::vector<std::size_t> inverse)
    : forward_(std::move(forward))
    , inverse_(std::move(inverse))
{
    if (invert_permutation(forward_) != inverse_) {
        throw InvalidSystem("inverse table does not invert the forward table");
    }
}

FiniteMap FiniteMap::cyclic_shift(std::size_t m, std::size_t shift)
{
    std::vector<std::size_t> f(m);
    for (std::size_t i = 0; i < m; ++i) {
        f[i] = (i + shift) % m;
    }
    return FiniteMap(std::move(f));
}

FiniteMap FiniteMap::identity(std::size_t m)
{
    return cyclic_shift(m, 0);
}

std::size_t FiniteMap::cycle_length(std::size_t x) const
{
    std::size_t len = 1;
    for (std::size_t y = forward_.at(x); y != x; y = forward_[y]) {
        ++len;
    }
    return len;
}

std::size_t FiniteMap::power(std::size_t x, std::int64_t n) const
{
    const auto len = static_cast<std::int64_t>(cycle_length(x));
    std::int64_t r = n % len;
    if (r < 0) {
        r += len;
    }
    // forward steps only: T^{-k} = T^{len-k} on this cycle
    for (std::int64_t k = 0; k < r; ++k) {
        x = forward_[x];
    }
    return x;
}

FiniteSystem::FiniteSystem(FiniteSpace space, std::vector<FiniteMap> maps)
    : space_(std::move(space))
    , maps_(std::move(maps))
{
    if (maps_.empty()) {
        throw InvalidSystem("a system needs at least one map");
    }
    for (std::size_t i = 0; i < maps_.size(); ++i) {
        const auto& t = maps_[i];
        if (t.size() != space_.size()) {
            throw InvalidSystem("map " + std::to_string(i) + " acts on " + std::to_string(t.size())
                                + " atoms, space has " + std::to_string(space_.size()));
        }
        for (std::size_t x = 0; x < t.size(); ++x) {
            if (space_.weight(t.forward(x)) != space_.weight(x)) {
                throw InvalidSystem("map " + std::to_string(i) + " does not preserve the weight of atom "
                                    + std::to_string(x));
            }
        }
    }
}

std::size_t FiniteSystem::product_size() const
{
    std::size_t n = 1;
    for (std::size_t i = 0; i < arity(); ++i) {
        n *= atoms();
    }
    return n;
}

void FiniteSystem::validate(const FinitePoint& z) const
{
    if (z.size() != arity()) {
        throw InvalidPoint("point has " + std::to_string(z.size()) + " coordinates, system has "
                           + std::to_string(arity()) + " maps");
    }
    for (auto c : z) {
        if (c >= atoms()) {
            throw InvalidPoint("coordinate " + std::to_string(c) + " outside space of "
                               + std::to_string(atoms()) + " atoms");
        }
    }
}

std::size_t FiniteSystem::flat_index(const FinitePoint& z) const
{
    validate(z);
    std::size_t idx = 0;
    for (auto c : z) {
        idx = idx * atoms() + c;
    }
    return idx;
}

FinitePoint FiniteSystem::point_at(std::size_t flat) const
{
    if (flat >= product_size()) {
        throw InvalidPoint("flat index " + std::to_string(flat) + " outside X^H");
    }
    FinitePoint z(arity());
    for (std::size_t i = arity(); i-- > 0;) {
        z[i] = flat % atoms();
        flat /= atoms();
    }
    return z;
}

CircleSystem::CircleSystem(std::vector<CircleRotation> rotations)
    : rotations_(std::move(rotations))
{
    if (rotations_.empty()) {
        throw InvalidSystem("a system needs at least one rotation");
    }
    for (const auto& r : rotations_) {
        if (!(r.alpha >= 0.0 && r.alpha < 1.0)) {
            throw InvalidSystem("rotation angle must lie in [0,1)");
        }
    }
}

void CircleSystem::validate(const CirclePoint& z) const
{
    if (z.size() != arity()) {
        throw InvalidPoint("point has " + std::to_string(z.size()) + " coordinates, system has "
                           + std::to_string(arity()) + " rotations");
    }
    for (double c : z) {
        if (!(c >= 0.0 && c < 1.0)) {
            throw InvalidPoint("circle coordinate outside [0,1)");
        }
    }
}

double wrap_unit(double x)
{
    double r = x - std::floor(x);
    // floor can round r up to exactly 1 for tiny negative x
    return r >= 1.0 ? 0.0 : r;
}

bool same_point(const CirclePoint& a, const CirclePoint& b, double tol)
{
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = std::fabs(wrap_unit(a[i]) - wrap_unit(b[i]));
        if (std::min(d, 1.0 - d) > tol) {
            return false;
        }
    }
    return true;
}

FinitePoint apply_product(const FiniteSystem& sys, const FinitePoint& z, std::int64_t n)
{
    sys.validate(z);
    FinitePoint out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = sys.maps()[i].power(z[i], n);
    }
    return out;
}

CirclePoint apply_product(const CircleSystem& sys, const CirclePoint& z, std::int64_t n)
{
    sys.validate(z);
    CirclePoint out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        double shift = wrap_unit(std::fmod(static_cast<double>(n) * sys.rotations()[i].alpha, 1.0));
        out[i] = wrap_unit(z[i] + shift);
    }
    return out;
}

FiniteOrbit orbit_of(const FiniteSystem& sys, const FinitePoint& z)
{
    sys.validate(z);
    FiniteOrbit orbit;
    orbit.cycle.push_back(z);
    FinitePoint w = apply_product(sys, z, 1);
    while (w != z) {
        orbit.cycle.push_back(w);
        w = apply_product(sys, w, 1);
    }
    orbit.period = orbit.cycle.size();
    return orbit;
}

CircleWindow orbit_of(const CircleSystem& sys, const CirclePoint& z, std::int64_t horizon)
{
    if (horizon <= 0) {
        throw ParameterError("orbit horizon must be positive");
    }
    sys.validate(z);
    CircleWindow win;
    win.horizon = horizon;
    win.points.reserve(static_cast<std::size_t>(2 * horizon + 1));
    for (std::int64_t n = -horizon; n <= horizon; ++n) {
        win.points.push_back(apply_product(sys, z, n));
    }
    return win;
}

std::string format_point(const FinitePoint& z)
{
    std::string s = "(";
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (i) {
            s += ",";
        }
        s += std::to_string(z[i]);
    }
    return s + ")";
}

} // namespace diagorb
