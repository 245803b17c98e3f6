#include "diagorb/experiment.hpp"

#include "diagorb/coboundary.hpp"
#include "diagorb/convergence.hpp"
#include "diagorb/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace diagorb {

using nlohmann::json;

const std::vector<std::string>& stage_order()
{
    static const std::vector<std::string> order{"support", "nonsingularity", "sums", "shifted_sums",
                                                "solve",   "komlos",         "verify", "reverse"};
    return order;
}

namespace {

// ---------------------------------------------------------------- parsing

Rational json_rational(const json& v, const std::string& what)
{
    try {
        if (v.is_string()) {
            return parse_rational(v.get<std::string>());
        }
        if (v.is_number_integer()) {
            return Rational(v.get<std::int64_t>());
        }
        if (v.is_number_unsigned()) {
            return Rational(Integer(v.get<std::uint64_t>()));
        }
        if (v.is_number_float()) {
            // shortest round-trip text, so 0.1 means 1/10
            return parse_rational(v.dump());
        }
    } catch (const ParameterError& e) {
        throw ConfigError(what + ": " + e.what());
    }
    throw ConfigError(what + " must be a number or a rational string");
}

std::vector<Rational> json_rationals(const json& v, const std::string& what)
{
    if (!v.is_array()) {
        throw ConfigError(what + " must be an array");
    }
    std::vector<Rational> out;
    for (const auto& x : v) {
        out.push_back(json_rational(x, what));
    }
    return out;
}

template <typename T>
T json_get(const json& obj, const char* key, const std::string& what)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(what + "." + key + ": " + e.what());
    }
}

FiniteSystem parse_finite_system(const json& s)
{
    if (!s.contains("atoms")) {
        throw ConfigError("finite system needs \"atoms\"");
    }
    if (!s.contains("maps")) {
        throw ConfigError("finite system needs \"maps\"");
    }
    const auto m = json_get<std::size_t>(s, "atoms", "system");
    std::vector<Rational> weights;
    if (s.contains("weights")) {
        weights = json_rationals(s.at("weights"), "system.weights");
        if (weights.size() != m) {
            throw ConfigError("system.weights must list one weight per atom");
        }
        Rational total = 0;
        for (const auto& w : weights) {
            total += w;
        }
        // float weights summing to 1 within 1e-12 are renormalised exactly
        if (total != 1 && total > 0 && abs(total - 1) <= Rational(1, 1000000000000LL)) {
            for (auto& w : weights) {
                w /= total;
            }
        }
    } else {
        weights.assign(m, m == 0 ? Rational(0) : Rational(1, static_cast<long>(m)));
    }
    const json& maps_json = s.at("maps");
    if (!maps_json.is_array() || maps_json.empty()) {
        throw ConfigError("system.maps must be a nonempty array of permutations");
    }
    std::vector<FiniteMap> maps;
    try {
        for (const auto& perm : maps_json) {
            maps.emplace_back(perm.get<std::vector<std::size_t>>());
        }
        return FiniteSystem(FiniteSpace(std::move(weights)), std::move(maps));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("system.maps: ") + e.what());
    } catch (const InvalidSystem& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
}

CircleSystem parse_circle_system(const json& s)
{
    try {
        std::vector<CircleRotation> rots;
        for (double a : s.at("alphas").get<std::vector<double>>()) {
            rots.push_back({a});
        }
        return CircleSystem(std::move(rots));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("system.alphas: ") + e.what());
    } catch (const InvalidSystem& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
}

std::vector<Rational> finite_factor(const json& spec, const FiniteSystem& sys, std::size_t coord)
{
    const std::size_t m = sys.atoms();
    const std::string what = "observable.factors[" + std::to_string(coord) + "]";
    if (!spec.is_object() || spec.size() != 1) {
        throw ConfigError(what + " must be an object with exactly one kind");
    }
    auto table_of = [&](const json& body) -> std::vector<Rational> {
        if (body.is_object() && body.contains("table")) {
            return json_rationals(body.at("table"), what);
        }
        if (body.is_object() && body.contains("indicator")) {
            auto atom = json_get<std::size_t>(body, "indicator", what);
            if (atom >= m) {
                throw ConfigError(what + ": indicator atom outside the space");
            }
            std::vector<Rational> t(m, Rational(0));
            t[atom] = 1;
            return t;
        }
        throw ConfigError(what + ": expected {\"table\": ...} or {\"indicator\": ...}");
    };

    const auto& [kind, body] = *spec.items().begin();
    std::vector<Rational> table;
    if (kind == "table") {
        table = json_rationals(body, what);
    } else if (kind == "constant") {
        table.assign(m, json_rational(body, what));
    } else if (kind == "indicator") {
        table = table_of(json{{"indicator", body}});
    } else if (kind == "planted_coboundary") {
        // g - g o T_coord
        auto g = table_of(body);
        if (g.size() != m) {
            throw ConfigError(what + ": table length differs from atom count");
        }
        table.resize(m);
        for (std::size_t x = 0; x < m; ++x) {
            table[x] = g[x] - g[sys.maps()[coord].forward(x)];
        }
    } else if (kind == "cos") {
        throw ConfigError(what + ": \"cos\" is only available on circle systems");
    } else {
        throw ConfigError(what + ": unknown factor kind '" + kind + "'");
    }
    if (table.size() != m) {
        throw ConfigError(what + ": table length differs from atom count");
    }
    return table;
}

CircleFactor circle_factor(const json& spec, const CircleSystem& sys, std::size_t coord)
{
    const std::string what = "observable.factors[" + std::to_string(coord) + "]";
    if (!spec.is_object() || spec.size() != 1) {
        throw ConfigError(what + " must be an object with exactly one kind");
    }
    const auto& [kind, body] = *spec.items().begin();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (kind == "cos") {
        double freq = body.is_object() && body.contains("frequency") ? json_get<double>(body, "frequency", what) : 1.0;
        return {[two_pi, freq](double x) { return std::cos(two_pi * freq * x); }, 1.0, "cos"};
    }
    if (kind == "constant") {
        double c = to_double(json_rational(body, what));
        return {[c](double) { return c; }, std::fabs(c), "constant"};
    }
    if (kind == "indicator") {
        auto iv = body.get<std::vector<double>>();
        if (iv.size() != 2) {
            throw ConfigError(what + ": circle indicator takes an interval [a, b)");
        }
        double a = iv[0];
        double b = iv[1];
        return {[a, b](double x) { return x >= a && x < b ? 1.0 : 0.0; }, 1.0, "indicator"};
    }
    if (kind == "planted_coboundary") {
        const double alpha = sys.rotations()[coord].alpha;
        return {[two_pi, alpha](double x) { return std::cos(two_pi * x) - std::cos(two_pi * (x + alpha)); }, 2.0,
                "planted_coboundary"};
    }
    throw ConfigError(what + ": unknown factor kind '" + kind + "'");
}

Parameters parse_parameters(const json& j)
{
    Parameters p;
    if (j.is_null()) {
        return p;
    }
    if (!j.is_object()) {
        throw ConfigError("parameters must be an object");
    }
    try {
        if (j.contains("n_max")) p.n_max = j.at("n_max").get<std::size_t>();
        if (j.contains("m_max")) p.m_max = j.at("m_max").get<std::size_t>();
        if (j.contains("horizon")) p.horizon = j.at("horizon").get<std::int64_t>();
        if (j.contains("p")) p.p = j.at("p").is_string() ? j.at("p").get<std::string>() : j.at("p").dump();
        if (j.contains("k")) p.k = j.at("k").get<std::size_t>();
        if (j.contains("subsequence_rule")) p.subsequence_rule = j.at("subsequence_rule").get<std::string>();
        if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("tolerance")) p.tolerance = j.at("tolerance").get<double>();
        if (j.contains("orbit_constant")) p.orbit_constant = json_rational(j.at("orbit_constant"), "parameters.orbit_constant");
        if (j.contains("trials")) p.trials = j.at("trials").get<std::size_t>();
        if (j.contains("samples")) p.samples = j.at("samples").get<std::size_t>();
        if (j.contains("start")) p.start = j.at("start").get<std::vector<double>>();
        if (j.contains("mu_delta_demo")) p.mu_delta_demo = j.at("mu_delta_demo").get<bool>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("parameters: ") + e.what());
    }
    return p;
}

void validate_parameters(const Parameters& p)
{
    if (p.n_max == 0) throw ConfigError("n_max must be at least 1");
    if (p.horizon <= 0) throw ConfigError("horizon must be positive");
    if (p.k == 0 || p.k > 62) throw ConfigError("k must lie in 1..62");
    if (p.samples == 0) throw ConfigError("samples must be at least 1");
    if (!(p.tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
    try {
        parse_exponent(p.p);
        parse_subsequence_rule(p.subsequence_rule);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
}

bool needs_seed(const ExperimentConfig& c)
{
    auto has = [&](const char* s) { return std::find(c.stages.begin(), c.stages.end(), s) != c.stages.end(); };
    if (has("nonsingularity")) {
        return true;
    }
    return std::holds_alternative<CircleExperiment>(c.experiment) && (has("support") || has("sums"));
}

} // namespace

ExperimentConfig parse_config(const json& doc, const Overrides& overrides)
{
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    ExperimentConfig cfg{FiniteExperiment{FiniteSystem(FiniteSpace(1), {FiniteMap::identity(1)}), {}, {}, {}},
                         {}, {}, ".", doc};
    cfg.params = parse_parameters(doc.value("parameters", json()));
    if (overrides.seed) cfg.params.seed = overrides.seed;
    if (overrides.n_max) cfg.params.n_max = *overrides.n_max;
    if (overrides.horizon) cfg.params.horizon = *overrides.horizon;
    if (overrides.p) cfg.params.p = *overrides.p;
    if (overrides.tolerance) cfg.params.tolerance = *overrides.tolerance;
    validate_parameters(cfg.params);

    if (overrides.stages) {
        cfg.stages = *overrides.stages;
    } else if (doc.contains("pipeline")) {
        try {
            cfg.stages = doc.at("pipeline").get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("pipeline: ") + e.what());
        }
    } else {
        throw ConfigError("config needs a \"pipeline\" list");
    }
    if (cfg.stages.empty()) {
        throw ConfigError("pipeline is empty");
    }
    std::set<std::string> seen;
    for (const auto& s : cfg.stages) {
        if (std::find(stage_order().begin(), stage_order().end(), s) == stage_order().end()) {
            throw ConfigError("unknown stage '" + s + "'");
        }
        if (!seen.insert(s).second) {
            throw ConfigError("stage '" + s + "' listed twice");
        }
    }

    if (overrides.out_dir) {
        cfg.out_dir = *overrides.out_dir;
    } else if (doc.contains("output") && doc.at("output").contains("dir")) {
        cfg.out_dir = json_get<std::string>(doc.at("output"), "dir", "output");
    }

    if (doc.contains("planted")) {
        const json& pj = doc.at("planted");
        PlantedParams pp;
        PlantedKind kind;
        try {
            kind = parse_planted_kind(json_get<std::string>(pj, "kind", "planted"));
            if (pj.contains("max_atoms")) pp.max_atoms = pj.at("max_atoms").get<std::size_t>();
            if (pj.contains("max_maps")) pp.max_maps = pj.at("max_maps").get<std::size_t>();
            if (pj.contains("atoms")) pp.atoms = pj.at("atoms").get<std::size_t>();
            if (pj.contains("shifts")) pp.shifts = pj.at("shifts").get<std::vector<std::size_t>>();
            if (pj.contains("alphas")) pp.alphas = pj.at("alphas").get<std::vector<double>>();
            if (pj.contains("v_range")) {
                auto r = pj.at("v_range").get<std::vector<std::int64_t>>();
                if (r.size() != 2) throw ConfigError("planted.v_range takes [lo, hi]");
                pp.v_min = r[0];
                pp.v_max = r[1];
            }
            if (pj.contains("indicator")) pp.indicator = pj.at("indicator").get<FinitePoint>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("planted: ") + e.what());
        } catch (const ParameterError& e) {
            throw ConfigError(std::string("planted: ") + e.what());
        }
        const bool random_v = kind == PlantedKind::FiniteRandom || (kind == PlantedKind::FiniteCyclic && !pp.indicator);
        if (random_v && !cfg.params.seed) {
            throw ConfigError("planted fixture with random V needs parameters.seed");
        }
        try {
            Planted planted = make_planted(kind, pp, cfg.params.seed.value_or(0));
            if (auto* fp = std::get_if<FinitePlanted>(&planted)) {
                cfg.experiment = FiniteExperiment{fp->support.system(), fp->tensor, fp->f, fp->v};
            } else {
                auto& cp = std::get<CirclePlanted>(planted);
                cfg.experiment = CircleExperiment{cp.system, cp.f, cp.v};
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("planted: ") + e.what());
        } catch (const std::logic_error& e) {
            throw ConfigError(std::string("planted: ") + e.what());
        }
    } else {
        if (!doc.contains("system")) {
            throw ConfigError("config needs \"system\" or \"planted\"");
        }
        const json& s = doc.at("system");
        if (!s.is_object()) {
            throw ConfigError("system must be an object");
        }
        const json obs = doc.value("observable", json());
        if (!obs.is_object() || !obs.contains("factors") || !obs.at("factors").is_array()) {
            throw ConfigError("observable needs a \"factors\" array");
        }
        const json& factors = obs.at("factors");
        if (s.contains("alphas")) {
            CircleSystem sys = parse_circle_system(s);
            if (factors.size() != sys.arity()) {
                throw ConfigError("observable needs one factor per rotation");
            }
            std::vector<CircleFactor> fs;
            for (std::size_t i = 0; i < factors.size(); ++i) {
                fs.push_back(circle_factor(factors[i], sys, i));
            }
            cfg.experiment = CircleExperiment{sys, CircleObservable::tensor(std::move(fs)), {}};
        } else {
            FiniteSystem sys = parse_finite_system(s);
            if (factors.size() != sys.arity()) {
                throw ConfigError("observable needs one factor per map");
            }
            std::vector<std::vector<Rational>> fs;
            for (std::size_t i = 0; i < factors.size(); ++i) {
                fs.push_back(finite_factor(factors[i], sys, i));
            }
            cfg.experiment = FiniteExperiment{sys, TensorObservable(std::move(fs)), {}, {}};
        }
    }

    if (needs_seed(cfg) && !cfg.params.seed) {
        throw ConfigError("parameters.seed is required for the sampling stages requested");
    }
    if (cfg.params.start) {
        const std::size_t arity = std::visit([](const auto& e) { return e.system.arity(); }, cfg.experiment);
        if (cfg.params.start->size() != arity) {
            throw ConfigError("parameters.start needs one coordinate per map");
        }
    }
    cfg.echo["effective_parameters"] = {
        {"n_max", cfg.params.n_max},     {"m_max", cfg.params.m_max},
        {"horizon", cfg.params.horizon}, {"p", cfg.params.p},
        {"k", cfg.params.k},             {"subsequence_rule", cfg.params.subsequence_rule},
        {"tolerance", cfg.params.tolerance}, {"stages", cfg.stages},
    };
    if (cfg.params.seed) {
        cfg.echo["effective_parameters"]["seed"] = *cfg.params.seed;
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, overrides);
}

namespace {

// ---------------------------------------------------------------- running

std::string fmt_double(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

json point_json(const FinitePoint& z)
{
    return json(z);
}

struct StageOutcome {
    std::string status = "passed";
    std::string reason;
    json result = json::object();
};

StageOutcome skipped(std::string why)
{
    return StageOutcome{"skipped", std::move(why), json::object()};
}

json certificate_json(const CoboundaryCertificate& c)
{
    json j{{"status", to_string(c.status)},
           {"residual_sup", to_string(c.residual_sup)},
           {"v_sup", to_string(c.v_sup)},
           {"v_l1", to_string(c.v_l1)}};
    json consts = json::array();
    for (const auto& k : c.per_orbit_constants) {
        consts.push_back(to_string(k));
    }
    j["per_orbit_constants"] = consts;
    if (c.witness) {
        j["witness"] = {{"cycle", c.witness->cycle},
                        {"length", c.witness->atoms.size()},
                        {"cycle_sum", to_string(c.witness->cycle_sum)}};
    }
    if (!c.diagnostic.empty()) {
        j["diagnostic"] = c.diagnostic;
    }
    return j;
}

class FiniteRun {
public:
    FiniteRun(const FiniteExperiment& e, const ExperimentConfig& cfg)
        : exp_(e)
        , cfg_(cfg)
        , support_(build_nu_support(e.system))
        , p_(parse_exponent(cfg.params.p))
    {
        f_ = exp_.f_table ? *exp_.f_table : tabulate(support_, *exp_.tensor);
    }

    StageOutcome run(const std::string& stage)
    {
        if (stage == "support") return support_stage();
        if (stage == "nonsingularity") return nonsingularity_stage();
        if (stage == "sums") return sums_stage();
        if (stage == "shifted_sums") return shifted_stage();
        if (stage == "solve") return solve_stage();
        if (stage == "komlos") return komlos_stage();
        if (stage == "verify") return verify_stage();
        return reverse_stage();
    }

private:
    const std::filesystem::path& out() const { return cfg_.out_dir; }

    std::string header_coords() const
    {
        std::string h;
        for (std::size_t i = 1; i <= support_.system().arity(); ++i) {
            h += "z" + std::to_string(i) + ",";
        }
        return h;
    }

    std::string coords(const FinitePoint& z) const
    {
        std::string s;
        for (auto c : z) {
            s += std::to_string(c) + ",";
        }
        return s;
    }

    std::size_t start_atom() const
    {
        if (!cfg_.params.start) {
            return 0;
        }
        FinitePoint z;
        for (double c : *cfg_.params.start) {
            if (c < 0 || c != std::floor(c)) {
                throw ConfigError("finite start point needs nonnegative integer coordinates");
            }
            z.push_back(static_cast<std::size_t>(c));
        }
        std::size_t i = support_.find(z);
        if (i == NuSupport::npos) {
            throw ConfigError("start point " + format_point(z) + " is off the support");
        }
        return i;
    }

    StageOutcome support_stage()
    {
        StageOutcome o;
        std::ofstream csv(out() / "support.csv");
        csv << header_coords() << "nu_weight_numerator,nu_weight_denominator\n";
        for (const auto& a : support_.atoms()) {
            csv << coords(a.point) << boost::multiprecision::numerator(a.nu_weight).str() << ","
                << boost::multiprecision::denominator(a.nu_weight).str() << "\n";
        }
        const Rational total = support_.total_weight();
        o.result = {{"atoms", support_.size()},
                    {"cycles", support_.cycles().size()},
                    {"period_lcm", support_.period_lcm()},
                    {"total_weight", to_string(total)},
                    {"tensor_form", exp_.tensor.has_value()}};
        if (cfg_.params.mu_delta_demo) {
            if (auto w = mu_delta_pullback_witness(support_.system())) {
                o.result["mu_delta_witness"] = {{"point", point_json(w->point)},
                                                {"preimage", point_json(w->preimage)},
                                                {"mu_delta_of_point", "0"},
                                                {"mu_delta_of_preimage", to_string(w->preimage_mass)}};
            } else {
                o.result["mu_delta_witness"] = nullptr;
            }
        }
        if (total != 1) {
            o.status = "failed";
            o.reason = "support weights sum to " + to_string(total);
        }
        return o;
    }

    StageOutcome nonsingularity_stage()
    {
        StageOutcome o;
        auto r = check_nonsingularity(support_, cfg_.params.trials, *cfg_.params.seed);
        o.result = {{"subsets_checked", r.subsets_checked},
                    {"violations", r.violations},
                    {"inconsistencies", r.inconsistencies},
                    {"min_ratio", r.min_ratio ? to_string(*r.min_ratio) : "none"},
                    {"max_ratio", r.max_ratio ? to_string(*r.max_ratio) : "none"}};
        if (!r.passed()) {
            o.status = "failed";
            o.reason = "sandwich violated";
            o.result["offending_subset"] = r.offending_subset;
        }
        return o;
    }

    StageOutcome sums_stage()
    {
        StageOutcome o;
        const std::size_t start = start_atom();
        auto series = ergodic_sums(support_, f_, start, cfg_.params.n_max);
        {
            std::ofstream csv(out() / "sums.csv");
            csv << "N,S_N,running_sup\n";
            for (std::size_t n = 0; n < series.values.size(); ++n) {
                csv << n + 1 << "," << to_string(series.values[n]) << "," << to_string(series.running_sup[n]) << "\n";
            }
        }
        auto diag = sup_norm_diagnostic(support_, f_, cfg_.params.n_max, p_);
        {
            std::ofstream csv(out() / "norms.csv");
            csv << "N,norm\n";
            for (std::size_t n = 0; n < diag.norms.size(); ++n) {
                csv << n + 1 << "," << fmt_double(diag.norms[n]) << "\n";
            }
        }
        o.result = {{"start", point_json(support_.atom(start).point)},
                    {"pointwise_sup", to_string(series.sup())},
                    {"norm_sup", diag.exact_sup ? json(to_string(*diag.exact_sup)) : json(diag.sup)},
                    {"slope", diag.slope},
                    {"bounded_looking", diag.bounded_looking},
                    {"bounded_exact", *diag.bounded_exact}};
        return o;
    }

    StageOutcome shifted_stage()
    {
        StageOutcome o;
        auto r = shifted_sum_condition(support_, f_, cfg_.params.n_max, cfg_.params.m_max, p_);
        o.result = {{"shifted_sup", r.shifted_sup_exact ? json(to_string(*r.shifted_sup_exact)) : json(r.shifted_sup)},
                    {"single_sup", r.single_sup_exact ? json(to_string(*r.single_sup_exact)) : json(r.single_sup)},
                    {"argmax_n", r.argmax_n},
                    {"argmax_m", r.argmax_m},
                    {"bounded_exact", r.bounded_exact}};
        return o;
    }

    const CoboundaryCertificate& certificate()
    {
        if (!cert_) {
            std::vector<Rational> consts(support_.cycles().size(), cfg_.params.orbit_constant);
            cert_ = solve_orbit(support_, f_, consts);
        }
        return *cert_;
    }

    StageOutcome solve_stage()
    {
        StageOutcome o;
        const auto& c = certificate();
        o.result = certificate_json(c);
        if (c.status == CoboundaryStatus::Coboundary) {
            std::ofstream csv(out() / "certificate.csv");
            csv << header_coords() << "V\n";
            for (std::size_t i = 0; i < support_.size(); ++i) {
                csv << coords(support_.atom(i).point) << to_string(c.V[i]) << "\n";
            }
            if (c.residual_sup != 0) {
                o.status = "failed";
                o.reason = "nonzero residual on a Coboundary certificate";
            }
        }
        return o;
    }

    StageOutcome komlos_stage()
    {
        StageOutcome o;
        auto r = komlos_construct(support_, f_, parse_subsequence_rule(cfg_.params.subsequence_rule), cfg_.params.k);
        o.result = certificate_json(r.certificate);
        if (r.trace.subsequence.empty()) {
            o.result["hypothesis"] = "unbounded sums; construction not attempted";
            return o;
        }
        json inc = json::array();
        for (const auto& x : r.trace.increments) {
            inc.push_back(to_string(x));
        }
        o.result["subsequence"] = r.trace.subsequence;
        o.result["increments"] = inc;
        o.result["sum_sup"] = to_string(r.trace.sum_sup);
        o.result["identity_exact"] = r.trace.identity_exact;
        o.result["sup_bound_holds"] = r.trace.sup_bound_holds;
        if (!r.trace.identity_exact || !r.trace.sup_bound_holds) {
            o.status = "failed";
            o.reason = "Cesaro identity or sup bound violated";
        }
        const auto& c = certificate();
        if (c.status == CoboundaryStatus::Coboundary && r.certificate.status == CoboundaryStatus::Coboundary) {
            bool agree = true;
            for (const auto& cycle : support_.cycles()) {
                const Rational shift = r.certificate.V[cycle.front()] - c.V[cycle.front()];
                for (auto i : cycle) {
                    agree = agree && r.certificate.V[i] - c.V[i] == shift;
                }
            }
            o.result["agrees_with_orbit_solver"] = agree;
            if (!agree) {
                o.status = "failed";
                o.reason = "Komlos V differs from the orbit solution by a non-constant on some orbit";
            }
        }
        return o;
    }

    StageOutcome verify_stage()
    {
        const auto& c = certificate();
        if (c.status != CoboundaryStatus::Coboundary) {
            return skipped("certificate status is " + to_string(c.status));
        }
        StageOutcome o;
        auto r = verify_certificate(support_, f_, c, cfg_.params.n_max);
        o.result = {{"residual_ok", r.residual_ok},
                    {"diagonal_residual_ok", r.diagonal_residual_ok},
                    {"telescoping_ok", r.telescoping_ok},
                    {"bound_ok", r.bound_ok},
                    {"telescoping_range", r.n_max},
                    {"sum_sup", to_string(r.sum_sup)},
                    {"twice_v_sup", to_string(2 * c.v_sup)}};
        if (!r.passed()) {
            o.status = "failed";
            o.reason = "certificate verification failed";
            if (!r.residual_failures.empty()) {
                o.result["residual_failure"] = point_json(support_.atom(r.residual_failures.front()).point);
            }
            if (r.telescoping_failure) {
                o.result["telescoping_failure"] = {
                    {"point", point_json(support_.atom(r.telescoping_failure->atom).point)},
                    {"N", r.telescoping_failure->n}};
            }
            if (r.bound_failure_n) {
                o.result["bound_failure_N"] = *r.bound_failure_n;
            }
        }
        return o;
    }

    StageOutcome reverse_stage()
    {
        const std::vector<Rational>* v = nullptr;
        std::string source;
        if (exp_.v_truth) {
            v = &*exp_.v_truth;
            source = "planted";
        } else if (certificate().status == CoboundaryStatus::Coboundary) {
            v = &certificate().V;
            source = "certificate";
        } else {
            return skipped("no bounded transfer function available");
        }
        StageOutcome o;
        auto r = reverse_direction(support_, *v, cfg_.params.n_max);
        o.result = {{"v_source", source},
                    {"v_sup", to_string(r.v_sup)},
                    {"sum_sup", to_string(r.sum_sup)},
                    {"bound", to_string(2 * r.v_sup)}};
        if (!r.holds()) {
            o.status = "failed";
            o.reason = "sup_N ||S_N|| exceeds 2||V|| at N = " + std::to_string(*r.violation_n);
        }
        return o;
    }

    const FiniteExperiment& exp_;
    const ExperimentConfig& cfg_;
    NuSupport support_;
    LpExponent p_;
    std::vector<Rational> f_;
    std::optional<CoboundaryCertificate> cert_;
};

class CircleRun {
public:
    CircleRun(const CircleExperiment& e, const ExperimentConfig& cfg)
        : exp_(e)
        , cfg_(cfg)
        , p_(parse_exponent(cfg.params.p))
    {
        start_ = cfg.params.start ? CirclePoint(*cfg.params.start) : e.system.diagonal(0.0);
        for (auto& c : start_) {
            c = wrap_unit(c);
        }
    }

    StageOutcome run(const std::string& stage)
    {
        if (stage == "support") return support_stage();
        if (stage == "sums") return sums_stage();
        if (stage == "solve") return solve_stage();
        return skipped("stage '" + stage + "' needs a finite system");
    }

private:
    StageOutcome support_stage()
    {
        StageOutcome o;
        auto draws = sample_nu(exp_.system, *cfg_.params.seed, cfg_.params.samples);
        std::size_t zero = 0;
        for (const auto& d : draws) {
            zero += d.shift == 0 ? 1 : 0;
        }
        const double n = static_cast<double>(draws.size());
        const double freq = static_cast<double>(zero) / n;
        o.result = {{"samples", draws.size()},
                    {"shift_zero_frequency", freq},
                    {"shift_zero_expected", 1.0 / 3.0},
                    {"three_sigma", 3.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n)},
                    {"note", "support of a rotation system is not enumerated; sampled only"}};
        return o;
    }

    StageOutcome sums_stage()
    {
        StageOutcome o;
        auto series = ergodic_sums(exp_.system, exp_.f, start_, cfg_.params.n_max);
        {
            std::ofstream csv(cfg_.out_dir / "sums.csv");
            csv << "N,S_N,running_sup\n";
            for (std::size_t n = 0; n < series.values.size(); ++n) {
                csv << n + 1 << "," << fmt_double(series.values[n]) << "," << fmt_double(series.running_sup[n]) << "\n";
            }
        }
        auto diag = sup_norm_diagnostic(exp_.system, exp_.f, cfg_.params.n_max, p_, *cfg_.params.seed,
                                        cfg_.params.samples);
        {
            std::ofstream csv(cfg_.out_dir / "norms.csv");
            csv << "N,norm,std_error\n";
            for (std::size_t n = 0; n < diag.norms.size(); ++n) {
                csv << n + 1 << "," << fmt_double(diag.norms[n]) << "," << fmt_double(diag.std_errors[n]) << "\n";
            }
        }
        o.result = {{"pointwise_sup", series.sup()},
                    {"norm_sup_estimate", diag.sup},
                    {"norm_is_lower_bound", p_.is_infinite()},
                    {"slope", diag.slope},
                    {"bounded_looking", diag.bounded_looking}};
        return o;
    }

    StageOutcome solve_stage()
    {
        StageOutcome o;
        auto sol = circle_partial_solver(exp_.system, exp_.f, start_, cfg_.params.horizon);
        {
            std::ofstream csv(cfg_.out_dir / "certificate.csv");
            csv << "n,";
            for (std::size_t i = 1; i <= exp_.system.arity(); ++i) {
                csv << "z" << i << ",";
            }
            csv << "V\n";
            for (std::int64_t n = -sol.window.horizon; n <= sol.window.horizon; ++n) {
                csv << n << ",";
                for (double c : sol.window.at(n)) {
                    csv << fmt_double(c) << ",";
                }
                csv << fmt_double(sol.at(n)) << "\n";
            }
        }
        o.result = {{"status", to_string(sol.status)},
                    {"horizon", sol.window.horizon},
                    {"window_sup", sol.window_sup}};
        if (exp_.v_truth) {
            double worst = 0.0;
            const double v0 = exp_.v_truth(start_);
            for (std::int64_t n = -sol.window.horizon; n <= sol.window.horizon; ++n) {
                worst = std::max(worst, std::fabs(sol.at(n) - (exp_.v_truth(sol.window.at(n)) - v0)));
            }
            o.result["planted_max_error"] = worst;
            o.result["tolerance"] = cfg_.params.tolerance;
            if (!(worst <= cfg_.params.tolerance)) {
                o.status = "failed";
                o.reason = "recovered V differs from the planted V beyond tolerance";
            }
        }
        return o;
    }

    const CircleExperiment& exp_;
    const ExperimentConfig& cfg_;
    LpExponent p_;
    CirclePoint start_;
};

} // namespace

RunResult run_experiment(const ExperimentConfig& config)
{
    std::filesystem::create_directories(config.out_dir);
    RunResult out;
    json stages = json::array();
    bool all_passed = true;

    auto drive = [&](auto& runner) {
        for (const auto& name : stage_order()) {
            if (std::find(config.stages.begin(), config.stages.end(), name) == config.stages.end()) {
                continue;
            }
            const auto t0 = std::chrono::steady_clock::now();
            StageOutcome o;
            try {
                o = runner.run(name);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                o.status = "failed";
                o.reason = e.what();
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            json s{{"name", name}, {"status", o.status}, {"result", o.result}, {"seconds", secs}};
            if (!o.reason.empty()) {
                s["reason"] = o.reason;
            }
            all_passed = all_passed && o.status != "failed";
            stages.push_back(std::move(s));
        }
    };

    if (const auto* fe = std::get_if<FiniteExperiment>(&config.experiment)) {
        FiniteRun runner(*fe, config);
        drive(runner);
    } else {
        CircleRun runner(std::get<CircleExperiment>(config.experiment), config);
        drive(runner);
    }

    out.report = {{"tool", "diagorb"},
                  {"version", tool_version},
                  {"config", config.echo},
                  {"stages", stages},
                  {"verdict", all_passed ? "passed" : "failed"}};
    out.exit_code = all_passed ? 0 : 1;
    std::ofstream(config.out_dir / "report.json") << out.report.dump(2) << "\n";
    return out;
}

} // namespace diagorb
