#ifndef DIAGORB_EXPERIMENT_HPP
#define DIAGORB_EXPERIMENT_HPP

#include "diagorb/planted.hpp"
#include "diagorb/sums.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace diagorb {

inline constexpr const char* tool_version = "0.1.0";

/// Unparseable or invalid experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Known stage names in execution order.
const std::vector<std::string>& stage_order();

struct Parameters {
    std::size_t n_max = 64;
    std::size_t m_max = 32;
    std::int64_t horizon = 64;
    std::string p = "inf";
    std::size_t k = 8;
    std::string subsequence_rule = "pow2_aligned";
    std::optional<std::uint64_t> seed;
    double tolerance = 1e-12;
    Rational orbit_constant = 0;
    std::size_t trials = 200;
    std::size_t samples = 1000;
    std::optional<std::vector<double>> start;
    bool mu_delta_demo = false;
};

struct FiniteExperiment {
    FiniteSystem system;
    std::optional<TensorObservable> tensor;
    /// F tabulated on the support, for planted observables without tensor form.
    std::optional<std::vector<Rational>> f_table;
    std::optional<std::vector<Rational>> v_truth;
};

struct CircleExperiment {
    CircleSystem system;
    CircleObservable f;
    std::function<double(const CirclePoint&)> v_truth;
};

struct ExperimentConfig {
    std::variant<FiniteExperiment, CircleExperiment> experiment;
    std::vector<std::string> stages;
    Parameters params;
    std::filesystem::path out_dir = ".";
    nlohmann::json echo;
};

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_max;
    std::optional<std::int64_t> horizon;
    std::optional<std::string> p;
    std::optional<double> tolerance;
    std::optional<std::vector<std::string>> stages;
    std::optional<std::filesystem::path> out_dir;
};

/// Throws ConfigError on any malformed or inconsistent field.
ExperimentConfig parse_config(const nlohmann::json& doc, const Overrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

struct RunResult {
    nlohmann::json report;
    /// 0 when every executed check passed, 1 otherwise.
    int exit_code = 0;
};

/// Runs the stages and writes report.json plus the CSV artifacts into out_dir.
RunResult run_experiment(const ExperimentConfig& config);

} // namespace diagorb

#endif
