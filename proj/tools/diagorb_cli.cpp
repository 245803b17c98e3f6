// Batch front end: diagorb --config experiment.json --out results/

#include "diagorb/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    CLI::App app{"Diagonal-orbit measures, nonconventional ergodic sums and coboundary certificates"};
    app.set_version_flag("--version", diagorb::tool_version);

    std::string config_path;
    diagorb::Overrides ov;
    std::string out_dir;
    std::string stages;
    std::uint64_t seed = 0;
    std::size_t n_max = 0;
    std::int64_t horizon = 0;
    std::string p;
    double tolerance = 0.0;

    app.add_option("--config", config_path, "experiment configuration (JSON)")->required();
    auto* out_opt = app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "random seed");
    auto* n_opt = app.add_option("--n-max", n_max, "largest N for ergodic sums");
    auto* h_opt = app.add_option("--horizon", horizon, "orbit window half-width on the circle");
    auto* p_opt = app.add_option("--p", p, "norm exponent: 1, 2 or inf");
    auto* tol_opt = app.add_option("--tolerance", tolerance, "floating-point tolerance");
    auto* st_opt = app.add_option("--stages", stages, "comma separated stage list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*out_opt) ov.out_dir = out_dir;
    if (*seed_opt) ov.seed = seed;
    if (*n_opt) ov.n_max = n_max;
    if (*h_opt) ov.horizon = horizon;
    if (*p_opt) ov.p = p;
    if (*tol_opt) ov.tolerance = tolerance;
    if (*st_opt) {
        std::vector<std::string> list;
        std::stringstream ss(stages);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) {
                list.push_back(item);
            }
        }
        ov.stages = list;
    }

    try {
        auto config = diagorb::load_config(config_path, ov);
        auto result = diagorb::run_experiment(config);
        std::cout << "verdict: " << result.report["verdict"].get<std::string>() << "\n";
        for (const auto& s : result.report["stages"]) {
            std::cout << "  " << s["name"].get<std::string>() << ": " << s["status"].get<std::string>();
            if (s.contains("reason")) {
                std::cout << " (" << s["reason"].get<std::string>() << ")";
            }
            std::cout << "\n";
        }
        return result.exit_code;
    } catch (const diagorb::ConfigError& e) {
        std::cerr << "diagorb: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "diagorb: " << e.what() << "\n";
        return 1;
    }
}
