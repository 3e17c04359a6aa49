// cbmm: run and compare min-max solvers from key = value configs.
//
//   cbmm run --config experiments/fig1_left.cfg --T 20000
//   cbmm compare --experiment synthetic --algorithm-a cb_min_max --algorithm-b pdg

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cbmm/harness.hpp"

namespace {

/// Registers `--key` for every config key; values land in `flags`.
void add_config_flags(CLI::App& cmd, std::map<std::string, std::string>& flags) {
    for (const auto& key : cbmm::config_keys()) {
        cmd.add_option("--" + key, flags[key], "config key '" + key + "'");
    }
}

cbmm::ConfigMap given_flags(const CLI::App& cmd, const std::map<std::string, std::string>& flags) {
    cbmm::ConfigMap out;
    for (const auto& [key, value] : flags) {
        if (cmd.count("--" + key) > 0) out[key] = value;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coin-betting min-max solvers and baselines"};
    app.require_subcommand(1);

    std::map<std::string, std::string> run_flags;
    std::string run_config;
    auto* run = app.add_subcommand("run", "run one solver and write its convergence CSV");
    run->add_option("--config", run_config, "key = value config file; flags override it");
    add_config_flags(*run, run_flags);

    std::map<std::string, std::string> cmp_flags;
    std::string cmp_config, config_a, config_b, algorithm_a, algorithm_b;
    auto* cmp = app.add_subcommand("compare", "run two solvers on one problem and merge their traces");
    cmp->add_option("--config", cmp_config, "shared config file");
    cmp->add_option("--config-a", config_a, "config file for side A (over the shared config)");
    cmp->add_option("--config-b", config_b, "config file for side B (over the shared config)");
    cmp->add_option("--algorithm-a", algorithm_a, "algorithm for side A");
    cmp->add_option("--algorithm-b", algorithm_b, "algorithm for side B");
    add_config_flags(*cmp, cmp_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cbmm::kExitConfig;
    }

    try {
        if (*run) {
            cbmm::ConfigMap m = run_config.empty() ? cbmm::ConfigMap{} : cbmm::load_config_file(run_config);
            m = cbmm::merge(std::move(m), given_flags(*run, run_flags));
            return cbmm::run_command(m, std::cout, std::cerr);
        }
        cbmm::ConfigMap shared = cmp_config.empty() ? cbmm::ConfigMap{} : cbmm::load_config_file(cmp_config);
        cbmm::ConfigMap a = config_a.empty() ? shared : cbmm::merge(shared, cbmm::load_config_file(config_a));
        cbmm::ConfigMap b = config_b.empty() ? shared : cbmm::merge(shared, cbmm::load_config_file(config_b));
        const cbmm::ConfigMap over = given_flags(*cmp, cmp_flags);
        a = cbmm::merge(std::move(a), over);
        b = cbmm::merge(std::move(b), over);
        if (!algorithm_a.empty()) a["algorithm"] = algorithm_a;
        if (!algorithm_b.empty()) b["algorithm"] = algorithm_b;
        // Side files name their own outputs; the merged file follows the shared settings.
        if (auto it = over.find("output"); it != over.end()) a["output"] = it->second;
        else if (auto s = shared.find("output"); s != shared.end()) a["output"] = s->second;
        else a.erase("output");
        return cbmm::compare_command(a, b, std::cout, std::cerr);
    } catch (...) {
        return cbmm::report_exception(std::cerr);
    }
}
