// pointer-sim — experiment runner CLI
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pointer_sim/errors.hpp"
#include "pointer_sim/experiments.hpp"
#include "pointer_sim/io.hpp"

namespace {

std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& item : raw) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw psim::ConfigError("--set expects key=value, got '" + item + "'");
        overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return overrides;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pointer-sim: two-level system in a spin environment — exact evolution, "
                 "phase-only approximation, pointer-state selection, and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> set_args;
    std::string out_dir;
    int threads = 1;

    auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
    run->add_option("config", config_path, "path to the experiment config")->required();
    run->add_option("--set", set_args, "override a config field, key=value (dots descend)");
    run->add_option("--threads", threads, "worker-thread cap (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory (overrides config)");

    auto* validate = app.add_subcommand("validate", "validate a JSON config and exit");
    validate->add_option("config", config_path, "path to the experiment config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            psim::validate_experiment_config(psim::read_json_file(config_path));
            std::cout << "ok\n";
            return psim::kExitOk;
        }
        psim::RunOptions options;
        if (!out_dir.empty()) options.output_dir = out_dir;
        options.workers = threads;
        options.overrides = parse_overrides(set_args);
        const psim::RunOutcome outcome = psim::run_experiment_file(config_path, options);
        if (outcome.exit_code != psim::kExitOk) {
            std::cerr << "error: " << outcome.message << "\n";
        } else {
            std::cout << "wrote " << (outcome.output_dir / "manifest.json").string() << "\n";
        }
        return outcome.exit_code;
    } catch (const psim::ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return psim::kExitConfigError;
    } catch (const psim::ToleranceError& err) {
        std::cerr << "tolerance error: " << err.what() << "\n";
        return psim::kExitToleranceError;
    } catch (const psim::ResourceLimitError& err) {
        std::cerr << "resource limit: " << err.what() << "\n";
        return psim::kExitResourceLimit;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
