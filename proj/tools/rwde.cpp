// Command-line driver: `exponents` prints the cut-exponent table for the
// configured weights, `run <experiment>` executes one registered experiment
// and persists its artifacts, `report` renders the result ledger. Exit
// codes: 0 pass, 1 statistical fail, 2 configuration error, 3 runtime or
// budget error.
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwde/config.hpp"
#include "rwde/experiments.hpp"
#include "rwde/util.hpp"

namespace {

int print_error_json(const std::string& kind, const std::string& message,
                     int code) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    j["exit_code"] = code;
    std::cout << j.dump(2) << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation laboratory for accelerated lattice random walks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, seed_flag, replicas_flag, out_flag, threads_flag;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--seed", seed_flag, "master seed override");
    app.add_option("--replicas", replicas_flag, "replica count override");
    app.add_option("--out", out_flag, "output directory override");
    app.add_option("--threads", threads_flag, "worker threads (0 = hardware)");

    CLI::App* exponents = app.add_subcommand(
        "exponents", "print kappa, drift, and the box cut-value table");
    std::string experiment;
    CLI::App* run = app.add_subcommand("run", "run one experiment");
    run->add_option("experiment", experiment, "registered experiment name")
        ->required();
    CLI::App* report =
        app.add_subcommand("report", "render the ledger as aligned text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        return print_error_json("cli", e.what(), rwde::kExitConfigError);
    }

    rwde::ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = rwde::ExperimentConfig::load(config_path);
        if (!seed_flag.empty()) cfg.set("seed", seed_flag);
        if (!replicas_flag.empty()) cfg.set("replicas", replicas_flag);
        if (!out_flag.empty()) cfg.set("out", out_flag);
        if (!threads_flag.empty()) cfg.set("threads", threads_flag);
        if (run->parsed()) cfg.set("experiment", experiment);
    } catch (const rwde::ConfigError& e) {
        return print_error_json("config", e.what(), rwde::kExitConfigError);
    }

    try {
        if (exponents->parsed()) {
            for (const std::string& line : rwde::exponents_table(cfg.weights())) {
                std::cout << line << '\n';
            }
            return rwde::kExitPass;
        }
        if (report->parsed()) {
            for (const std::string& line : rwde::render_report(cfg.out_dir())) {
                std::cout << line << '\n';
            }
            return rwde::kExitPass;
        }
        const rwde::ExperimentResult result = rwde::run_experiment(cfg);
        for (const std::string& note : result.notes) std::cout << note << '\n';
        for (const std::string& artifact : result.artifacts) {
            std::cout << "wrote " << cfg.out_dir() << "/" << artifact << '\n';
        }
        std::cout << (result.pass ? "PASS " : "FAIL ") << result.experiment
                  << " (exit " << result.exit_code << ")\n";
        return result.exit_code;
    } catch (const rwde::ConfigError& e) {
        return print_error_json("config", e.what(), rwde::kExitConfigError);
    } catch (const rwde::BudgetError& e) {
        return print_error_json("budget", e.what(), rwde::kExitRuntimeError);
    } catch (const rwde::EstimateError& e) {
        return print_error_json("estimate", e.what(), rwde::kExitRuntimeError);
    } catch (const std::exception& e) {
        return print_error_json("runtime", e.what(), rwde::kExitRuntimeError);
    }
}
