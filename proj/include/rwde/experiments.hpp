#pragma once

#include <string>
#include <vector>

#include "rwde/config.hpp"
#include "rwde/stats.hpp"

namespace rwde {

// Exit codes shared by the experiment runner and the CLI.
enum ExitCode : int {
    kExitPass = 0,
    kExitStatFail = 1,
    kExitConfigError = 2,
    kExitRuntimeError = 3,
};

// Outcome of one experiment: verdict, reports, and the artifacts written.
struct ExperimentResult {
    std::string experiment;
    bool pass = false;
    int exit_code = kExitPass;
    std::vector<EstimateReport> reports;
    std::vector<std::string> notes;      // human-readable detail lines
    std::vector<std::string> artifacts;  // files written
};

// The registered experiment names, in their canonical order.
const std::vector<std::string>& experiment_names();

// Runs one named experiment and persists its artifacts under the config's
// output directory: a versioned JSON summary, an appended (deduplicated)
// CSV ledger row set, and two-column .dat series where applicable.
// Reruns with identical config bytes produce byte-identical outputs.
// Module errors surface as the mapped exit code plus an error JSON.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// The exponents table: kappa, drift, box formula for R = 0..4, and the
// minimal box radius pushing the cut value above 1. Returns printable
// lines; the CLI prints them verbatim.
std::vector<std::string> exponents_table(const Weights& w);

// Renders the ledger (if present) as aligned text for `report`.
std::vector<std::string> render_report(const std::string& out_dir);

}  // namespace rwde
