#pragma once

#include <string>
#include <vector>

#include "riskmin/config.hpp"
#include "riskmin/report.hpp"

namespace riskmin {

// Pipeline stages.  Each stage implies everything before it; `All` runs the
// full chain, `Diagnose` additionally evaluates the invariant battery.
enum class Stage {
    Simulate,
    CleanValue,
    Solve,
    Hedge,
    Xva,
    All,
    Diagnose,
};

// Parses a subcommand name; throws ConfigError on an unknown name.
Stage parse_stage(const std::string& name);

// Result of a pipeline run.  Artifacts are written to run.output_dir as a
// side effect; the exit code follows the documented map (0 success, 4 failed
// decomposition-gap test, 1 any other failed invariant under Diagnose).
struct PipelineOutcome {
    int exit_code = 0;
    // Filled under Diagnose: one entry per invariant, in evaluation order.
    std::vector<InvariantResult> invariants;
    // Accumulated warnings (cache misses are not warnings; ties, ridge
    // fallbacks, estimator fallbacks, and skipped nodes are).
    std::vector<std::string> warnings;
    // Headline numbers for the CLI summary; meaningful once their stage ran.
    bool has_clean = false;
    bool has_solution = false;
    bool has_xva = false;
    double clean_value = 0.0;
    double y0 = 0.0;
    double total = 0.0;
    double gap = 0.0;
    double gap_se = 0.0;
};

// Runs the stage chain on a validated configuration and writes all artifacts
// (report.json, diagnostics.json, CSVs, manifest.json) to run.output_dir.
// Stages that did not run appear as nulls / header-only files so the artifact
// set is stable.  Throws ConfigError / NumericalError; the caller maps those
// to exit codes.
PipelineOutcome run_pipeline(const EngineConfig& config, Stage stage);

}  // namespace riskmin
