#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "riskmin/contract.hpp"
#include "riskmin/credit.hpp"
#include "riskmin/grid.hpp"
#include "riskmin/market.hpp"
#include "riskmin/regression.hpp"
#include "riskmin/xva.hpp"

namespace riskmin {

// Run metadata: reproducibility inputs and artifact plumbing.
struct RunSettings {
    std::uint64_t seed = 0;
    int n_paths = 0;
    std::string output_dir = "out";
    bool cache = true;
    int threads = 1;
    int sample_paths = 10;  // scenarios exported to the plot CSVs
};

// Fully resolved engine configuration (file merged with CLI overrides).
struct EngineConfig {
    TimeGrid grid;
    MarketParams market;
    CreditParams credit;
    ContractParams contract;
    RegressionConfig regression;
    int picard_refinements = 1;
    XvaParams xva;
    RunSettings run;
};

// Command-line overrides applied on top of the configuration file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> paths;
    std::optional<int> steps;
    std::optional<std::string> output_dir;
    std::optional<int> threads;
    bool no_cache = false;
    bool strict_display = false;  // force the display convention for the debit adjustment
};

// Parses and validates a configuration document.  The schema is strict:
// unknown keys, wrong types, and out-of-range values are collected and
// reported together as a ConfigError with JSON-pointer locations.  Semantic
// validation (model bounds, grid alignment of flows) runs after the
// structural pass.
EngineConfig parse_config(const nlohmann::json& doc, const CliOverrides& overrides);

// Reads the file at `path` and parses it.  Unreadable files and JSON syntax
// errors are ConfigErrors.
EngineConfig load_config(const std::string& path, const CliOverrides& overrides);

// Canonical serialization of the effective configuration; the basis of the
// configuration hash and recorded in the manifest.
nlohmann::json effective_config(const EngineConfig& config);

// FNV-1a 64-bit hash of the canonical serialization.
std::uint64_t config_hash(const EngineConfig& config);

// Hash rendered the way artifacts and cache file names carry it.
std::string config_hash_hex(const EngineConfig& config);

}  // namespace riskmin
