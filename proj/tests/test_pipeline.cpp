#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "doctest.h"

#include <nlohmann/json.hpp>

#include "riskmin/config.hpp"
#include "riskmin/errors.hpp"
#include "riskmin/pipeline.hpp"

using namespace riskmin;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json pipeline_doc(const std::string& out_dir) {
    json doc = json::parse(R"({
        "grid": {"horizon": 1.0, "steps": 12},
        "market": {
            "assets": [{"s0": 100.0, "drift": 0.07, "vol": 0.2, "repo_rate": 0.02}],
            "rates": {"discount": 0.01, "funding": 0.025,
                      "collateral_lend": 0.005, "collateral_borrow": 0.015}
        },
        "credit": {
            "bank": {"kind": "constant", "value": 0.01},
            "counterparty": {"kind": "jacobi", "lambda0": 0.03, "kappa": 0.8, "theta": 0.035,
                             "lambda_min": 0.005, "lambda_max": 0.15, "rho": -0.4}
        },
        "contract": {
            "flows": [{"time": 1.0, "type": "forward", "asset": 0, "strike": 100.0, "scale": 0.75},
                      {"time": 1.0, "type": "call", "asset": 0, "strike": 100.0, "scale": 0.5}],
            "recovery_bank": 0.4, "recovery_cpty": 0.4,
            "collateral": {"alpha": 0.8, "threshold": 0.0}
        },
        "run": {"seed": 7, "paths": 4000, "sample_paths": 4}
    })");
    doc["run"]["output_dir"] = out_dir;
    return doc;
}

EngineConfig pipeline_config(const std::string& out_dir,
                             const std::function<void(json&)>& mutate = {}) {
    json doc = pipeline_doc(out_dir);
    if (mutate) mutate(doc);
    return parse_config(doc, CliOverrides{});
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

const char* kArtifacts[] = {"report.json",     "diagnostics.json", "xva_metrics.csv",
                            "bsde_summary.csv", "xva_profile.csv",  "cost_fan.csv",
                            "strategy_sample.csv"};

}  // namespace

TEST_CASE("full run writes the artifact set and passes the value identity") {
    TempDir dir("riskmin_pipe_full");
    const EngineConfig cfg = pipeline_config(dir.str());
    const PipelineOutcome out = run_pipeline(cfg, Stage::All);

    CHECK(out.exit_code == 0);
    CHECK(out.has_clean);
    CHECK(out.has_solution);
    CHECK(out.has_xva);
    CHECK(std::fabs(out.gap) <= std::max(3.0 * out.gap_se, 1e-8));

    for (const char* name : kArtifacts) CHECK(fs::exists(dir.path / name));
    CHECK(fs::exists(dir.path / "manifest.json"));

    // Stage caches carry the configuration hash in their names.
    const std::string hex = config_hash_hex(cfg);
    CHECK(fs::exists(dir.path / "cache" / (hex + ".market.rmc")));
    CHECK(fs::exists(dir.path / "cache" / (hex + ".credit.rmc")));

    const json manifest = json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest.at("cache").at("market") == "miss");
    CHECK(manifest.at("cache").at("credit") == "miss");
}

TEST_CASE("a rerun reuses the cache and reproduces the report bytes") {
    TempDir dir("riskmin_pipe_rerun");
    const EngineConfig cfg = pipeline_config(dir.str());
    const PipelineOutcome first = run_pipeline(cfg, Stage::All);
    REQUIRE(first.exit_code == 0);
    const std::string report_first = slurp(dir.path / "report.json");

    const PipelineOutcome second = run_pipeline(cfg, Stage::All);
    CHECK(second.exit_code == 0);
    CHECK(slurp(dir.path / "report.json") == report_first);
    CHECK(second.total == first.total);
    CHECK(second.gap == first.gap);

    const json manifest = json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest.at("cache").at("market") == "hit");
    CHECK(manifest.at("cache").at("credit") == "hit");
}

TEST_CASE("worker count changes no artifact byte") {
    TempDir one("riskmin_pipe_t1");
    TempDir three("riskmin_pipe_t3");
    const PipelineOutcome a = run_pipeline(pipeline_config(one.str()), Stage::All);
    const PipelineOutcome b = run_pipeline(
        pipeline_config(three.str(), [](json& d) { d["run"]["threads"] = 3; }), Stage::All);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    for (const char* name : kArtifacts) CHECK(slurp(one.path / name) == slurp(three.path / name));
}

TEST_CASE("disabling the cache writes no cache files") {
    TempDir dir("riskmin_pipe_nocache");
    const EngineConfig cfg =
        pipeline_config(dir.str(), [](json& d) { d["run"]["cache"] = false; });
    const PipelineOutcome out = run_pipeline(cfg, Stage::Simulate);
    CHECK(out.exit_code == 0);
    CHECK_FALSE(out.has_clean);
    CHECK_FALSE(out.has_xva);
    const std::string hex = config_hash_hex(cfg);
    CHECK_FALSE(fs::exists(dir.path / "cache" / (hex + ".market.rmc")));
    const json manifest = json::parse(slurp(dir.path / "manifest.json"));
    CHECK(manifest.at("cache").at("market") == "disabled");
}

TEST_CASE("early stages stop before the solver") {
    TempDir dir("riskmin_pipe_clean");
    const PipelineOutcome out = run_pipeline(pipeline_config(dir.str()), Stage::CleanValue);
    CHECK(out.exit_code == 0);
    CHECK(out.has_clean);
    CHECK_FALSE(out.has_solution);
    CHECK_FALSE(out.has_xva);
    // The report still carries the stable key set; solver sections are null.
    const json report = json::parse(slurp(dir.path / "report.json"));
    CHECK(report.contains("solver"));
    CHECK(report.at("solver").is_null());
    CHECK(report.at("adjustments").is_null());
    CHECK_FALSE(report.at("clean_value").is_null());
}

TEST_CASE("diagnose runs the invariant battery clean on a healthy setup") {
    TempDir dir("riskmin_pipe_diag");
    const PipelineOutcome out = run_pipeline(pipeline_config(dir.str()), Stage::Diagnose);
    CHECK(out.exit_code == 0);
    REQUIRE(!out.invariants.empty());
    for (const InvariantResult& inv : out.invariants) {
        INFO(inv.name, ": observed ", inv.observed, " tolerance ", inv.tolerance);
        CHECK(inv.pass);
    }
    // The battery covers the decomposition gap and the martingale checks.
    bool has_gap = false, has_cost = false;
    for (const InvariantResult& inv : out.invariants) {
        has_gap |= inv.name == "decomposition_gap";
        has_cost |= inv.name == "cost_martingale";
    }
    CHECK(has_gap);
    CHECK(has_cost);
}

TEST_CASE("a systematically biased solve fails the identity gate") {
    // A linear price basis cannot carry the option convexity through the
    // backward recursion, while the adjustment side prices the flows
    // pathwise: the decomposition gap becomes a genuine bias and the gate
    // must report it.
    TempDir dir("riskmin_pipe_gap");
    const EngineConfig cfg = pipeline_config(dir.str(), [](json& d) {
        d["solver"] = json{{"price_degree", 1}};
        d["grid"]["steps"] = 40;
        d["run"]["paths"] = 20000;
    });
    const PipelineOutcome out = run_pipeline(cfg, Stage::All);
    CHECK(out.exit_code == 4);
    CHECK(std::fabs(out.gap) > 3.0 * out.gap_se);
}

TEST_CASE("stage names parse and unknown names are rejected") {
    CHECK(parse_stage("simulate") == Stage::Simulate);
    CHECK(parse_stage("clean-value") == Stage::CleanValue);
    CHECK(parse_stage("solve") == Stage::Solve);
    CHECK(parse_stage("hedge") == Stage::Hedge);
    CHECK(parse_stage("xva") == Stage::Xva);
    CHECK(parse_stage("all") == Stage::All);
    CHECK(parse_stage("diagnose") == Stage::Diagnose);
    CHECK_THROWS_AS(parse_stage("everything"), ConfigError);
}
