#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"

#include <nlohmann/json.hpp>

#include "riskmin/config.hpp"
#include "riskmin/errors.hpp"

using namespace riskmin;
using nlohmann::json;

namespace {

json base_doc() {
    return json::parse(R"({
        "grid": {"horizon": 1.0, "steps": 20},
        "market": {
            "assets": [{"s0": 100.0, "drift": 0.05, "vol": 0.2, "repo_rate": 0.02}],
            "rates": {"discount": 0.01, "funding": 0.025,
                      "collateral_lend": 0.005, "collateral_borrow": 0.015}
        },
        "credit": {
            "bank": {"kind": "constant", "value": 0.01},
            "counterparty": {"kind": "jacobi", "lambda0": 0.03, "kappa": 0.8, "theta": 0.035,
                             "lambda_min": 0.005, "lambda_max": 0.15, "rho": -0.4}
        },
        "contract": {
            "flows": [{"time": 1.0, "type": "call", "asset": 0, "strike": 100.0, "scale": -1.0}],
            "recovery_bank": 0.4, "recovery_cpty": 0.4,
            "collateral": {"alpha": 0.8, "threshold": 0.0}
        },
        "run": {"seed": 7, "paths": 1000}
    })");
}

bool reports(const ConfigError& err, const std::string& needle) {
    for (const std::string& p : err.problems())
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

// Parses a mutated document and returns the collected problems.
template <typename Mutate>
ConfigError capture(Mutate mutate) {
    json doc = base_doc();
    mutate(doc);
    try {
        parse_config(doc, CliOverrides{});
    } catch (const ConfigError& err) {
        return err;
    }
    throw std::runtime_error("expected the configuration to be rejected");
}

}  // namespace

TEST_CASE("well-formed configuration parses into the engine model") {
    const EngineConfig cfg = parse_config(base_doc(), CliOverrides{});
    CHECK(cfg.grid.n_steps == 20);
    CHECK(cfg.grid.horizon == 1.0);
    CHECK(cfg.market.assets.size() == 1);
    CHECK(cfg.market.assets[0].s0 == 100.0);
    CHECK(cfg.market.assets[0].vol.kind == Coefficient::Kind::Constant);
    CHECK(cfg.credit.bank.kind == IntensityParams::Kind::Constant);
    CHECK(cfg.credit.counterparty.kind == IntensityParams::Kind::Jacobi);
    CHECK(cfg.credit.counterparty.rho == -0.4);
    CHECK(cfg.contract.flows.size() == 1);
    CHECK(cfg.contract.flows[0].kind == FlowSpec::Kind::Call);
    CHECK(cfg.contract.collateral.alpha == 0.8);
    CHECK(cfg.run.seed == 7);
    CHECK(cfg.run.n_paths == 1000);
    // Defaults for the optional sections.
    CHECK(cfg.regression.price_degree == 3);
    CHECK(cfg.picard_refinements == 1);
    CHECK(cfg.xva.cva_estimator == CvaEstimator::Intensity);
    CHECK(cfg.xva.fva_estimator == FvaEstimator::Hedge);
    CHECK_FALSE(cfg.xva.strict_display);
    CHECK(cfg.run.cache);
    CHECK(cfg.run.threads == 1);
}

TEST_CASE("unknown keys are rejected with their location") {
    ConfigError err = capture([](json& d) { d["grd"] = 1; });
    CHECK(reports(err, "unknown key at /grd"));

    err = capture([](json& d) { d["market"]["assets"][0]["spot"] = 1.0; });
    CHECK(reports(err, "unknown key at /market/assets/0/spot"));

    // A jacobi entry must not carry the constant-intensity value.
    err = capture([](json& d) { d["credit"]["counterparty"]["value"] = 0.1; });
    CHECK(reports(err, "/credit/counterparty/value"));

    // Fixed flows have neither asset nor strike.
    err = capture([](json& d) {
        d["contract"]["flows"][0] = json{{"time", 1.0}, {"type", "fixed"},
                                         {"strike", 5.0}, {"scale", 1.0}};
    });
    CHECK(reports(err, "unknown key at /contract/flows/0/strike"));
}

TEST_CASE("all structural defects are reported in one pass") {
    const ConfigError err = capture([](json& d) {
        d["grid"]["steps"] = "twenty";
        d["run"]["cache"] = 1;
        d["market"]["rates"].erase("funding");
    });
    CHECK(err.problems().size() >= 3);
    CHECK(reports(err, "expected an integer at /grid/steps"));
    CHECK(reports(err, "expected a boolean at /run/cache"));
    CHECK(reports(err, "missing required key /market/rates/funding"));
}

TEST_CASE("missing required sections are reported") {
    const ConfigError err = capture([](json& d) { d.erase("credit"); });
    CHECK(reports(err, "missing required key /credit"));
}

TEST_CASE("range violations are rejected") {
    ConfigError err = capture([](json& d) { d["run"]["paths"] = 1; });
    CHECK(reports(err, "/run/paths must be at least 2"));

    err = capture([](json& d) { d["solver"] = json{{"picard_refinements", 17}}; });
    CHECK(reports(err, "/solver/picard_refinements"));

    err = capture([](json& d) { d["solver"] = json{{"condition_threshold", 0.5}}; });
    CHECK(reports(err, "/solver/condition_threshold"));

    err = capture([](json& d) {
        d["xva"] = json{{"kva", {{"enabled", true}, {"alpha", 1.2}}}};
    });
    CHECK(reports(err, "/xva/kva/alpha"));

    err = capture([](json& d) {
        d["xva"] = json{{"kva", {{"enabled", true}, {"horizon", 0.07}}}};
    });
    CHECK(reports(err, "/xva/kva/horizon must sit on the time grid"));

    err = capture([](json& d) {
        d["xva"] = json{{"two_step", {{"enabled", true}, {"inner_paths", 1}}}};
    });
    CHECK(reports(err, "/xva/two_step/inner_paths"));

    err = capture([](json& d) { d["run"]["seed"] = -3; });
    CHECK(reports(err, "/run/seed must be non-negative"));
}

TEST_CASE("semantic model validation runs after the structural pass") {
    // Flow time off the grid is caught by the contract validator.
    json doc = base_doc();
    doc["contract"]["flows"][0]["time"] = 0.33;
    CHECK_THROWS_AS(parse_config(doc, CliOverrides{}), ConfigError);

    // Rates beyond the model bound are caught by the market validator.
    doc = base_doc();
    doc["market"]["rates"]["funding"] = 0.5;
    const ConfigError err = capture([](json& d) { d["market"]["rates"]["funding"] = 0.5; });
    CHECK(reports(err, "market.rates.funding"));
}

TEST_CASE("command-line overrides join the configuration") {
    CliOverrides ov;
    ov.seed = 99;
    ov.paths = 4096;
    ov.steps = 25;
    ov.output_dir = std::string("elsewhere");
    ov.threads = 3;
    ov.no_cache = true;
    ov.strict_display = true;
    const EngineConfig cfg = parse_config(base_doc(), ov);
    CHECK(cfg.run.seed == 99);
    CHECK(cfg.run.n_paths == 4096);
    CHECK(cfg.grid.n_steps == 25);
    CHECK(cfg.run.output_dir == "elsewhere");
    CHECK(cfg.run.threads == 3);
    CHECK_FALSE(cfg.run.cache);
    CHECK(cfg.xva.strict_display);

    // Overrides are range-checked like file values.
    CliOverrides bad;
    bad.paths = 1;
    CHECK_THROWS_AS(parse_config(base_doc(), bad), ConfigError);
}

TEST_CASE("effective configuration round-trips through the parser") {
    const EngineConfig cfg = parse_config(base_doc(), CliOverrides{});
    const json canon = effective_config(cfg);
    const EngineConfig again = parse_config(canon, CliOverrides{});
    CHECK(effective_config(again).dump() == canon.dump());
    CHECK(config_hash(again) == config_hash(cfg));
}

TEST_CASE("configuration hash tracks substance and ignores plumbing") {
    const EngineConfig cfg = parse_config(base_doc(), CliOverrides{});

    // Worker count, cache policy, and artifact location leave the hash alone.
    CliOverrides plumbing;
    plumbing.threads = 4;
    plumbing.output_dir = std::string("elsewhere");
    plumbing.no_cache = true;
    CHECK(config_hash(parse_config(base_doc(), plumbing)) == config_hash(cfg));

    // Substantive changes move it.
    CliOverrides seed;
    seed.seed = 8;
    CHECK(config_hash(parse_config(base_doc(), seed)) != config_hash(cfg));

    json doc = base_doc();
    doc["market"]["assets"][0]["vol"] = 0.25;
    CHECK(config_hash(parse_config(doc, CliOverrides{})) != config_hash(cfg));

    CHECK(config_hash_hex(cfg).size() == 16);
}

TEST_CASE("file loading reports unreadable and malformed input") {
    try {
        load_config("/nonexistent/nowhere.json", CliOverrides{});
        FAIL("expected a configuration error");
    } catch (const ConfigError& err) {
        CHECK(reports(err, "cannot read configuration file"));
    }

    const std::string path = "/tmp/riskmin_bad_config.json";
    {
        std::ofstream out(path);
        out << "{not json";
    }
    try {
        load_config(path, CliOverrides{});
        FAIL("expected a configuration error");
    } catch (const ConfigError& err) {
        CHECK(reports(err, "not valid JSON"));
    }
    std::remove(path.c_str());

    const std::string good = "/tmp/riskmin_good_config.json";
    {
        std::ofstream out(good);
        out << base_doc().dump(2);
    }
    const EngineConfig cfg = load_config(good, CliOverrides{});
    CHECK(cfg.run.seed == 7);
    std::remove(good.c_str());
}
