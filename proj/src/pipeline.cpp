#include "riskmin/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "riskmin/bsde.hpp"
#include "riskmin/cache.hpp"
#include "riskmin/contract.hpp"
#include "riskmin/credit.hpp"
#include "riskmin/errors.hpp"
#include "riskmin/hedging.hpp"
#include "riskmin/market.hpp"
#include "riskmin/stats.hpp"
#include "riskmin/xva.hpp"

namespace riskmin {

namespace {

// Linear order of the computation chain; All and Diagnose run the full chain.
int stage_rank(Stage stage) {
    switch (stage) {
        case Stage::Simulate: return 0;
        case Stage::CleanValue: return 1;
        case Stage::Solve: return 2;
        case Stage::Hedge: return 3;
        case Stage::Xva:
        case Stage::All:
        case Stage::Diagnose: return 4;
    }
    return 4;
}

class StageClock {
  public:
    explicit StageClock(std::map<std::string, double>& out) : out_(out) {}

    template <typename Fn>
    void run(const std::string& name, Fn&& fn) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        out_[name] = dt.count();
    }

  private:
    std::map<std::string, double>& out_;
};

std::string cache_file(const EngineConfig& config, const std::string& kind) {
    std::filesystem::path dir(config.run.output_dir);
    return (dir / "cache" / (config_hash_hex(config) + "." + kind + ".rmc")).string();
}

// ---------------------------------------------------------------------------
// Market bundle cache.  Only the physical bundle (with its density) is stored;
// the risk-neutralized training bundle is a deterministic drift shift of the
// same Brownian draws and is always regenerated.
// ---------------------------------------------------------------------------

bool market_from_cache(const EngineConfig& config, std::uint64_t hash, MarketPaths& out) {
    ColumnMap cols;
    if (!read_columns(cache_file(config, "market"), hash, cols)) return false;

    const int n_assets = static_cast<int>(config.market.assets.size());
    const int n_paths = config.run.n_paths;
    const std::size_t node_len =
        static_cast<std::size_t>(config.grid.n_nodes()) * static_cast<std::size_t>(n_paths);
    const std::size_t step_len =
        static_cast<std::size_t>(config.grid.n_steps) * static_cast<std::size_t>(n_paths);

    MarketPaths bundle;
    bundle.n_paths = n_paths;
    bundle.n_assets = n_assets;
    bundle.grid = config.grid;
    bundle.mode = DriftMode::Physical;
    bundle.seed = config.run.seed;
    bundle.spot.resize(static_cast<std::size_t>(n_assets));
    bundle.log_spot.resize(static_cast<std::size_t>(n_assets));
    bundle.dW.resize(static_cast<std::size_t>(n_assets));

    auto take = [&](const std::string& name, std::vector<double>& dst, std::size_t want) {
        auto it = cols.find(name);
        if (it == cols.end() || it->second.size() != want) return false;
        dst = std::move(it->second);
        return true;
    };

    for (int i = 0; i < n_assets; ++i) {
        const std::string tag = std::to_string(i);
        if (!take("spot" + tag, bundle.spot[static_cast<std::size_t>(i)], node_len)) return false;
        if (!take("log_spot" + tag, bundle.log_spot[static_cast<std::size_t>(i)], node_len))
            return false;
        if (!take("dW" + tag, bundle.dW[static_cast<std::size_t>(i)], step_len)) return false;
    }
    if (!take("density", bundle.density, node_len)) return false;

    out = std::move(bundle);
    return true;
}

void market_to_cache(const EngineConfig& config, std::uint64_t hash, const MarketPaths& bundle) {
    ColumnMap cols;
    for (int i = 0; i < bundle.n_assets; ++i) {
        const std::string tag = std::to_string(i);
        cols["spot" + tag] = bundle.spot[static_cast<std::size_t>(i)];
        cols["log_spot" + tag] = bundle.log_spot[static_cast<std::size_t>(i)];
        cols["dW" + tag] = bundle.dW[static_cast<std::size_t>(i)];
    }
    cols["density"] = bundle.density;
    write_columns(cache_file(config, "market"), hash, cols);
}

// ---------------------------------------------------------------------------
// Credit scenario cache.  Integer fields are stored as doubles (node indices
// and counters are far below 2^53, so the round trip is exact).
// ---------------------------------------------------------------------------

bool credit_from_cache(const EngineConfig& config, std::uint64_t hash, CreditScenarios& out) {
    ColumnMap cols;
    if (!read_columns(cache_file(config, "credit"), hash, cols)) return false;

    const int n_paths = config.run.n_paths;
    const std::size_t node_len =
        static_cast<std::size_t>(config.grid.n_nodes()) * static_cast<std::size_t>(n_paths);
    const std::size_t path_len = static_cast<std::size_t>(n_paths);

    CreditScenarios credit;
    credit.n_paths = n_paths;
    credit.grid = config.grid;

    auto take = [&](const std::string& name, std::vector<double>& dst, std::size_t want) {
        auto it = cols.find(name);
        if (it == cols.end() || it->second.size() != want) return false;
        dst = std::move(it->second);
        return true;
    };
    auto take_i32 = [&](const std::string& name, std::vector<std::int32_t>& dst,
                        std::size_t want) {
        auto it = cols.find(name);
        if (it == cols.end() || it->second.size() != want) return false;
        dst.resize(want);
        for (std::size_t p = 0; p < want; ++p) dst[p] = static_cast<std::int32_t>(it->second[p]);
        return true;
    };
    auto take_u8 = [&](const std::string& name, std::vector<std::uint8_t>& dst,
                       std::size_t want) {
        auto it = cols.find(name);
        if (it == cols.end() || it->second.size() != want) return false;
        dst.resize(want);
        for (std::size_t p = 0; p < want; ++p) dst[p] = it->second[p] != 0.0 ? 1 : 0;
        return true;
    };

    if (!take("lambda_bank", credit.lambda_bank, node_len)) return false;
    if (!take("lambda_cpty", credit.lambda_cpty, node_len)) return false;
    if (!take("hazard_bank", credit.hazard_bank, node_len)) return false;
    if (!take("hazard_cpty", credit.hazard_cpty, node_len)) return false;
    if (!take_i32("node_bank", credit.node_bank, path_len)) return false;
    if (!take_i32("node_cpty", credit.node_cpty, path_len)) return false;
    if (!take("time_bank", credit.time_bank, path_len)) return false;
    if (!take("time_cpty", credit.time_cpty, path_len)) return false;
    if (!take_i32("first_node", credit.first_node, path_len)) return false;
    if (!take_u8("first_is_cpty", credit.first_is_cpty, path_len)) return false;
    if (!take("first_time", credit.first_time, path_len)) return false;

    auto meta = cols.find("counts");
    if (meta == cols.end() || meta->second.size() != 2) return false;
    credit.tie_count = static_cast<long>(meta->second[0]);
    credit.default_count = static_cast<long>(meta->second[1]);

    out = std::move(credit);
    return true;
}

void credit_to_cache(const EngineConfig& config, std::uint64_t hash,
                     const CreditScenarios& credit) {
    ColumnMap cols;
    cols["lambda_bank"] = credit.lambda_bank;
    cols["lambda_cpty"] = credit.lambda_cpty;
    cols["hazard_bank"] = credit.hazard_bank;
    cols["hazard_cpty"] = credit.hazard_cpty;
    auto as_doubles_i32 = [](const std::vector<std::int32_t>& v) {
        std::vector<double> out(v.size());
        for (std::size_t p = 0; p < v.size(); ++p) out[p] = static_cast<double>(v[p]);
        return out;
    };
    auto as_doubles_u8 = [](const std::vector<std::uint8_t>& v) {
        std::vector<double> out(v.size());
        for (std::size_t p = 0; p < v.size(); ++p) out[p] = static_cast<double>(v[p]);
        return out;
    };
    cols["node_bank"] = as_doubles_i32(credit.node_bank);
    cols["node_cpty"] = as_doubles_i32(credit.node_cpty);
    cols["time_bank"] = credit.time_bank;
    cols["time_cpty"] = credit.time_cpty;
    cols["first_node"] = as_doubles_i32(credit.first_node);
    cols["first_is_cpty"] = as_doubles_u8(credit.first_is_cpty);
    cols["first_time"] = credit.first_time;
    cols["counts"] = {static_cast<double>(credit.tie_count),
                      static_cast<double>(credit.default_count)};
    write_columns(cache_file(config, "credit"), hash, cols);
}

void note_ridge_warnings(const std::vector<RidgeEvent>& events, const std::string& stage,
                         std::vector<std::string>& warnings) {
    if (events.empty()) return;
    warnings.push_back(stage + ": ridge fallback at " + std::to_string(events.size()) +
                       " regression node(s)");
}

double max_abs(const std::vector<double>& values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::fabs(v));
    return m;
}

}  // namespace

Stage parse_stage(const std::string& name) {
    if (name == "simulate") return Stage::Simulate;
    if (name == "clean-value") return Stage::CleanValue;
    if (name == "solve") return Stage::Solve;
    if (name == "hedge") return Stage::Hedge;
    if (name == "xva") return Stage::Xva;
    if (name == "all") return Stage::All;
    if (name == "diagnose") return Stage::Diagnose;
    throw ConfigError({"unknown subcommand '" + name +
                       "' (expected simulate, clean-value, solve, hedge, xva, all, diagnose)"});
}

PipelineOutcome run_pipeline(const EngineConfig& config, Stage stage) {
    const int rank = stage_rank(stage);
    const std::uint64_t hash = config_hash(config);
    const std::string hash_hex = config_hash_hex(config);
    const int n_threads = config.run.threads;

    std::filesystem::create_directories(std::filesystem::path(config.run.output_dir) / "cache");

    PipelineOutcome outcome;
    std::map<std::string, double> stage_seconds;
    std::map<std::string, std::string> cache_outcomes;
    StageClock clock(stage_seconds);

    const Accounts accounts = build_accounts(config.market, config.grid);

    // --- Simulation -------------------------------------------------------
    MarketPaths physical;
    CreditScenarios credit;
    clock.run("simulate", [&] {
        bool market_hit = config.run.cache && market_from_cache(config, hash, physical);
        if (!market_hit) {
            physical = simulate_assets(config.market, config.grid, config.run.n_paths,
                                       config.run.seed, DriftMode::Physical, n_threads);
            density_process(config.market, accounts, physical, n_threads);
            if (config.run.cache) market_to_cache(config, hash, physical);
        }
        cache_outcomes["market"] =
            config.run.cache ? (market_hit ? "hit" : "miss") : "disabled";

        bool credit_hit = config.run.cache && credit_from_cache(config, hash, credit);
        if (!credit_hit) {
            credit = simulate_credit(config.credit, config.grid, physical, config.run.seed,
                                     n_threads);
            if (config.run.cache) credit_to_cache(config, hash, credit);
        }
        cache_outcomes["credit"] =
            config.run.cache ? (credit_hit ? "hit" : "miss") : "disabled";
    });
    if (credit.tie_count > 0)
        outcome.warnings.push_back("simulate: " + std::to_string(credit.tie_count) +
                                   " same-node joint default(s) resolved by the seeded coin");

    ReportInputs inputs;
    inputs.config = &config;
    inputs.hash_hex = hash_hex;
    inputs.physical = &physical;
    inputs.credit = &credit;

    auto finish = [&](int exit_code) {
        outcome.exit_code = exit_code;
        const std::string dir = config.run.output_dir;
        clock.run("report", [&] {
            write_report(dir, inputs);
            write_diagnostics(dir, inputs);
            write_csvs(dir, inputs);
        });
        write_manifest(dir, inputs, stage_seconds, cache_outcomes, outcome.warnings);
        return outcome;
    };

    if (rank < 1 && stage != Stage::Diagnose) return finish(0);

    // --- Clean value, close-out state, and ledger -------------------------
    FlowAmounts flows;
    CleanValue clean;
    CloseOutPaths closeout;
    LedgerPaths ledger;
    clock.run("clean_value", [&] {
        MarketPaths training = simulate_assets(config.market, config.grid, config.run.n_paths,
                                               config.run.seed, DriftMode::RiskNeutralized,
                                               n_threads);
        flows = evaluate_flows(config.contract, config.grid, physical);
        clean = clean_value(config.contract, config.grid, accounts, training, physical,
                            config.regression);
        closeout = build_closeout(clean, flows, config.contract.collateral, config.grid,
                                  config.run.n_paths);
        ledger = assemble_ledger(config.contract, config.grid, accounts, closeout, flows, credit);
    });
    note_ridge_warnings(clean.ridge_events, "clean_value", outcome.warnings);
    if (ledger.flows_at_default > 0)
        outcome.warnings.push_back("ledger: " + std::to_string(ledger.flows_at_default) +
                                   " contract flow(s) due exactly at a default node settle "
                                   "inside the close-out claim");
    inputs.clean = &clean;
    inputs.closeout = &closeout;
    inputs.ledger = &ledger;
    outcome.has_clean = true;
    outcome.clean_value = clean.v0;

    if (rank < 2 && stage != Stage::Diagnose) return finish(0);

    // --- Backward solution ------------------------------------------------
    BsdeSolution bsde;
    GSolution gsol;
    clock.run("solve", [&] {
        bsde = solve_bsde(config.market, config.credit, config.grid, accounts, physical, credit,
                          ledger, config.regression, config.picard_refinements, n_threads);
        gsol = assemble_g_solution(bsde, ledger, credit);
    });
    note_ridge_warnings(bsde.ridge_events, "solve", outcome.warnings);
    inputs.bsde = &bsde;
    inputs.gsol = &gsol;
    outcome.has_solution = true;
    outcome.y0 = bsde.y0;

    if (rank < 3 && stage != Stage::Diagnose) return finish(0);

    // --- Hedging strategy and decomposition checks ------------------------
    HedgePaths hedge;
    FsChecks fs;
    clock.run("hedge", [&] {
        hedge = extract_strategy(config.market, config.grid, accounts, physical, credit, ledger,
                                 closeout, bsde, gsol, n_threads);
        fs = fs_checks(config.market, config.contract, config.grid, accounts, physical, credit,
                       ledger, closeout, bsde, gsol, hedge, n_threads);
    });
    inputs.hedge = &hedge;
    inputs.fs = &fs;

    if (rank < 4 && stage != Stage::Diagnose) return finish(0);

    // --- Valuation adjustments --------------------------------------------
    XvaResults xva;
    clock.run("xva", [&] {
        xva = compute_xva(config.xva, config.credit, config.contract, config.grid, accounts,
                          physical, credit, closeout, flows, bsde, hedge, n_threads);
    });
    for (const std::string& w : xva.warnings) outcome.warnings.push_back("xva: " + w);
    inputs.xva = &xva;
    outcome.has_xva = true;
    outcome.total = xva.total.value;
    outcome.gap = xva.gap.value;
    outcome.gap_se = xva.gap.se;

    // Decomposition-gap test: the replication identity must hold within
    // Monte Carlo resolution (absolute floor guards the zero-SE edge).
    const double gap_tol =
        std::max(3.0 * xva.gap.se, 1e-8 * (1.0 + std::fabs(xva.hedge_value.value)));
    const bool gap_pass = std::fabs(xva.gap.value) <= gap_tol;

    if (stage != Stage::Diagnose) return finish(gap_pass ? 0 : 4);

    // --- Invariant battery ------------------------------------------------
    std::vector<InvariantResult> battery;
    auto add = [&](const std::string& name, bool pass, double observed, double tolerance,
                   const std::string& detail) {
        battery.push_back({name, pass, observed, tolerance, detail});
    };

    const double scale = 1.0 + max_abs(ledger.target_g);

    {
        Estimate zn = mean_se(std::span<const double>(
            physical.density.data() +
                physical.idx(config.grid.n_steps, 0),
            static_cast<std::size_t>(config.run.n_paths)));
        const double tol = 3.0 * zn.se;
        add("density_terminal_mean_one", std::fabs(zn.value - 1.0) <= tol,
            std::fabs(zn.value - 1.0), tol, "|mean(Z_N) - 1|");
    }
    {
        const double diff = std::fabs(clean.v0 - clean.v0_weighted.value);
        const double tol =
            3.0 * std::sqrt(clean.v0_se * clean.v0_se + clean.v0_weighted.se * clean.v0_weighted.se);
        add("clean_value_measure_consistency", diff <= tol, diff, tol,
            "regression value vs density-weighted value");
    }
    add("ledger_assembly", ledger.decomposition_max_err <= 1e-10 * scale,
        ledger.decomposition_max_err, 1e-10 * scale, "target reassembly max error");
    add("stopped_value_roundtrip", gsol.max_roundtrip_err <= 1e-10 * scale,
        gsol.max_roundtrip_err, 1e-10 * scale, "stopped value vs realized target at the stop");
    add("zero_achieving_close_out", fs.zero_achieving_max_err <= 1e-8 * scale,
        fs.zero_achieving_max_err, 1e-8 * scale, "wealth plus settlement at the stop");
    add("cost_martingale", std::fabs(fs.worst_cost_z) <= 3.0, std::fabs(fs.worst_cost_z), 3.0,
        "worst per-step cost-increment z-score");
    add("gain_orthogonality", std::fabs(fs.worst_orthogonality_z) <= 3.0,
        std::fabs(fs.worst_orthogonality_z), 3.0,
        "worst cost-vs-traded-martingale covariance z-score");
    add("quadratic_bound", fs.quadratic_violations == 0,
        static_cast<double>(fs.quadratic_violations), 0.0,
        "paths exceeding the accumulated squared market-price-of-risk bound");
    add("cva_nonnegative", xva.cva.value >= 0.0, xva.cva.value, 0.0,
        "credit adjustment is an expectation of nonnegative terms");
    add("dva_nonnegative", xva.dva.value >= 0.0, xva.dva.value, 0.0,
        "debit adjustment is an expectation of nonnegative terms");
    if (xva.kva_enabled)
        add("kva_nonnegative", xva.kva.value >= 0.0, xva.kva.value, 0.0,
            "capital adjustment with expected shortfall floored at zero");
    add("decomposition_gap", gap_pass, std::fabs(xva.gap.value), gap_tol,
        "total minus (clean + adjustments)");

    outcome.invariants = battery;
    inputs.invariants = &outcome.invariants;

    bool other_failure = false;
    for (const InvariantResult& r : battery)
        if (!r.pass && r.name != "decomposition_gap") other_failure = true;

    return finish(!gap_pass ? 4 : (other_failure ? 1 : 0));
}

}  // namespace riskmin
