#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmin/grid.hpp"

namespace riskmin {

// Volatility floor applied wherever a diffusion coefficient divides.
inline constexpr double kSigmaFloor = 1e-8;

// Scalar state-dependent coefficient, either a constant or affine in the
// log-spot: value(x) = base + slope * (x - log_ref) with x = ln S.
struct Coefficient {
    enum class Kind { Constant, AffineLog };
    Kind kind = Kind::Constant;
    double base = 0.0;
    double slope = 0.0;
    double log_ref = 0.0;  // expansion point, ln of the initial spot

    double at(double log_spot) const {
        return (kind == Kind::Constant) ? base : base + slope * (log_spot - log_ref);
    }
};

// One traded asset: initial spot, physical drift, volatility, and the repo
// rate of its financing account.
struct AssetSpec {
    double s0 = 100.0;
    Coefficient drift;        // physical drift mu(x)
    Coefficient vol;          // volatility sigma(x)
    PiecewiseRate repo_rate;  // rate r^i of the asset's repo account B^i
};

// Deterministic rate curves of the four cash accounts.
struct RateSet {
    PiecewiseRate funding;            // r^f, the strategy's funding account
    PiecewiseRate discount;           // r, the valuation discount rate
    PiecewiseRate collateral_lend;    // remuneration when the desk has posted (C < 0)
    PiecewiseRate collateral_borrow;  // remuneration when the desk holds margin (C >= 0)
};

// Hard bounds the model promises: every rate stays within [-rate, rate] and
// every market price of risk within [-market_price_of_risk, market_price_of_risk].
struct ModelBounds {
    double rate = 0.1;
    double market_price_of_risk = 1.0;
};

struct MarketParams {
    std::vector<AssetSpec> assets;
    RateSet rates;
    ModelBounds bounds;
};

// Deterministic accounts and node-sampled rates, shared by all downstream
// stages.  Accounts use the left-point convention of PiecewiseRate::account.
struct Accounts {
    std::vector<double> funding;   // B^f at nodes
    std::vector<double> discount;  // B^r at nodes
    std::vector<std::vector<double>> repo;  // B^i at nodes, per asset

    std::vector<double> rate_funding;   // r^f at nodes
    std::vector<double> rate_discount;  // r at nodes
    std::vector<double> rate_coll_lend;
    std::vector<double> rate_coll_borrow;
    std::vector<std::vector<double>> rate_repo;  // r^i at nodes, per asset
};

// Which drift the asset paths carry.
enum class DriftMode {
    Physical,         // mu; used by the hedging/adjustment estimators
    RiskNeutralized,  // repo rate; used to train valuation regressions
};

// Simulated asset path bundle.  Flat arrays are node-major:
// index = node * n_paths + path (dW is step-major with the same stride).
struct MarketPaths {
    int n_paths = 0;
    int n_assets = 0;
    TimeGrid grid;
    DriftMode mode = DriftMode::Physical;
    std::uint64_t seed = 0;

    std::vector<std::vector<double>> spot;      // per asset, nodes
    std::vector<std::vector<double>> log_spot;  // per asset, nodes
    std::vector<std::vector<double>> dW;        // per asset, steps
    std::vector<double> density;                // state-price density Z at nodes
                                                // (filled by density_process;
                                                // empty for RiskNeutralized)

    std::size_t idx(int node, int path) const {
        return static_cast<std::size_t>(node) * static_cast<std::size_t>(n_paths) +
               static_cast<std::size_t>(path);
    }
};

// Validates model parameters against the declared bounds over the log-spot
// range the simulation can plausibly reach; throws ConfigError listing every
// violation.
void validate_market(const MarketParams& params, const TimeGrid& grid);

// Builds the deterministic accounts on the grid.
Accounts build_accounts(const MarketParams& params, const TimeGrid& grid);

// Simulates the asset bundle by log-Euler (exact for constant coefficients).
// Both drift modes consume identical Brownian draws, so the risk-neutralized
// bundle is a drift shift of the physical one path by path.
MarketPaths simulate_assets(const MarketParams& params, const TimeGrid& grid, int n_paths,
                            std::uint64_t seed, DriftMode mode, int n_threads);

// Fills bundle.density with the exponential martingale
//   Z_{k+1} = Z_k * exp(-sum_i theta_i dW_i - 0.5 * sum_i theta_i^2 dt),
// theta_i = (mu_i - r^i) / sigma_i evaluated at the left node.  Throws
// NumericalError if a market price of risk leaves the declared bound.
void density_process(const MarketParams& params, const Accounts& accounts, MarketPaths& bundle,
                     int n_threads);

// Market price of risk of one asset at a given log-spot and node.
double market_price_of_risk(const AssetSpec& asset, double repo_rate_at_node, double log_spot);

}  // namespace riskmin
