#include "riskmin/market.hpp"

#include <cmath>
#include <string>

#include "riskmin/errors.hpp"
#include "riskmin/parallel.hpp"
#include "riskmin/rng.hpp"

namespace riskmin {

namespace {


// Log-spot range the validation sweep covers: drift extremes plus a 6-sigma
// diffusion band around the initial spot.
void plausible_log_range(const AssetSpec& asset, const TimeGrid& grid, double& lo, double& hi) {
    const double x0 = std::log(asset.s0);
    const double sigma0 = std::fabs(asset.vol.at(x0));
    const double band = 6.0 * std::max(sigma0, 0.05) * std::sqrt(grid.horizon);
    const double drift0 = std::fabs(asset.drift.at(x0)) * grid.horizon;
    lo = x0 - band - drift0;
    hi = x0 + band + drift0;
}

void check_rate_bound(const PiecewiseRate& rate, double bound, const std::string& name,
                      std::vector<std::string>& problems) {
    if (rate.values.empty()) {
        problems.push_back(name + ": no values");
        return;
    }
    if (rate.min_value() < -bound || rate.max_value() > bound)
        problems.push_back(name + ": leaves the declared rate bound [" + std::to_string(-bound) +
                           ", " + std::to_string(bound) + "]");
}

}  // namespace

double market_price_of_risk(const AssetSpec& asset, double repo_rate_at_node, double log_spot) {
    const double sigma = asset.vol.at(log_spot);
    return (asset.drift.at(log_spot) - repo_rate_at_node) /
           ((std::fabs(sigma) < kSigmaFloor) ? kSigmaFloor : sigma);
}

void validate_market(const MarketParams& params, const TimeGrid& grid) {
    std::vector<std::string> problems;
    if (grid.n_steps < 1) problems.push_back("grid.steps: must be >= 1");
    if (!(grid.horizon > 0.0)) problems.push_back("grid.horizon: must be > 0");
    if (params.assets.empty()) problems.push_back("market.assets: at least one asset required");
    if (!(params.bounds.rate > 0.0)) problems.push_back("market.bounds.rate: must be > 0");
    if (!(params.bounds.market_price_of_risk > 0.0))
        problems.push_back("market.bounds.market_price_of_risk: must be > 0");

    check_rate_bound(params.rates.funding, params.bounds.rate, "market.rates.funding", problems);
    check_rate_bound(params.rates.discount, params.bounds.rate, "market.rates.discount", problems);
    check_rate_bound(params.rates.collateral_lend, params.bounds.rate,
                     "market.rates.collateral_lend", problems);
    check_rate_bound(params.rates.collateral_borrow, params.bounds.rate,
                     "market.rates.collateral_borrow", problems);

    for (std::size_t i = 0; i < params.assets.size(); ++i) {
        const AssetSpec& asset = params.assets[i];
        const std::string tag = "market.assets[" + std::to_string(i) + "]";
        if (!(asset.s0 > 0.0)) {
            problems.push_back(tag + ".s0: must be > 0");
            continue;
        }
        check_rate_bound(asset.repo_rate, params.bounds.rate, tag + ".repo_rate", problems);
        if (asset.repo_rate.values.empty()) continue;

        double lo, hi;
        plausible_log_range(asset, grid, lo, hi);
        // Sweep volatility and market price of risk over the reachable range
        // and both repo-rate extremes.
        constexpr int kSweep = 41;
        bool sigma_ok = true, theta_ok = true;
        for (int s = 0; s < kSweep; ++s) {
            const double x = lo + (hi - lo) * s / (kSweep - 1);
            const double sigma = asset.vol.at(x);
            if (!(sigma >= kSigmaFloor)) sigma_ok = false;
            for (double r : {asset.repo_rate.min_value(), asset.repo_rate.max_value()}) {
                const double theta = (asset.drift.at(x) - r) / std::max(sigma, kSigmaFloor);
                if (std::fabs(theta) > params.bounds.market_price_of_risk) theta_ok = false;
            }
        }
        if (!sigma_ok)
            problems.push_back(tag + ".vol: not positive over the plausible log-spot range");
        if (!theta_ok)
            problems.push_back(tag +
                               ": market price of risk leaves the declared bound over the "
                               "plausible log-spot range");
    }
    if (!problems.empty()) throw ConfigError(problems);
}

Accounts build_accounts(const MarketParams& params, const TimeGrid& grid) {
    Accounts acc;
    acc.funding = params.rates.funding.account(grid);
    acc.discount = params.rates.discount.account(grid);
    acc.rate_funding = params.rates.funding.node_values(grid);
    acc.rate_discount = params.rates.discount.node_values(grid);
    acc.rate_coll_lend = params.rates.collateral_lend.node_values(grid);
    acc.rate_coll_borrow = params.rates.collateral_borrow.node_values(grid);
    for (const AssetSpec& asset : params.assets) {
        acc.repo.push_back(asset.repo_rate.account(grid));
        acc.rate_repo.push_back(asset.repo_rate.node_values(grid));
    }
    return acc;
}

MarketPaths simulate_assets(const MarketParams& params, const TimeGrid& grid, int n_paths,
                            std::uint64_t seed, DriftMode mode, int n_threads) {
    MarketPaths bundle;
    bundle.n_paths = n_paths;
    bundle.n_assets = static_cast<int>(params.assets.size());
    bundle.grid = grid;
    bundle.mode = mode;
    bundle.seed = seed;

    const int n_nodes = grid.n_nodes();
    const int n_steps = grid.n_steps;
    const double dt = grid.dt();
    const double sqrt_dt = std::sqrt(dt);
    const std::size_t node_size = static_cast<std::size_t>(n_nodes) * n_paths;
    const std::size_t step_size = static_cast<std::size_t>(n_steps) * n_paths;

    bundle.spot.assign(bundle.n_assets, std::vector<double>(node_size));
    bundle.log_spot.assign(bundle.n_assets, std::vector<double>(node_size));
    bundle.dW.assign(bundle.n_assets, std::vector<double>(step_size));

    const CounterRng rng(seed, Stream::AssetIncrements);
    const int d = bundle.n_assets;

    for (int i = 0; i < d; ++i) {
        const AssetSpec& asset = params.assets[i];
        const std::vector<double> repo = asset.repo_rate.node_values(grid);
        const double x0 = std::log(asset.s0);
        std::vector<double>& spot = bundle.spot[static_cast<std::size_t>(i)];
        std::vector<double>& lspot = bundle.log_spot[static_cast<std::size_t>(i)];
        std::vector<double>& dW = bundle.dW[static_cast<std::size_t>(i)];

        parallel_for(n_paths, n_threads, [&](int begin, int end) {
            for (int p = begin; p < end; ++p) {
                double x = x0;
                spot[static_cast<std::size_t>(p)] = asset.s0;
                lspot[static_cast<std::size_t>(p)] = x0;
                for (int k = 0; k < n_steps; ++k) {
                    const std::uint64_t draw =
                        static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(d) +
                        static_cast<std::uint64_t>(i);
                    const double z = rng.normal(static_cast<std::uint64_t>(p), draw);
                    const double dw = sqrt_dt * z;
                    const double sigma = asset.vol.at(x);
                    const double m = (mode == DriftMode::Physical)
                                         ? asset.drift.at(x)
                                         : repo[static_cast<std::size_t>(k)];
                    x += (m - 0.5 * sigma * sigma) * dt + sigma * dw;
                    const std::size_t at = bundle.idx(k + 1, p);
                    dW[bundle.idx(k, p)] = dw;
                    lspot[at] = x;
                    spot[at] = std::exp(x);
                }
            }
        });
    }
    return bundle;
}

void density_process(const MarketParams& params, const Accounts& accounts, MarketPaths& bundle,
                     int n_threads) {
    if (bundle.mode != DriftMode::Physical)
        throw NumericalError("simulate", "density",
                             "density process requires the physical-drift bundle");
    const int n_paths = bundle.n_paths;
    const int n_steps = bundle.grid.n_steps;
    const double dt = bundle.grid.dt();
    const double bound = params.bounds.market_price_of_risk;
    bundle.density.assign(static_cast<std::size_t>(bundle.grid.n_nodes()) * n_paths, 1.0);

    // Shared flag: any bound violation aborts after the parallel region so all
    // workers stay lock-free on the hot path.
    std::vector<int> violation(static_cast<std::size_t>(std::max(n_threads, 1)), 0);

    parallel_for(n_paths, n_threads, [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            double log_z = 0.0;
            for (int k = 0; k < n_steps; ++k) {
                double drift_term = 0.0;
                for (int i = 0; i < bundle.n_assets; ++i) {
                    const double x = bundle.log_spot[static_cast<std::size_t>(i)][bundle.idx(k, p)];
                    const double theta = market_price_of_risk(
                        params.assets[static_cast<std::size_t>(i)],
                        accounts.rate_repo[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
                        x);
                    if (std::fabs(theta) > bound || !std::isfinite(theta)) violation[0] = k + 1;
                    const double dw = bundle.dW[static_cast<std::size_t>(i)][bundle.idx(k, p)];
                    drift_term += -theta * dw - 0.5 * theta * theta * dt;
                }
                log_z += drift_term;
                bundle.density[bundle.idx(k + 1, p)] = std::exp(log_z);
            }
        }
    });
    if (violation[0] != 0)
        throw NumericalError("simulate", "market price of risk",
                             "left the declared bound at step " + std::to_string(violation[0] - 1));
}

}  // namespace riskmin
