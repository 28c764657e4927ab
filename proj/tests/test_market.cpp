#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "riskmin/errors.hpp"
#include "riskmin/market.hpp"
#include "riskmin/stats.hpp"

using namespace riskmin;

namespace {

MarketParams one_asset(double mu, double sigma, double repo) {
    MarketParams params;
    AssetSpec asset;
    asset.s0 = 100.0;
    asset.drift = {Coefficient::Kind::Constant, mu, 0.0, 0.0};
    asset.vol = {Coefficient::Kind::Constant, sigma, 0.0, 0.0};
    asset.repo_rate = PiecewiseRate::constant(repo);
    params.assets.push_back(asset);
    params.rates.funding = PiecewiseRate::constant(0.025);
    params.rates.discount = PiecewiseRate::constant(0.01);
    params.rates.collateral_lend = PiecewiseRate::constant(0.005);
    params.rates.collateral_borrow = PiecewiseRate::constant(0.015);
    params.bounds = {0.1, 1.0};
    return params;
}

bool mentions(const ConfigError& err, const std::string& needle) {
    for (const std::string& p : err.problems())
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("accounts wire the four curves and per-asset repo accounts") {
    const MarketParams params = one_asset(0.05, 0.2, 0.03);
    const TimeGrid grid{1.0, 4};
    const Accounts acc = build_accounts(params, grid);
    REQUIRE(acc.funding.size() == 5);
    CHECK(acc.funding[4] == doctest::Approx(std::exp(0.025)).epsilon(1e-14));
    CHECK(acc.discount[4] == doctest::Approx(std::exp(0.01)).epsilon(1e-14));
    REQUIRE(acc.repo.size() == 1);
    CHECK(acc.repo[0][4] == doctest::Approx(std::exp(0.03)).epsilon(1e-14));
    CHECK(acc.rate_funding[2] == 0.025);
    CHECK(acc.rate_coll_lend[0] == 0.005);
    CHECK(acc.rate_coll_borrow[0] == 0.015);
    CHECK(acc.rate_repo[0][3] == 0.03);
}

TEST_CASE("asset simulation reproduces the lognormal moments") {
    const MarketParams params = one_asset(0.05, 0.2, 0.03);
    const TimeGrid grid{1.0, 50};
    const int n = 50000;
    const MarketPaths bundle =
        simulate_assets(params, grid, n, 99, DriftMode::Physical, 1);

    const double expected_mean = std::log(100.0) + (0.05 - 0.5 * 0.04);
    std::vector<double> terminal(n), centred_sq(n);
    for (int p = 0; p < n; ++p) {
        const double x = bundle.log_spot[0][bundle.idx(50, p)];
        terminal[static_cast<std::size_t>(p)] = x;
        const double d = x - expected_mean;
        centred_sq[static_cast<std::size_t>(p)] = d * d;
    }
    CHECK(mean_se(terminal).within(expected_mean, 3.0));
    CHECK(mean_se(centred_sq).within(0.04, 3.0));
    // Spot and log-spot stay consistent.
    CHECK(bundle.spot[0][bundle.idx(50, 7)] ==
          doctest::Approx(std::exp(bundle.log_spot[0][bundle.idx(50, 7)])).epsilon(1e-12));
}

TEST_CASE("risk-neutralized bundle is a deterministic drift shift of the physical one") {
    const MarketParams params = one_asset(0.05, 0.2, 0.03);
    const TimeGrid grid{1.0, 20};
    const int n = 500;
    const MarketPaths physical = simulate_assets(params, grid, n, 7, DriftMode::Physical, 1);
    const MarketPaths neutral =
        simulate_assets(params, grid, n, 7, DriftMode::RiskNeutralized, 1);

    // Identical Brownian draws...
    CHECK(physical.dW[0] == neutral.dW[0]);
    // ... and a log-spot gap of exactly (repo - mu) t at every node.
    double worst = 0.0;
    for (int k = 0; k <= 20; ++k)
        for (int p = 0; p < n; ++p) {
            const double gap = neutral.log_spot[0][neutral.idx(k, p)] -
                               physical.log_spot[0][physical.idx(k, p)];
            worst = std::max(worst, std::fabs(gap - (0.03 - 0.05) * grid.time(k)));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("state-price density is a mean-one martingale with lognormal second moment") {
    const MarketParams params = one_asset(0.05, 0.2, 0.03);
    const TimeGrid grid{1.0, 50};
    const int n = 50000;
    MarketPaths bundle = simulate_assets(params, grid, n, 31, DriftMode::Physical, 1);
    const Accounts acc = build_accounts(params, grid);
    density_process(params, acc, bundle, 1);

    REQUIRE(bundle.density.size() == bundle.spot[0].size());
    std::vector<double> z(n), z_sq(n), weighted_spot(n);
    for (int p = 0; p < n; ++p) {
        const double zz = bundle.density[bundle.idx(50, p)];
        z[static_cast<std::size_t>(p)] = zz;
        z_sq[static_cast<std::size_t>(p)] = zz * zz;
        weighted_spot[static_cast<std::size_t>(p)] =
            zz * bundle.spot[0][bundle.idx(50, p)] / acc.repo[0][50];
    }
    CHECK(mean_se(z).within(1.0, 3.0));
    // theta = (0.05 - 0.03)/0.2 = 0.1, E[Z^2] = exp(theta^2 T).
    CHECK(mean_se(z_sq).within(std::exp(0.01), 3.0));
    // Repo-discounted spot is a martingale under the density weighting.
    CHECK(mean_se(weighted_spot).within(100.0, 3.0));

    // The density stage refuses a risk-neutralized bundle.
    MarketPaths neutral = simulate_assets(params, grid, 10, 31, DriftMode::RiskNeutralized, 1);
    CHECK_THROWS_AS(density_process(params, acc, neutral, 1), NumericalError);
}

TEST_CASE("simulation is identical across thread counts") {
    MarketParams params = one_asset(0.05, 0.2, 0.03);
    // State-dependent coefficients exercise the per-step evaluation path.
    params.assets[0].vol = {Coefficient::Kind::AffineLog, 0.2, 0.03, std::log(100.0)};
    const TimeGrid grid{1.0, 25};
    MarketPaths serial = simulate_assets(params, grid, 2000, 5, DriftMode::Physical, 1);
    MarketPaths parallel = simulate_assets(params, grid, 2000, 5, DriftMode::Physical, 4);
    CHECK(serial.log_spot[0] == parallel.log_spot[0]);
    CHECK(serial.dW[0] == parallel.dW[0]);

    const Accounts acc = build_accounts(params, grid);
    density_process(params, acc, serial, 1);
    density_process(params, acc, parallel, 3);
    CHECK(serial.density == parallel.density);
}

TEST_CASE("market validation names every violated bound") {
    const TimeGrid grid{1.0, 10};

    MarketParams bad_rate = one_asset(0.05, 0.2, 0.03);
    bad_rate.rates.funding = PiecewiseRate::constant(0.5);  // above bounds.rate = 0.1
    try {
        validate_market(bad_rate, grid);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(mentions(err, "market.rates.funding"));
    }

    MarketParams bad_theta = one_asset(0.09, 0.02, 0.0);  // theta = 4.5 > 1
    try {
        validate_market(bad_theta, grid);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(mentions(err, "market price of risk"));
    }

    MarketParams bad_vol = one_asset(0.05, 0.2, 0.03);
    bad_vol.assets[0].vol = {Coefficient::Kind::AffineLog, 0.05, -0.2, std::log(100.0)};
    try {
        validate_market(bad_vol, grid);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(mentions(err, "vol"));
    }

    MarketParams bad_spot = one_asset(0.05, 0.2, 0.03);
    bad_spot.assets[0].s0 = -1.0;
    CHECK_THROWS_AS(validate_market(bad_spot, grid), ConfigError);

    // A clean configuration passes.
    validate_market(one_asset(0.05, 0.2, 0.03), grid);
}
