#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "riskmin/grid.hpp"
#include "riskmin/market.hpp"

namespace riskmin {

// Default intensity model of one party.
struct IntensityParams {
    enum class Kind {
        None,      // no default risk (intensity identically 0)
        Constant,  // flat intensity `value`
        Jacobi,    // mean-reverting diffusion bounded in [lambda_min, lambda_max]
    };
    Kind kind = Kind::None;
    double value = 0.0;  // Constant only

    // Jacobi only: d lambda = kappa (theta - lambda) dt
    //   + sqrt((lambda_max - lambda)(lambda - lambda_min)) (rho dW_asset + sqrt(1-rho^2) dW_perp)
    double lambda0 = 0.0;
    double kappa = 0.0;
    double theta = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double rho = 0.0;  // correlation with the first asset's Brownian driver

    bool stochastic() const { return kind == Kind::Jacobi; }
};

struct CreditParams {
    IntensityParams bank;
    IntensityParams counterparty;
};

inline constexpr std::int32_t kNoDefault = std::numeric_limits<std::int32_t>::max();

// Simulated intensities, integrated hazards, and sampled default times for
// both parties.  Flat arrays are node-major like MarketPaths.  Default times
// are produced by inverting the trapezoid-integrated hazard against an
// exponential trigger; the recorded node is the first grid node whose hazard
// reaches the trigger (all valuation happens at nodes), while `time_*` keeps
// the within-step linear interpolation for reporting.
struct CreditScenarios {
    int n_paths = 0;
    TimeGrid grid;

    std::vector<double> lambda_bank;  // nodes
    std::vector<double> lambda_cpty;
    std::vector<double> hazard_bank;  // trapezoid cumulative hazard at nodes
    std::vector<double> hazard_cpty;

    std::vector<std::int32_t> node_bank;  // first node with hazard >= trigger, or kNoDefault
    std::vector<std::int32_t> node_cpty;
    std::vector<double> time_bank;  // interpolated default time, +inf if none
    std::vector<double> time_cpty;

    std::vector<std::int32_t> first_node;   // node of the earlier default, or kNoDefault
    std::vector<std::uint8_t> first_is_cpty;  // 1 if the counterparty defaults first
    std::vector<double> first_time;

    long tie_count = 0;       // same-node joint defaults resolved by the seeded coin
    long default_count = 0;   // scenarios with a default at or before maturity

    std::size_t idx(int node, int path) const {
        return static_cast<std::size_t>(node) * static_cast<std::size_t>(n_paths) +
               static_cast<std::size_t>(path);
    }
    bool defaulted(int path) const {
        return first_node[static_cast<std::size_t>(path)] != kNoDefault;
    }
};

// Validates intensity parameters; throws ConfigError listing every violation.
void validate_credit(const CreditParams& params);

// Simulates both intensity paths (full-truncation Euler for the Jacobi kind,
// stored paths clamped to [lambda_min, lambda_max]), integrates the hazards,
// and samples the default times.  `market` supplies the first asset's Brownian
// increments for the correlated part of the Jacobi driver and must be the
// physical-drift bundle.
CreditScenarios simulate_credit(const CreditParams& params, const TimeGrid& grid,
                                const MarketPaths& market, std::uint64_t seed, int n_threads);

// Resimulates the intensity pair of a single scenario with fresh orthogonal
// Brownian draws while reusing the scenario's asset increments; used by the
// two-step estimator.  Writes lambda and hazard values for one path into
// caller-provided node-indexed buffers.
void resimulate_intensity_pair(const CreditParams& params, const TimeGrid& grid,
                               const MarketPaths& market, int path, std::uint64_t seed,
                               std::uint64_t inner_index, std::vector<double>& lambda_bank,
                               std::vector<double>& lambda_cpty, std::vector<double>& hazard_bank,
                               std::vector<double>& hazard_cpty);

}  // namespace riskmin
