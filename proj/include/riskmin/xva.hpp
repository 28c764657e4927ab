#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmin/bsde.hpp"
#include "riskmin/contract.hpp"
#include "riskmin/credit.hpp"
#include "riskmin/grid.hpp"
#include "riskmin/hedging.hpp"
#include "riskmin/market.hpp"
#include "riskmin/stats.hpp"

namespace riskmin {

// Which estimator supplies the reported credit adjustments.
enum class CvaEstimator {
    Direct,     // settlement sampled at the realized first default
    Intensity,  // survival-weighted time-integral of the intensity
};

// Which value process feeds the funding adjustment.
enum class FvaEstimator {
    Hedge,       // portfolio wealth from the extracted strategy
    FixedPoint,  // iterate the adjustment identity from the clean value
};

struct KvaParams {
    bool enabled = false;
    double hurdle = 0.1;     // capital remuneration rate h, per year
    double alpha = 0.975;    // expected-shortfall confidence
    double horizon = 0.0;    // capital horizon in years; 0 means one grid step,
                             // otherwise must sit on the grid
};

struct XvaParams {
    CvaEstimator cva_estimator = CvaEstimator::Intensity;
    FvaEstimator fva_estimator = FvaEstimator::Hedge;

    // Report the debit adjustment with the counterparty loss-given-default
    // factor (a published display convention) instead of the desk's own.
    // Reporting only: the identity check always uses the desk factor, which
    // is what the hedge construction settles at the desk's default.
    bool strict_display = false;

    bool two_step = false;  // conditional-intensity estimator on resimulated
                            // orthogonal noise
    int inner_paths = 64;

    KvaParams kva;

    int fixed_point_max_iters = 50;
    double fixed_point_tol = 1e-8;  // on the change in the time-0 value, per
                                    // unit of clean-value scale
};

// Time-0 adjustment report.  Every headline number carries a Monte Carlo
// standard error from per-scenario representatives on the shared bundle.
struct XvaResults {
    Estimate clean;  // density-weighted clean value

    // Both credit-adjustment estimators are always computed; `cva`/`dva` are
    // the ones selected by the configuration (after the empty-default
    // fallback, see `direct_fallback`).
    Estimate cva_direct;
    Estimate dva_direct;
    Estimate cva_intensity;
    Estimate dva_intensity;
    Estimate cva;
    Estimate dva;
    bool direct_fallback = false;

    Estimate colva;
    Estimate fva;
    int fva_iterations = 0;  // fixed-point sweeps used (0 under FvaEstimator::Hedge)

    Estimate hedge_value;  // V_0 = Y_0 - C_0, from the backward-solution targets
    Estimate total;        // clean + cva - dva + colva - fva
    Estimate gap;          // hedge_value - total, per-scenario combined SE

    bool two_step_enabled = false;
    Estimate cva_two_step;

    bool kva_enabled = false;
    Estimate kva;     // exactly zero when the hurdle is zero
    Estimate v_full;  // hedge_value + kva
    std::vector<double> es_nodes;        // per-step expected shortfall of cost increments
    std::vector<std::uint8_t> es_skipped;  // 1 where the survivor sample was too thin

    // Per-step integrand profiles (plot data): discounted density-weighted
    // positive/negative exposure, collateral balance, and the per-step
    // adjustment increments.
    std::vector<double> epe;
    std::vector<double> ene;
    std::vector<double> collateral_mean;
    std::vector<double> cva_steps;
    std::vector<double> dva_steps;
    std::vector<double> colva_steps;
    std::vector<double> fva_steps;

    std::vector<std::string> warnings;
};

XvaResults compute_xva(const XvaParams& params, const CreditParams& credit_params,
                       const ContractParams& contract, const TimeGrid& grid,
                       const Accounts& accounts, const MarketPaths& physical,
                       const CreditScenarios& credit, const CloseOutPaths& closeout,
                       const FlowAmounts& flows, const BsdeSolution& bsde,
                       const HedgePaths& hedge, int n_threads);

}  // namespace riskmin
