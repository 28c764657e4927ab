#pragma once

#include <vector>

#include "riskmin/contract.hpp"
#include "riskmin/credit.hpp"
#include "riskmin/grid.hpp"
#include "riskmin/market.hpp"
#include "riskmin/regression.hpp"

namespace riskmin {

// Solution of the backward equation for the discounted hedging value, solved
// on the physical bundle by per-node least-squares regression.
//
// Scheme, backward from the terminal target: the martingale integrands are
// regressed first,  Z_i = fit((Y_{k+1} - m) dW_i / dt)  where m is the
// same-basis projection of Y_{k+1} — a control variate that removes the
// 1/dt level variance of the raw product without bias, since the projection
// is measurable at node k and the increment has conditional mean zero.  Then
// the value with the explicit driver  Y_k = fit(Y_{k+1} + f(t_k, y, Z_k) dt)
// where the driver's y-argument starts at Y_{k+1} and is refined once with
// the first fit (one Picard pass).  The driver is
//   f(t,y,z) = -sum_i z_i theta_i + (phi^C - y) lambda^C + (phi^B - y) lambda^B.
// At node 0 the basis degenerates to the constant, so Y_0 is the target mean
// and Z_0 comes from the centred cross-sectional slope against the first
// Brownian increment; Z_0 is flagged as extrapolated.
struct BsdeSolution {
    std::vector<double> ybar;                // fitted values, node-major
    std::vector<std::vector<double>> zbar;   // per asset, node-major (node N zero)
    double y0 = 0.0;
    double y0_se = 0.0;
    std::vector<double> y0_targets;          // per-path node-0 targets (mean = y0);
                                             // kept for the adjustment-identity check
    std::vector<double> z0;                  // per asset
    bool z0_extrapolated = true;
    std::vector<std::vector<double>> z_resid_amp_rms;  // per asset, per node: rms of the
                                                       // integrand-fit residual weighted by
                                                       // the traded diffusion amplitude
                                                       // S sigma / B^f; scales the
                                                       // common-mode floor of the
                                                       // orthogonality diagnostic
    std::vector<RidgeEvent> ridge_events;
};

BsdeSolution solve_bsde(const MarketParams& market_params, const CreditParams& credit_params,
                        const TimeGrid& grid, const Accounts& accounts,
                        const MarketPaths& physical, const CreditScenarios& credit,
                        const LedgerPaths& ledger, const RegressionConfig& reg_cfg,
                        int picard_refinements, int n_threads);

// Full-filtration field assembled from the backward solution: the stopped
// value process (pre-default fit, default-branch value at the default node,
// frozen afterwards) and the jump fields U^j = phi^j - Y used by the
// orthogonal martingale part of the decomposition.
struct GSolution {
    std::vector<double> y;           // stopped value, node-major
    std::vector<double> jump_bank;   // U^B, node-major
    std::vector<double> jump_cpty;   // U^C, node-major
    double max_roundtrip_err = 0.0;  // |stopped value - realized ledger target| at the
                                     // stopping node, over all scenarios
};

GSolution assemble_g_solution(const BsdeSolution& bsde, const LedgerPaths& ledger,
                              const CreditScenarios& credit);

}  // namespace riskmin
