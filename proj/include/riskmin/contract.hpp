#pragma once

#include <map>
#include <vector>

#include "riskmin/credit.hpp"
#include "riskmin/grid.hpp"
#include "riskmin/market.hpp"
#include "riskmin/regression.hpp"
#include "riskmin/stats.hpp"

namespace riskmin {

// One promised cash flow.  Sign convention: positive amounts are received by
// the desk, negative amounts are paid (a sold option has negative scale).
struct FlowSpec {
    enum class Kind { Fixed, Forward, Call, Put };
    double time = 1.0;  // must coincide with a grid node, strictly after 0
    Kind kind = Kind::Fixed;
    int asset = 0;       // underlying index (ignored for Fixed)
    double strike = 0.0;  // ignored for Fixed
    double scale = 1.0;   // multiplier, carries the direction

    double amount(double spot) const;
};

// Collateral posting rule applied to the clean value:
// C = sign(alpha * v) * max(|alpha * v| - threshold, 0).
struct CollateralRule {
    double alpha = 0.0;
    double threshold = 0.0;

    double apply(double clean_value) const;
};

struct ContractParams {
    std::vector<FlowSpec> flows;
    double recovery_bank = 0.4;  // R^B, recovery paid on the desk's own default
    double recovery_cpty = 0.4;  // R^C, recovery received on the counterparty's default
    CollateralRule collateral;
};

// Validates the contract against the grid; throws ConfigError with all problems.
void validate_contract(const ContractParams& params, const TimeGrid& grid);

// Grid node of each flow (validated to sit on the grid).
std::vector<int> flow_nodes(const ContractParams& params, const TimeGrid& grid);

// Contract flow amounts evaluated on a path bundle, keyed by grid node.
struct FlowAmounts {
    std::map<int, std::vector<double>> at_node;  // node -> per-path amount

    // Flow amount at (node, path); 0 when no flow sits on the node.
    double at(int node, int path) const {
        auto it = at_node.find(node);
        return (it == at_node.end()) ? 0.0 : it->second[static_cast<std::size_t>(path)];
    }
};

FlowAmounts evaluate_flows(const ContractParams& params, const TimeGrid& grid,
                           const MarketPaths& bundle);

// Clean (default- and funding-free) value paths.  The value is
// liability-positive: v = -E_Q[sum of discounted future flows], so a sold
// option has positive clean value.  Trained by per-node regression on the
// risk-neutralized bundle, evaluated on the physical bundle.
struct CleanValue {
    std::vector<double> value;  // node-major on the evaluation (physical) bundle
    double v0 = 0.0;            // scalar value at node 0
    double v0_se = 0.0;
    Estimate v0_weighted;       // density-weighted estimate on the physical bundle
                                // (measure-change cross-check)
    std::vector<RidgeEvent> ridge_events;
};

CleanValue clean_value(const ContractParams& params, const TimeGrid& grid,
                       const Accounts& accounts, const MarketPaths& train,
                       const MarketPaths& eval, const RegressionConfig& reg_cfg);

// Close-out state on the physical bundle.  Q is the close-out valuation
// (claim-positive: positive when the counterparty owes the desk) inclusive of
// the flow due at the node; the settlement exposure nets the collateral held
// before the default, Y_k = Q_k - C_{k-1} with C_{-1} := C_0.
struct CloseOutPaths {
    std::vector<double> clean;       // liability-positive clean value (copy of CleanValue::value)
    std::vector<double> collateral;  // C_k = g(clean_k)
    std::vector<double> closeout;    // Q_k = -clean_k + flow_k
    std::vector<double> exposure;    // Y_k = Q_k - C_{k-1}
};

CloseOutPaths build_closeout(const CleanValue& clean, const FlowAmounts& flows,
                             const CollateralRule& rule, const TimeGrid& grid, int n_paths);

// Recovery settlements of the two default directions for a given exposure y:
// counterparty first: R^C y+ - y-; desk first: y+ - R^B y-.
double recovery_cpty_first(double y, double recovery_cpty);
double recovery_bank_first(double y, double recovery_bank);

// Discounted funding-unit ledger of the collateralized flow account.
// F_k accumulates (flow_l + dC_l)/B^f_l for l = 1..k minus the collateral
// remuneration sum_{l<k} rbar^c_l C_l dt / B^f_l; F^pre_k stops the flow sum at
// k-1 but accrues remuneration through the step into k.  The targets are the
// terminal values of the backward equation: on survival
// terminal = -F_N + C_N/B^f_N, at a default node m the branch value is
// phi^j_m = -F^pre_m - rec^j(Y_m)/B^f_m.
struct LedgerPaths {
    std::vector<double> cum_flows;   // F_k, node-major, no-default accumulation
    std::vector<double> pre_flows;   // F^pre_k, node-major
    std::vector<double> phi_bank;    // phi^B_k, node-major
    std::vector<double> phi_cpty;    // phi^C_k, node-major
    std::vector<double> terminal;    // survival-branch target per path
    std::vector<double> target_g;    // realized target per scenario (with defaults applied)
    long flows_at_default = 0;       // contract flows due exactly at a default node
                                     // (settled inside the close-out claim, not the ledger)
    double decomposition_max_err = 0.0;  // max |target_g - independently assembled value|
};

LedgerPaths assemble_ledger(const ContractParams& params, const TimeGrid& grid,
                            const Accounts& accounts, const CloseOutPaths& closeout,
                            const FlowAmounts& flows, const CreditScenarios& credit);

}  // namespace riskmin
