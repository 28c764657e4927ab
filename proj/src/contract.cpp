#include "riskmin/contract.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskmin/errors.hpp"

namespace riskmin {

double FlowSpec::amount(double spot) const {
    switch (kind) {
        case Kind::Fixed:
            return scale;
        case Kind::Forward:
            return scale * (spot - strike);
        case Kind::Call:
            return scale * std::max(spot - strike, 0.0);
        case Kind::Put:
            return scale * std::max(strike - spot, 0.0);
    }
    return 0.0;
}

double CollateralRule::apply(double clean_value) const {
    const double raw = alpha * clean_value;
    const double excess = std::fabs(raw) - threshold;
    return (excess > 0.0) ? std::copysign(excess, raw) : 0.0;
}

void validate_contract(const ContractParams& params, const TimeGrid& grid) {
    std::vector<std::string> problems;
    if (params.flows.empty()) problems.push_back("contract.flows: at least one flow required");
    const double dt = grid.dt();
    for (std::size_t i = 0; i < params.flows.size(); ++i) {
        const FlowSpec& f = params.flows[i];
        const std::string tag = "contract.flows[" + std::to_string(i) + "]";
        const double steps = f.time / dt;
        const double nearest = std::round(steps);
        if (std::fabs(steps - nearest) > 1e-9 * std::max(1.0, steps))
            problems.push_back(tag + ".time: does not coincide with a grid node");
        else if (nearest < 0.5)
            problems.push_back(tag + ".time: must be strictly after inception");
        else if (nearest > grid.n_steps + 0.5)
            problems.push_back(tag + ".time: lies beyond the horizon");
        if (f.asset < 0) problems.push_back(tag + ".asset: must be >= 0");
    }
    if (!(params.recovery_bank >= 0.0 && params.recovery_bank <= 1.0))
        problems.push_back("contract.recovery_bank: must lie in [0,1]");
    if (!(params.recovery_cpty >= 0.0 && params.recovery_cpty <= 1.0))
        problems.push_back("contract.recovery_counterparty: must lie in [0,1]");
    if (!(params.collateral.alpha >= 0.0))
        problems.push_back("contract.collateral.alpha: must be >= 0");
    if (!(params.collateral.threshold >= 0.0))
        problems.push_back("contract.collateral.threshold: must be >= 0");
    if (!problems.empty()) throw ConfigError(problems);
}

std::vector<int> flow_nodes(const ContractParams& params, const TimeGrid& grid) {
    std::vector<int> nodes;
    nodes.reserve(params.flows.size());
    for (const FlowSpec& f : params.flows)
        nodes.push_back(static_cast<int>(std::round(f.time / grid.dt())));
    return nodes;
}

FlowAmounts evaluate_flows(const ContractParams& params, const TimeGrid& grid,
                           const MarketPaths& bundle) {
    FlowAmounts out;
    const std::vector<int> nodes = flow_nodes(params, grid);
    for (std::size_t i = 0; i < params.flows.size(); ++i) {
        const FlowSpec& f = params.flows[i];
        const int node = nodes[i];
        auto& column = out.at_node[node];
        if (column.empty()) column.assign(static_cast<std::size_t>(bundle.n_paths), 0.0);
        const std::vector<double>& spot =
            bundle.spot[static_cast<std::size_t>(std::min(f.asset, bundle.n_assets - 1))];
        for (int p = 0; p < bundle.n_paths; ++p)
            column[static_cast<std::size_t>(p)] += f.amount(spot[bundle.idx(node, p)]);
    }
    return out;
}

CleanValue clean_value(const ContractParams& params, const TimeGrid& grid,
                       const Accounts& accounts, const MarketPaths& train,
                       const MarketPaths& eval, const RegressionConfig& reg_cfg) {
    const int n_train = train.n_paths;
    const int n_eval = eval.n_paths;
    const int n_nodes = grid.n_nodes();
    const FlowAmounts flows_train = evaluate_flows(params, grid, train);
    const FlowAmounts flows_eval = evaluate_flows(params, grid, eval);
    const std::vector<double>& br = accounts.discount;

    int last_flow_node = 0;
    for (const auto& [node, column] : flows_train.at_node)
        last_flow_node = std::max(last_flow_node, node);

    CleanValue out;
    out.value.assign(static_cast<std::size_t>(n_nodes) * n_eval, 0.0);

    // Backward accumulation of discounted future flows on the training bundle:
    // acc_p = sum_{l>k} flow_l / B^r_l, so the liability-positive target at
    // node k is -B^r_k * acc_p.
    std::vector<double> acc(static_cast<std::size_t>(n_train), 0.0);
    std::vector<double> target(static_cast<std::size_t>(n_train));
    std::vector<double> fitted(static_cast<std::size_t>(n_train));

    auto price_slices = [&](const MarketPaths& b, int node) {
        std::vector<std::span<const double>> slices;
        for (int i = 0; i < b.n_assets; ++i)
            slices.emplace_back(b.log_spot[static_cast<std::size_t>(i)].data() + b.idx(node, 0),
                                static_cast<std::size_t>(b.n_paths));
        return slices;
    };

    for (int k = n_nodes - 2; k >= 1; --k) {
        auto it = flows_train.at_node.find(k + 1);
        if (it != flows_train.at_node.end()) {
            const double disc = br[static_cast<std::size_t>(k + 1)];
            for (int p = 0; p < n_train; ++p)
                acc[static_cast<std::size_t>(p)] += it->second[static_cast<std::size_t>(p)] / disc;
        }
        if (k >= last_flow_node) continue;  // no remaining flows: clean value is 0
        const double bk = br[static_cast<std::size_t>(k)];
        for (int p = 0; p < n_train; ++p)
            target[static_cast<std::size_t>(p)] = -bk * acc[static_cast<std::size_t>(p)];
        LeastSquares reg(price_slices(train, k), reg_cfg.price_degree, {}, 0,
                         reg_cfg.condition_threshold);
        const Eigen::VectorXd coeffs = reg.fit(target, fitted);
        if (reg.ridged())
            out.ridge_events.push_back(RidgeEvent{k, reg.condition(), reg.ridge()});
        reg.evaluate(coeffs, price_slices(eval, k), {},
                     std::span<double>(out.value.data() + eval.idx(k, 0),
                                       static_cast<std::size_t>(n_eval)));
    }

    // Node 0: the state is deterministic, so the regression collapses to the
    // plain mean of the discounted-flow targets.
    {
        auto it = flows_train.at_node.find(1);
        if (it != flows_train.at_node.end()) {
            const double disc = br[1];
            for (int p = 0; p < n_train; ++p)
                acc[static_cast<std::size_t>(p)] += it->second[static_cast<std::size_t>(p)] / disc;
        }
        for (int p = 0; p < n_train; ++p)
            target[static_cast<std::size_t>(p)] = -acc[static_cast<std::size_t>(p)];
        const Estimate e = mean_se(target);
        out.v0 = e.value;
        out.v0_se = e.se;
        for (int p = 0; p < n_eval; ++p) out.value[static_cast<std::size_t>(p)] = e.value;
    }

    // Density-weighted cross-check on the physical bundle: each flow weighted
    // by the state-price density at its own node.
    {
        std::vector<double> wsum(static_cast<std::size_t>(n_eval), 0.0);
        for (const auto& [node, column] : flows_eval.at_node) {
            const double disc = br[static_cast<std::size_t>(node)];
            for (int p = 0; p < n_eval; ++p) {
                const double z =
                    eval.density.empty() ? 1.0 : eval.density[eval.idx(node, p)];
                wsum[static_cast<std::size_t>(p)] -=
                    z * column[static_cast<std::size_t>(p)] / disc;
            }
        }
        out.v0_weighted = mean_se(wsum);
    }
    return out;
}

CloseOutPaths build_closeout(const CleanValue& clean, const FlowAmounts& flows,
                             const CollateralRule& rule, const TimeGrid& grid, int n_paths) {
    const int n_nodes = grid.n_nodes();
    const std::size_t total = static_cast<std::size_t>(n_nodes) * n_paths;
    CloseOutPaths out;
    out.clean = clean.value;
    out.collateral.resize(total);
    out.closeout.resize(total);
    out.exposure.resize(total);
    for (std::size_t at = 0; at < total; ++at)
        out.collateral[at] = rule.apply(out.clean[at]);
    for (int k = 0; k < n_nodes; ++k) {
        for (int p = 0; p < n_paths; ++p) {
            const std::size_t at = static_cast<std::size_t>(k) * n_paths + p;
            const std::size_t prev = (k == 0) ? at : at - static_cast<std::size_t>(n_paths);
            out.closeout[at] = -out.clean[at] + flows.at(k, p);
            out.exposure[at] = out.closeout[at] - out.collateral[prev];
        }
    }
    return out;
}

double recovery_cpty_first(double y, double recovery_cpty) {
    return recovery_cpty * std::max(y, 0.0) - std::max(-y, 0.0);
}

double recovery_bank_first(double y, double recovery_bank) {
    return std::max(y, 0.0) - recovery_bank * std::max(-y, 0.0);
}

LedgerPaths assemble_ledger(const ContractParams& params, const TimeGrid& grid,
                            const Accounts& accounts, const CloseOutPaths& closeout,
                            const FlowAmounts& flows, const CreditScenarios& credit) {
    const int n_paths = credit.n_paths;
    const int n_nodes = grid.n_nodes();
    const int n_steps = grid.n_steps;
    const double dt = grid.dt();
    const std::size_t total = static_cast<std::size_t>(n_nodes) * n_paths;
    const std::vector<double>& bf = accounts.funding;

    LedgerPaths out;
    out.cum_flows.assign(total, 0.0);
    out.pre_flows.assign(total, 0.0);
    out.phi_bank.resize(total);
    out.phi_cpty.resize(total);
    out.terminal.resize(static_cast<std::size_t>(n_paths));
    out.target_g.resize(static_cast<std::size_t>(n_paths));

    auto coll_rate = [&](int k, double c) {
        return (c >= 0.0) ? accounts.rate_coll_borrow[static_cast<std::size_t>(k)]
                          : accounts.rate_coll_lend[static_cast<std::size_t>(k)];
    };

    for (int p = 0; p < n_paths; ++p) {
        const std::size_t up = static_cast<std::size_t>(p);
        // phi at node 0: no prior flows or accrual.
        {
            const double y0 = closeout.exposure[up];
            out.phi_cpty[up] = -recovery_cpty_first(y0, params.recovery_cpty);
            out.phi_bank[up] = -recovery_bank_first(y0, params.recovery_bank);
        }
        double f = 0.0;
        for (int k = 1; k <= n_steps; ++k) {
            const std::size_t at = static_cast<std::size_t>(k) * n_paths + up;
            const std::size_t prev = at - static_cast<std::size_t>(n_paths);
            const double c_prev = closeout.collateral[prev];
            const double remun = coll_rate(k - 1, c_prev) * c_prev * dt /
                                 bf[static_cast<std::size_t>(k - 1)];
            const double f_pre = f - remun;
            const double dc = closeout.collateral[at] - c_prev;
            f = f_pre + (flows.at(k, p) + dc) / bf[static_cast<std::size_t>(k)];
            out.pre_flows[at] = f_pre;
            out.cum_flows[at] = f;
            const double y = closeout.exposure[at];
            out.phi_cpty[at] =
                -f_pre - recovery_cpty_first(y, params.recovery_cpty) / bf[static_cast<std::size_t>(k)];
            out.phi_bank[at] =
                -f_pre - recovery_bank_first(y, params.recovery_bank) / bf[static_cast<std::size_t>(k)];
        }
        const double c_term =
            closeout.collateral[static_cast<std::size_t>(n_steps) * n_paths + up];
        out.terminal[up] = -f + c_term / bf[static_cast<std::size_t>(n_steps)];

        const std::int32_t m = credit.first_node[up];
        if (m == kNoDefault) {
            out.target_g[up] = out.terminal[up];
        } else {
            const std::size_t at = static_cast<std::size_t>(m) * n_paths + up;
            out.target_g[up] = credit.first_is_cpty[up] ? out.phi_cpty[at] : out.phi_bank[at];
            if (flows.at_node.count(m) != 0 && flows.at(m, p) != 0.0) ++out.flows_at_default;
        }
    }

    // Independent re-assembly of the realized target, straight from the
    // primitive paths, as a wiring check on the ledger above.
    double max_err = 0.0;
    for (int p = 0; p < n_paths; ++p) {
        const std::size_t up = static_cast<std::size_t>(p);
        const std::int32_t m = credit.first_node[up];
        const bool defaulted = (m != kNoDefault);
        const int stop = defaulted ? m : n_steps;
        double f = 0.0;
        for (int k = 1; k <= stop; ++k) {
            const std::size_t prev = static_cast<std::size_t>(k - 1) * n_paths + up;
            const double c_prev = closeout.collateral[prev];
            f -= coll_rate(k - 1, c_prev) * c_prev * dt / bf[static_cast<std::size_t>(k - 1)];
            if (k < stop || !defaulted) {
                const std::size_t at = static_cast<std::size_t>(k) * n_paths + up;
                const double dc = closeout.collateral[at] - c_prev;
                f += (flows.at(k, p) + dc) / bf[static_cast<std::size_t>(k)];
            }
        }
        double value;
        if (!defaulted) {
            const double c_term =
                closeout.collateral[static_cast<std::size_t>(n_steps) * n_paths + up];
            value = -f + c_term / bf[static_cast<std::size_t>(n_steps)];
        } else {
            const std::size_t at = static_cast<std::size_t>(m) * n_paths + up;
            const double y = closeout.exposure[at];
            const double rec = credit.first_is_cpty[up]
                                   ? recovery_cpty_first(y, params.recovery_cpty)
                                   : recovery_bank_first(y, params.recovery_bank);
            value = -f - rec / bf[static_cast<std::size_t>(m)];
        }
        max_err = std::max(max_err, std::fabs(value - out.target_g[up]));
    }
    out.decomposition_max_err = max_err;
    return out;
}

}  // namespace riskmin
