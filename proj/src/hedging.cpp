#include "riskmin/hedging.hpp"

#include <algorithm>
#include <cmath>

#include "riskmin/parallel.hpp"

namespace riskmin {

namespace {

// First node at which the scenario is in default; n_nodes when it survives.
inline int stop_node(const CreditScenarios& credit, int p, int n_nodes) {
    const std::int32_t m = credit.first_node[static_cast<std::size_t>(p)];
    return (m == kNoDefault) ? n_nodes : static_cast<int>(m);
}

}  // namespace

HedgePaths extract_strategy(const MarketParams& market_params, const TimeGrid& grid,
                            const Accounts& accounts, const MarketPaths& physical,
                            const CreditScenarios& credit, const LedgerPaths& ledger,
                            const CloseOutPaths& closeout, const BsdeSolution& bsde,
                            const GSolution& gsol, int n_threads) {
    const int n = physical.n_paths;
    const int d = physical.n_assets;
    const int n_nodes = grid.n_nodes();
    const std::size_t total = static_cast<std::size_t>(n_nodes) * n;

    HedgePaths out;
    out.n_paths = n;
    out.n_assets = d;
    out.xi.assign(static_cast<std::size_t>(d), std::vector<double>(total, 0.0));
    out.gains.assign(total, 0.0);
    out.cost.assign(total, 0.0);
    out.psi_fund.assign(total, 0.0);
    out.f_arc.assign(total, 0.0);
    out.wealth.assign(total, 0.0);

    parallel_for(n, n_threads, [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            const std::size_t up = static_cast<std::size_t>(p);
            const int stop = stop_node(credit, p, n_nodes);
            const bool survives = stop == n_nodes;

            // Positions, live strictly before the stop and closed at maturity.
            for (int i = 0; i < d; ++i) {
                const AssetSpec& asset = market_params.assets[static_cast<std::size_t>(i)];
                std::vector<double>& xi = out.xi[static_cast<std::size_t>(i)];
                const int last = std::min(stop, n_nodes - 1);
                for (int k = 0; k < last; ++k) {
                    const std::size_t at = physical.idx(k, p);
                    const double s = physical.spot[static_cast<std::size_t>(i)][at];
                    const double sigma = std::max(
                        std::fabs(asset.vol.at(physical.log_spot[static_cast<std::size_t>(i)][at])),
                        kSigmaFloor);
                    xi[at] = bsde.zbar[static_cast<std::size_t>(i)][at] *
                             accounts.funding[static_cast<std::size_t>(k)] / (s * sigma);
                }
            }

            // Discounted trading gains, accumulated over steps whose left node
            // is alive and frozen afterwards.
            double acc = 0.0;
            for (int k = 1; k < n_nodes; ++k) {
                if (k <= stop) {
                    const int l = k - 1;
                    const std::size_t at_l = physical.idx(l, p);
                    const std::size_t at_r = physical.idx(k, p);
                    for (int i = 0; i < d; ++i) {
                        const std::vector<double>& repo =
                            accounts.repo[static_cast<std::size_t>(i)];
                        const std::vector<double>& spot =
                            physical.spot[static_cast<std::size_t>(i)];
                        const double tilde_step = spot[at_r] / repo[static_cast<std::size_t>(k)] -
                                                  spot[at_l] / repo[static_cast<std::size_t>(l)];
                        acc += out.xi[static_cast<std::size_t>(i)][at_l] *
                               (repo[static_cast<std::size_t>(l)] /
                                accounts.funding[static_cast<std::size_t>(l)]) *
                               tilde_step;
                    }
                }
                out.gains[physical.idx(k, p)] = acc;
            }

            // Cost, accrued-flows leg, funded position and wealth.
            for (int k = 0; k < n_nodes; ++k) {
                const std::size_t at = physical.idx(k, p);
                out.cost[at] = gsol.y[at] - out.gains[at];
                if (k < stop) {
                    out.f_arc[at] = ledger.cum_flows[at];
                    out.psi_fund[at] = gsol.y[at] + out.f_arc[at];
                    out.wealth[at] =
                        out.psi_fund[at] * accounts.funding[static_cast<std::size_t>(k)] -
                        closeout.collateral[at];
                } else {
                    out.f_arc[at] = -ledger.target_g[up];
                    out.psi_fund[at] = gsol.y[at] + out.f_arc[at];
                    out.wealth[at] = 0.0;
                }
            }
            if (survives) {
                // Maturity unwind: the terminal target makes the funded
                // position worth exactly the posted collateral.
                const std::size_t at = physical.idx(n_nodes - 1, p);
                out.f_arc[at] = ledger.cum_flows[at];
                out.psi_fund[at] = gsol.y[at] + out.f_arc[at];
                out.wealth[at] =
                    out.psi_fund[at] * accounts.funding[static_cast<std::size_t>(n_nodes - 1)] -
                    closeout.collateral[at];
            }
        }
    });
    return out;
}

FsChecks fs_checks(const MarketParams& market_params, const ContractParams& contract,
                   const TimeGrid& grid, const Accounts& accounts,
                   const MarketPaths& physical, const CreditScenarios& credit,
                   const LedgerPaths& ledger, const CloseOutPaths& closeout,
                   const BsdeSolution& bsde, const GSolution& gsol,
                   const HedgePaths& hedge, int n_threads) {
    const int n = physical.n_paths;
    const int d = physical.n_assets;
    const int n_steps = grid.n_steps;
    const int n_nodes = grid.n_nodes();
    const double dt = grid.dt();

    FsChecks out;
    out.residual.assign(static_cast<std::size_t>(n), 0.0);

    // Decomposition residual: target - (Y_0 + gains_stop + H_stop), where the
    // orthogonal part accumulates, for every step alive at its left node,
    //   dH_l = sum_j U^j_l (1{j defaults at l+1} - lambda^j_l dt).
    const double y0 = gsol.y[physical.idx(0, 0)];
    parallel_for(n, n_threads, [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            const std::size_t up = static_cast<std::size_t>(p);
            const int stop = stop_node(credit, p, n_nodes);
            const bool survives = stop == n_nodes;
            const int stop_k = survives ? n_nodes - 1 : stop;

            double h = 0.0;
            const int last_left = std::min(stop, n_nodes - 1);
            for (int l = 0; l < last_left; ++l) {
                const std::size_t at = credit.idx(l, p);
                double dh = -(gsol.jump_bank[at] * credit.lambda_bank[at] +
                              gsol.jump_cpty[at] * credit.lambda_cpty[at]) *
                            dt;
                if (!survives && l == stop - 1)
                    dh += credit.first_is_cpty[up] ? gsol.jump_cpty[at] : gsol.jump_bank[at];
                h += dh;
            }
            out.residual[up] =
                ledger.target_g[up] - (y0 + hedge.gains[physical.idx(stop_k, p)] + h);
        }
    });

    {
        const Estimate t = mean_se(ledger.target_g);
        double var = 0.0;
        for (double g : ledger.target_g) var += (g - t.value) * (g - t.value);
        out.target_sd = std::sqrt(var / std::max(1, n - 1));
        double ss = 0.0;
        for (double r : out.residual) ss += r * r;
        const double rms = std::sqrt(ss / n);
        out.residual_rel_l2 = (out.target_sd > 0.0) ? rms / out.target_sd : rms;
    }

    // Martingale and orthogonality diagnostics per step.  Each step reduces
    // over the full bundle in path order, so results do not depend on the
    // thread count.  Both SEs carry a common-mode floor on top of the naive
    // cross-sectional term: the in-sample fits tie the per-step mean (resp.
    // residual-proxy covariance) to a single regression-noise draw shared by
    // all paths, so without the floor an exact solver would still show large
    // z-scores.  For the cost increments the floor is the variance of
    // avg_p(sum_i z_i dW_i), which is dt avg_p(sum_i z_i^2)/n; for the
    // orthogonality it is dt rms_p((S sigma/B^f) x integrand-fit residual)
    // / sqrt(n), weighted per path so residual/amplitude correlation is
    // honoured (a sandwich-style variance for the projected fit noise).
    out.cost_increments.assign(static_cast<std::size_t>(n_steps), Estimate{});
    out.orthogonality.assign(static_cast<std::size_t>(d),
                             std::vector<Estimate>(static_cast<std::size_t>(n_steps)));
    parallel_for(n_steps, n_threads, [&](int begin, int end) {
        std::vector<double> dc(static_cast<std::size_t>(n));
        std::vector<double> proxy(static_cast<std::size_t>(n));
        for (int l = begin; l < end; ++l) {
            double z2_sum = 0.0;
            for (int p = 0; p < n; ++p) {
                dc[static_cast<std::size_t>(p)] =
                    hedge.cost[physical.idx(l + 1, p)] - hedge.cost[physical.idx(l, p)];
                if (l < stop_node(credit, p, n_nodes)) {
                    const std::size_t at = physical.idx(l, p);
                    for (int i = 0; i < d; ++i) {
                        const double z = bsde.zbar[static_cast<std::size_t>(i)][at];
                        z2_sum += z * z;
                    }
                }
            }
            Estimate c = mean_se(dc);
            c.se = std::sqrt(c.se * c.se +
                             dt * z2_sum / (static_cast<double>(n) * static_cast<double>(n)));
            out.cost_increments[static_cast<std::size_t>(l)] = c;
            for (int i = 0; i < d; ++i) {
                const AssetSpec& asset = market_params.assets[static_cast<std::size_t>(i)];
                const std::vector<double>& spot = physical.spot[static_cast<std::size_t>(i)];
                const std::vector<double>& lsp = physical.log_spot[static_cast<std::size_t>(i)];
                const std::vector<double>& dW = physical.dW[static_cast<std::size_t>(i)];
                for (int p = 0; p < n; ++p) {
                    const bool alive = l < stop_node(credit, p, n_nodes);
                    const std::size_t at = physical.idx(l, p);
                    proxy[static_cast<std::size_t>(p)] =
                        alive ? (spot[at] / accounts.funding[static_cast<std::size_t>(l)]) *
                                    asset.vol.at(lsp[at]) * dW[at]
                              : 0.0;
                }
                Estimate o = covariance_se(dc, proxy);
                const double sz = bsde.z_resid_amp_rms[static_cast<std::size_t>(i)]
                                                      [static_cast<std::size_t>(l)];
                const double floor = dt * sz / std::sqrt(static_cast<double>(n));
                o.se = std::sqrt(o.se * o.se + floor * floor);
                out.orthogonality[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] = o;
            }
        }
    });
    for (int l = 0; l < n_steps; ++l) {
        const Estimate& c = out.cost_increments[static_cast<std::size_t>(l)];
        if (c.se > 0.0) out.worst_cost_z = std::max(out.worst_cost_z, std::fabs(c.value) / c.se);
        for (int i = 0; i < d; ++i) {
            const Estimate& o =
                out.orthogonality[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
            if (o.se > 0.0)
                out.worst_orthogonality_z =
                    std::max(out.worst_orthogonality_z, std::fabs(o.value) / o.se);
        }
    }

    // Zero-wealth roundtrip at the stop, recoveries recomputed from exposure.
    double zmax = 0.0;
    for (int p = 0; p < n; ++p) {
        const std::size_t up = static_cast<std::size_t>(p);
        const int stop = stop_node(credit, p, n_nodes);
        double resid = 0.0;
        if (stop == n_nodes) {
            const std::size_t at = physical.idx(n_nodes - 1, p);
            resid = gsol.y[at] + ledger.cum_flows[at] -
                    closeout.collateral[at] / accounts.funding[static_cast<std::size_t>(n_nodes - 1)];
        } else {
            const std::size_t at = physical.idx(stop, p);
            const double c_prev = closeout.collateral[physical.idx(stop - 1, p)];
            const double y_exp = closeout.exposure[at];
            const double rec = credit.first_is_cpty[up]
                                   ? recovery_cpty_first(y_exp, contract.recovery_cpty)
                                   : recovery_bank_first(y_exp, contract.recovery_bank);
            const double bf = accounts.funding[static_cast<std::size_t>(stop)];
            resid = (gsol.y[at] + ledger.pre_flows[at] - c_prev / bf) + (c_prev + rec) / bf;
        }
        zmax = std::max(zmax, std::fabs(resid));
    }
    out.zero_achieving_max_err = zmax;

    // Accumulated squared market price of risk against the model bound.
    const double bound = static_cast<double>(d) *
                         market_params.bounds.market_price_of_risk *
                         market_params.bounds.market_price_of_risk * grid.horizon;
    out.quadratic_bound = bound;
    const double slack = 1e-12 * (1.0 + bound);
    double qmax = 0.0;
    long violations = 0;
    for (int p = 0; p < n; ++p) {
        const int last_left = std::min(stop_node(credit, p, n_nodes), n_steps);
        double q = 0.0;
        for (int l = 0; l < last_left; ++l) {
            for (int i = 0; i < d; ++i) {
                const AssetSpec& asset = market_params.assets[static_cast<std::size_t>(i)];
                const double theta = market_price_of_risk(
                    asset,
                    accounts.rate_repo[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)],
                    physical.log_spot[static_cast<std::size_t>(i)][physical.idx(l, p)]);
                q += theta * theta * dt;
            }
        }
        qmax = std::max(qmax, q);
        if (q > bound + slack) ++violations;
    }
    out.quadratic_max = qmax;
    out.quadratic_violations = violations;
    return out;
}

}  // namespace riskmin
