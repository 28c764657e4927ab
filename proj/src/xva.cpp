#include "riskmin/xva.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskmin/errors.hpp"
#include "riskmin/parallel.hpp"

namespace riskmin {

namespace {

inline int stop_node(const CreditScenarios& credit, int p, int n_nodes) {
    const std::int32_t m = credit.first_node[static_cast<std::size_t>(p)];
    return (m == kNoDefault) ? n_nodes : static_cast<int>(m);
}

// Collateral remuneration rate: held margin (C >= 0) accrues the borrow leg,
// posted margin the lend leg.  Must match the ledger accrual convention.
inline double collateral_rate(const Accounts& accounts, int node, double collateral) {
    const std::size_t k = static_cast<std::size_t>(node);
    return collateral >= 0.0 ? accounts.rate_coll_borrow[k] : accounts.rate_coll_lend[k];
}

}  // namespace

XvaResults compute_xva(const XvaParams& params, const CreditParams& credit_params,
                       const ContractParams& contract, const TimeGrid& grid,
                       const Accounts& accounts, const MarketPaths& physical,
                       const CreditScenarios& credit, const CloseOutPaths& closeout,
                       const FlowAmounts& flows, const BsdeSolution& bsde,
                       const HedgePaths& hedge, int n_threads) {
    const int n = physical.n_paths;
    const int n_steps = grid.n_steps;
    const int n_nodes = grid.n_nodes();
    const double dt = grid.dt();

    if (physical.density.empty())
        throw NumericalError("adjustments", "density",
                             "physical bundle carries no state-price density");
    if (static_cast<int>(bsde.y0_targets.size()) != n)
        throw NumericalError("adjustments", "initial targets",
                             "backward solution does not match the bundle");

    const double lgd_cpty = 1.0 - contract.recovery_cpty;
    const double lgd_bank = 1.0 - contract.recovery_bank;
    const double c0 = closeout.collateral[physical.idx(0, 0)];

    XvaResults out;

    // Per-scenario representatives of every time-0 quantity.  The debit
    // adjustment is accumulated without its loss-given-default factor so both
    // display conventions scale the same base.
    std::vector<double> vclean(static_cast<std::size_t>(n), 0.0);
    std::vector<double> cva_dir(static_cast<std::size_t>(n), 0.0);
    std::vector<double> dva_dir_base(static_cast<std::size_t>(n), 0.0);
    std::vector<double> cva_int(static_cast<std::size_t>(n), 0.0);
    std::vector<double> dva_int_base(static_cast<std::size_t>(n), 0.0);
    std::vector<double> colva(static_cast<std::size_t>(n), 0.0);
    std::vector<double> fva(static_cast<std::size_t>(n), 0.0);

    parallel_for(n, n_threads, [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            const std::size_t up = static_cast<std::size_t>(p);
            const int stop = stop_node(credit, p, n_nodes);

            // Clean value: density-weighted discounted contract flows.
            double vc = 0.0;
            for (const auto& [node, amounts] : flows.at_node) {
                const std::size_t at = physical.idx(node, p);
                vc -= physical.density[at] * amounts[up] /
                      accounts.discount[static_cast<std::size_t>(node)];
            }
            vclean[up] = vc;

            // Credit adjustments, intensity form: survival-weighted time
            // integral over the full horizon (the realized default time is
            // integrated out).
            double ci = 0.0, di = 0.0;
            for (int k = 0; k < n_steps; ++k) {
                const std::size_t at = physical.idx(k, p);
                const double w = physical.density[at] /
                                 accounts.discount[static_cast<std::size_t>(k)] *
                                 std::exp(-credit.hazard_bank[at] - credit.hazard_cpty[at]) * dt;
                const double y = closeout.exposure[at];
                ci += w * credit.lambda_cpty[at] * std::max(y, 0.0);
                di += w * credit.lambda_bank[at] * std::max(-y, 0.0);
            }
            cva_int[up] = lgd_cpty * ci;
            dva_int_base[up] = di;

            // Credit adjustments, direct form: settlement at the realized
            // first default.
            if (stop < n_nodes) {
                const std::size_t at = physical.idx(stop, p);
                const double w = physical.density[at] /
                                 accounts.discount[static_cast<std::size_t>(stop)];
                const double y = closeout.exposure[at];
                if (credit.first_is_cpty[up])
                    cva_dir[up] = w * lgd_cpty * std::max(y, 0.0);
                else
                    dva_dir_base[up] = w * std::max(-y, 0.0);
            }

            // Collateral carry over the live nodes.
            double cv = 0.0, fv = 0.0;
            const int live = std::min(stop, n_steps);
            for (int k = 0; k < live; ++k) {
                const std::size_t uk = static_cast<std::size_t>(k);
                const std::size_t at = physical.idx(k, p);
                const double c = closeout.collateral[at];
                cv += physical.density[at] * c / accounts.discount[uk] *
                      (collateral_rate(accounts, k, c) - accounts.rate_funding[uk]) * dt;
                fv += physical.density[at] * hedge.wealth[at] / accounts.discount[uk] *
                      (accounts.rate_funding[uk] - accounts.rate_discount[uk]) * dt;
            }
            colva[up] = cv;
            fva[up] = fv;
        }
    });

    out.clean = mean_se(vclean);
    out.cva_direct = mean_se(cva_dir);
    out.cva_intensity = mean_se(cva_int);
    {
        Estimate b = mean_se(dva_dir_base);
        out.dva_direct = Estimate{lgd_bank * b.value, lgd_bank * b.se};
        b = mean_se(dva_int_base);
        out.dva_intensity = Estimate{lgd_bank * b.value, lgd_bank * b.se};
    }
    out.colva = mean_se(colva);

    // Estimator selection; an empty default sample makes the direct forms
    // degenerate, so they fall back to the intensity forms with a warning.
    CvaEstimator mode = params.cva_estimator;
    if (mode == CvaEstimator::Direct && credit.default_count == 0) {
        out.direct_fallback = true;
        out.warnings.push_back(
            "no defaulted scenarios in the bundle; credit adjustments use the "
            "intensity estimator instead of the requested direct one");
        mode = CvaEstimator::Intensity;
    }
    const std::vector<double>& cva_sel = (mode == CvaEstimator::Direct) ? cva_dir : cva_int;
    const std::vector<double>& dva_base_sel =
        (mode == CvaEstimator::Direct) ? dva_dir_base : dva_int_base;
    out.cva = (mode == CvaEstimator::Direct) ? out.cva_direct : out.cva_intensity;
    const double dva_report_factor = params.strict_display ? lgd_cpty : lgd_bank;
    {
        const Estimate b = mean_se(dva_base_sel);
        out.dva = Estimate{dva_report_factor * b.value, dva_report_factor * b.se};
    }

    // Funding adjustment.  The hedge form integrates the realized portfolio
    // wealth; the fixed-point form iterates the adjustment identity with a
    // flat add-on to the clean-value profile, starting from the clean value
    // alone, until the time-0 value stops moving.
    if (params.fva_estimator == FvaEstimator::FixedPoint) {
        const double scale = std::max(1.0, std::fabs(out.clean.value));
        const double cva0 = out.cva.value;
        const double dva0 = lgd_bank * mean_se(dva_base_sel).value;
        const double colva0 = out.colva.value;
        double adj = 0.0;  // add-on of the current iterate; starts at clean alone
        double fva_prev = 0.0;
        int iters = 0;
        bool converged = false;
        while (!converged && iters < params.fixed_point_max_iters) {
            double acc = 0.0;
            for (int p = 0; p < n; ++p) {
                const int live = std::min(stop_node(credit, p, n_nodes), n_steps);
                double fv = 0.0;
                for (int k = 0; k < live; ++k) {
                    const std::size_t uk = static_cast<std::size_t>(k);
                    const std::size_t at = physical.idx(k, p);
                    fv += physical.density[at] * (closeout.clean[at] + adj) /
                          accounts.discount[uk] *
                          (accounts.rate_funding[uk] - accounts.rate_discount[uk]) * dt;
                }
                fva[static_cast<std::size_t>(p)] = fv;
                acc += fv;
            }
            const double fva_now = acc / n;
            ++iters;
            converged = std::fabs(fva_now - fva_prev) <= params.fixed_point_tol * scale;
            fva_prev = fva_now;
            adj = cva0 - dva0 + colva0 - fva_now;
        }
        out.fva_iterations = iters;
        if (!converged)
            out.warnings.push_back("funding fixed point hit the iteration cap");
    }
    out.fva = mean_se(fva);

    // Headline values and the adjustment-identity gap.  The gap compares the
    // backward-solution targets (net of initial collateral) with the summed
    // decomposition on the same scenarios; it always uses the desk
    // loss-given-default factor, which is what the hedge settles.
    std::vector<double> hv(static_cast<std::size_t>(n));
    std::vector<double> total(static_cast<std::size_t>(n));
    std::vector<double> gap(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
        const std::size_t up = static_cast<std::size_t>(p);
        hv[up] = bsde.y0_targets[up] - c0;
        const double consistent =
            vclean[up] + cva_sel[up] - lgd_bank * dva_base_sel[up] + colva[up] - fva[up];
        total[up] = vclean[up] + cva_sel[up] - dva_report_factor * dva_base_sel[up] +
                    colva[up] - fva[up];
        gap[up] = hv[up] - consistent;
    }
    out.hedge_value = mean_se(hv);
    out.total = mean_se(total);
    out.gap = mean_se(gap);

    // Conditional-intensity estimator: the default-risk factor is replaced by
    // its average over resimulations of the orthogonal noise with the asset
    // drivers held fixed, then priced on the outer scenarios.
    if (params.two_step) {
        if (params.inner_paths < 2)
            throw ConfigError(
                std::string("two-step estimator requires at least 2 inner resimulations"));
        out.two_step_enabled = true;
        std::vector<double> cva2(static_cast<std::size_t>(n), 0.0);
        parallel_for(n, n_threads, [&](int begin, int end) {
            std::vector<double> lb, lc, gb, gc;
            std::vector<double> factor(static_cast<std::size_t>(n_steps));
            for (int p = begin; p < end; ++p) {
                const std::size_t up = static_cast<std::size_t>(p);
                std::fill(factor.begin(), factor.end(), 0.0);
                for (int j = 0; j < params.inner_paths; ++j) {
                    resimulate_intensity_pair(credit_params, grid, physical, p, physical.seed,
                                              static_cast<std::uint64_t>(j), lb, lc, gb, gc);
                    for (int k = 0; k < n_steps; ++k) {
                        const std::size_t uk = static_cast<std::size_t>(k);
                        factor[uk] += std::exp(-gb[uk] - gc[uk]) * lc[uk];
                    }
                }
                double acc = 0.0;
                for (int k = 0; k < n_steps; ++k) {
                    const std::size_t uk = static_cast<std::size_t>(k);
                    const std::size_t at = physical.idx(k, p);
                    acc += physical.density[at] / accounts.discount[uk] *
                           (factor[uk] / params.inner_paths) *
                           std::max(closeout.exposure[at], 0.0) * dt;
                }
                cva2[up] = lgd_cpty * acc;
            }
        });
        out.cva_two_step = mean_se(cva2);
    }

    // Capital adjustment: per-step expected shortfall of cost increments over
    // the surviving scenarios, remunerated at the hurdle rate along each
    // scenario until its stop.
    if (params.kva.enabled) {
        out.kva_enabled = true;
        out.es_nodes.assign(static_cast<std::size_t>(n_steps), 0.0);
        out.es_skipped.assign(static_cast<std::size_t>(n_steps), 0);
        if (params.kva.hurdle != 0.0) {
            int hz_steps = 1;
            if (params.kva.horizon > 0.0) {
                const double ratio = params.kva.horizon / dt;
                hz_steps = static_cast<int>(std::llround(ratio));
                if (hz_steps < 1 || std::fabs(ratio - hz_steps) > 1e-9 * std::max(1.0, ratio))
                    throw ConfigError({"capital horizon " + std::to_string(params.kva.horizon) +
                                       " does not sit on the time grid"});
            }
            const std::size_t min_sample = superquantile_min_sample(params.kva.alpha);
            std::vector<double> losses;
            losses.reserve(static_cast<std::size_t>(n));
            long skipped = 0;
            for (int u = 0; u < n_steps; ++u) {
                losses.clear();
                const int ahead = std::min(u + hz_steps, n_nodes - 1);
                for (int p = 0; p < n; ++p)
                    if (stop_node(credit, p, n_nodes) > u)
                        losses.push_back(hedge.cost[physical.idx(ahead, p)] -
                                         hedge.cost[physical.idx(u, p)]);
                if (losses.size() < min_sample) {
                    out.es_skipped[static_cast<std::size_t>(u)] = 1;
                    ++skipped;
                    continue;
                }
                out.es_nodes[static_cast<std::size_t>(u)] =
                    std::max(superquantile(losses, params.kva.alpha), 0.0);
            }
            if (skipped > 0)
                out.warnings.push_back(
                    std::to_string(skipped) +
                    " capital nodes skipped: surviving sample too thin for the "
                    "configured confidence");
            std::vector<double> kva_p(static_cast<std::size_t>(n), 0.0);
            for (int p = 0; p < n; ++p) {
                const std::size_t up = static_cast<std::size_t>(p);
                const int live = std::min(stop_node(credit, p, n_nodes), n_steps);
                double acc = 0.0;
                for (int u = 0; u < live; ++u) {
                    const std::size_t uu = static_cast<std::size_t>(u);
                    acc += physical.density[physical.idx(u, p)] / accounts.discount[uu] *
                           out.es_nodes[uu] * dt;
                }
                kva_p[up] = params.kva.hurdle * acc;
            }
            out.kva = mean_se(kva_p);
            std::vector<double> vf(static_cast<std::size_t>(n));
            for (int p = 0; p < n; ++p)
                vf[static_cast<std::size_t>(p)] =
                    hv[static_cast<std::size_t>(p)] + kva_p[static_cast<std::size_t>(p)];
            out.v_full = mean_se(vf);
        } else {
            out.kva = Estimate{0.0, 0.0};
            out.v_full = out.hedge_value;
        }
    } else {
        out.v_full = out.hedge_value;
    }

    // Per-step integrand profiles for plot export.
    out.epe.assign(static_cast<std::size_t>(n_steps), 0.0);
    out.ene.assign(static_cast<std::size_t>(n_steps), 0.0);
    out.collateral_mean.assign(static_cast<std::size_t>(n_steps), 0.0);
    out.cva_steps.assign(static_cast<std::size_t>(n_steps), 0.0);
    out.dva_steps.assign(static_cast<std::size_t>(n_steps), 0.0);
    out.colva_steps.assign(static_cast<std::size_t>(n_steps), 0.0);
    out.fva_steps.assign(static_cast<std::size_t>(n_steps), 0.0);
    parallel_for(n_steps, n_threads, [&](int begin, int end) {
        for (int k = begin; k < end; ++k) {
            const std::size_t uk = static_cast<std::size_t>(k);
            double epe = 0.0, ene = 0.0, cm = 0.0, cs = 0.0, ds = 0.0, os = 0.0, fs = 0.0;
            for (int p = 0; p < n; ++p) {
                const std::size_t at = physical.idx(k, p);
                const double w = physical.density[at] / accounts.discount[uk];
                const double y = closeout.exposure[at];
                epe += w * std::max(y, 0.0);
                ene += w * std::max(-y, 0.0);
                cm += physical.density[at] * closeout.collateral[at];
                const double surv = std::exp(-credit.hazard_bank[at] - credit.hazard_cpty[at]);
                cs += lgd_cpty * w * surv * credit.lambda_cpty[at] * std::max(y, 0.0) * dt;
                ds += lgd_bank * w * surv * credit.lambda_bank[at] * std::max(-y, 0.0) * dt;
                if (k < stop_node(credit, p, n_nodes)) {
                    const double c = closeout.collateral[at];
                    os += w * c * (collateral_rate(accounts, k, c) - accounts.rate_funding[uk]) *
                          dt;
                    fs += w * hedge.wealth[at] *
                          (accounts.rate_funding[uk] - accounts.rate_discount[uk]) * dt;
                }
            }
            out.epe[uk] = epe / n;
            out.ene[uk] = ene / n;
            out.collateral_mean[uk] = cm / n;
            out.cva_steps[uk] = cs / n;
            out.dva_steps[uk] = ds / n;
            out.colva_steps[uk] = os / n;
            out.fva_steps[uk] = fs / n;
        }
    });

    return out;
}

}  // namespace riskmin
