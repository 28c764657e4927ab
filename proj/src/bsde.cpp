#include "riskmin/bsde.hpp"

#include <cmath>
#include <string>

#include "riskmin/errors.hpp"
#include "riskmin/parallel.hpp"
#include "riskmin/stats.hpp"

namespace riskmin {

namespace {

void check_finite(std::span<const double> values, int node, const char* what) {
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericalError("solve", what,
                                 "non-finite value at node " + std::to_string(node));
}

}  // namespace

BsdeSolution solve_bsde(const MarketParams& market_params, const CreditParams& credit_params,
                        const TimeGrid& grid, const Accounts& accounts,
                        const MarketPaths& physical, const CreditScenarios& credit,
                        const LedgerPaths& ledger, const RegressionConfig& reg_cfg,
                        int picard_refinements, int n_threads) {
    const int n = physical.n_paths;
    const int d = physical.n_assets;
    const int n_steps = grid.n_steps;
    const double dt = grid.dt();
    const std::size_t total = static_cast<std::size_t>(grid.n_nodes()) * n;

    // Intensity covariates join the basis only when stochastic; constant
    // columns would be dropped as degenerate anyway, this avoids the noise.
    const bool use_lambda_bank =
        reg_cfg.intensity_degree > 0 && credit_params.bank.stochastic();
    const bool use_lambda_cpty =
        reg_cfg.intensity_degree > 0 && credit_params.counterparty.stochastic();

    BsdeSolution out;
    out.ybar.assign(total, 0.0);
    out.zbar.assign(static_cast<std::size_t>(d), std::vector<double>(total, 0.0));
    out.z0.assign(static_cast<std::size_t>(d), 0.0);
    out.z_resid_amp_rms.assign(
        static_cast<std::size_t>(d),
        std::vector<double>(static_cast<std::size_t>(grid.n_nodes()), 0.0));

    // Terminal condition: survival-branch target.
    for (int p = 0; p < n; ++p)
        out.ybar[physical.idx(n_steps, p)] = ledger.terminal[static_cast<std::size_t>(p)];
    check_finite(std::span<const double>(out.ybar.data() + physical.idx(n_steps, 0),
                                         static_cast<std::size_t>(n)),
                 n_steps, "terminal target");

    std::vector<double> target(static_cast<std::size_t>(n));
    std::vector<double> y_arg(static_cast<std::size_t>(n));
    std::vector<double> control(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> theta(static_cast<std::size_t>(d),
                                           std::vector<double>(static_cast<std::size_t>(n)));

    auto fill_theta = [&](int k) {
        for (int i = 0; i < d; ++i) {
            const AssetSpec& asset = market_params.assets[static_cast<std::size_t>(i)];
            const double repo =
                accounts.rate_repo[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            const std::vector<double>& lsp = physical.log_spot[static_cast<std::size_t>(i)];
            std::vector<double>& th = theta[static_cast<std::size_t>(i)];
            parallel_for(n, n_threads, [&](int begin, int end) {
                for (int p = begin; p < end; ++p)
                    th[static_cast<std::size_t>(p)] =
                        market_price_of_risk(asset, repo, lsp[physical.idx(k, p)]);
            });
        }
    };

    auto price_slices = [&](int node) {
        std::vector<std::span<const double>> slices;
        for (int i = 0; i < d; ++i)
            slices.emplace_back(
                physical.log_spot[static_cast<std::size_t>(i)].data() + physical.idx(node, 0),
                static_cast<std::size_t>(n));
        return slices;
    };
    auto extra_slices = [&](int node) {
        std::vector<std::span<const double>> slices;
        if (use_lambda_bank)
            slices.emplace_back(credit.lambda_bank.data() + credit.idx(node, 0),
                                static_cast<std::size_t>(n));
        if (use_lambda_cpty)
            slices.emplace_back(credit.lambda_cpty.data() + credit.idx(node, 0),
                                static_cast<std::size_t>(n));
        return slices;
    };

    // Driver f(t_k, y, z) for one path; z is read from the node-k slice of the
    // fitted integrands.
    auto driver = [&](int k, int p, double y) {
        double acc = 0.0;
        const std::size_t z_at = physical.idx(k, p);
        for (int i = 0; i < d; ++i)
            acc -= out.zbar[static_cast<std::size_t>(i)][z_at] *
                   theta[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)];
        const std::size_t at = credit.idx(k, p);
        acc += (ledger.phi_cpty[at] - y) * credit.lambda_cpty[at];
        acc += (ledger.phi_bank[at] - y) * credit.lambda_bank[at];
        return acc;
    };

    for (int k = n_steps - 1; k >= 1; --k) {
        fill_theta(k);
        LeastSquares reg(price_slices(k), reg_cfg.price_degree, extra_slices(k),
                         reg_cfg.intensity_degree, reg_cfg.condition_threshold);
        if (reg.ridged())
            out.ridge_events.push_back(RidgeEvent{k, reg.condition(), reg.ridge()});

        // Martingale integrands first: Z_i = fit((Y_{k+1} - m) dW_i / dt)
        // where m is the same-basis projection of Y_{k+1}.  Centring by a
        // node-k-measurable control keeps the target unbiased (the increment
        // has conditional mean zero) while removing the 1/dt level variance
        // of the raw product, so the fitted field does not degrade as the
        // grid is refined.
        for (int p = 0; p < n; ++p)
            target[static_cast<std::size_t>(p)] = out.ybar[physical.idx(k + 1, p)];
        reg.fit(target, std::span<double>(control.data(), control.size()));
        for (int i = 0; i < d; ++i) {
            const std::vector<double>& dW = physical.dW[static_cast<std::size_t>(i)];
            for (int p = 0; p < n; ++p)
                target[static_cast<std::size_t>(p)] =
                    (out.ybar[physical.idx(k + 1, p)] - control[static_cast<std::size_t>(p)]) *
                    dW[physical.idx(k, p)] / dt;
            check_finite(target, k, "martingale integrand target");
            std::span<double> z_out(out.zbar[static_cast<std::size_t>(i)].data() +
                                        physical.idx(k, 0),
                                    static_cast<std::size_t>(n));
            reg.fit(target, z_out);
            // Amplitude-weighted residual scale for the orthogonality floor,
            // weighted per path so residual/amplitude correlation is honoured.
            const AssetSpec& asset = market_params.assets[static_cast<std::size_t>(i)];
            const double bf = accounts.funding[static_cast<std::size_t>(k)];
            double ss = 0.0;
            for (int p = 0; p < n; ++p) {
                const std::size_t at = physical.idx(k, p);
                const double amp =
                    physical.spot[static_cast<std::size_t>(i)][at] / bf *
                    asset.vol.at(physical.log_spot[static_cast<std::size_t>(i)][at]);
                const double r = (target[static_cast<std::size_t>(p)] -
                                  z_out[static_cast<std::size_t>(p)]) *
                                 amp;
                ss += r * r;
            }
            out.z_resid_amp_rms[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                std::sqrt(ss / n);
        }

        // Value fit with the explicit driver; the y-argument starts at the
        // next-node value and is refined with the latest fit (Picard passes).
        for (int p = 0; p < n; ++p)
            y_arg[static_cast<std::size_t>(p)] = out.ybar[physical.idx(k + 1, p)];
        std::span<double> y_out(out.ybar.data() + physical.idx(k, 0),
                                static_cast<std::size_t>(n));
        for (int pass = 0; pass <= picard_refinements; ++pass) {
            for (int p = 0; p < n; ++p)
                target[static_cast<std::size_t>(p)] =
                    out.ybar[physical.idx(k + 1, p)] +
                    driver(k, p, y_arg[static_cast<std::size_t>(p)]) * dt;
            check_finite(target, k, "value target");
            reg.fit(target, y_out);
            if (pass < picard_refinements)
                for (int p = 0; p < n; ++p)
                    y_arg[static_cast<std::size_t>(p)] = y_out[static_cast<std::size_t>(p)];
        }
    }

    // Node 0: the state is deterministic, so the value fit collapses to the
    // target mean and the martingale integrand comes from the centred
    // cross-sectional slope against the first-step Brownian increments (the
    // centring removes the level variance, leaving the diffusion scale).
    {
        double mean_y1 = 0.0;
        for (int p = 0; p < n; ++p) mean_y1 += out.ybar[physical.idx(1, p)];
        mean_y1 /= n;
        for (int i = 0; i < d; ++i) {
            const std::vector<double>& dW = physical.dW[static_cast<std::size_t>(i)];
            double acc = 0.0;
            for (int p = 0; p < n; ++p)
                acc += (out.ybar[physical.idx(1, p)] - mean_y1) * dW[physical.idx(0, p)];
            const double z = acc / (static_cast<double>(n) * dt);
            out.z0[static_cast<std::size_t>(i)] = z;
            // Node-0 state is deterministic, so the amplitude is a common factor.
            const AssetSpec& asset = market_params.assets[static_cast<std::size_t>(i)];
            const double amp0 = physical.spot[static_cast<std::size_t>(i)][physical.idx(0, 0)] /
                                accounts.funding[0] *
                                asset.vol.at(physical.log_spot[static_cast<std::size_t>(i)]
                                                              [physical.idx(0, 0)]);
            double ss = 0.0;
            for (int p = 0; p < n; ++p) {
                const double r = (out.ybar[physical.idx(1, p)] - mean_y1) *
                                     dW[physical.idx(0, p)] / dt -
                                 z;
                ss += r * r;
            }
            out.z_resid_amp_rms[static_cast<std::size_t>(i)][0] = amp0 * std::sqrt(ss / n);
            for (int p = 0; p < n; ++p)
                out.zbar[static_cast<std::size_t>(i)][physical.idx(0, p)] = z;
        }
        fill_theta(0);
        // Pass 0: y-argument is the per-path next value; each refinement
        // replaces it with the scalar mean of the previous pass.
        double y_scalar = 0.0;
        for (int pass = 0; pass <= picard_refinements; ++pass) {
            double acc = 0.0;
            for (int p = 0; p < n; ++p) {
                const double ya = (pass == 0) ? out.ybar[physical.idx(1, p)] : y_scalar;
                target[static_cast<std::size_t>(p)] =
                    out.ybar[physical.idx(1, p)] + driver(0, p, ya) * dt;
                acc += target[static_cast<std::size_t>(p)];
            }
            y_scalar = acc / n;
        }
        check_finite(target, 0, "value target");
        const Estimate e = mean_se(target);
        out.y0 = e.value;
        out.y0_se = e.se;
        out.y0_targets = target;
        for (int p = 0; p < n; ++p) out.ybar[physical.idx(0, p)] = out.y0;
    }
    return out;
}

GSolution assemble_g_solution(const BsdeSolution& bsde, const LedgerPaths& ledger,
                              const CreditScenarios& credit) {
    const int n = credit.n_paths;
    const int n_nodes = credit.grid.n_nodes();
    const std::size_t total = static_cast<std::size_t>(n_nodes) * n;

    GSolution out;
    out.y.resize(total);
    out.jump_bank.resize(total);
    out.jump_cpty.resize(total);

    for (std::size_t at = 0; at < total; ++at) {
        out.jump_bank[at] = ledger.phi_bank[at] - bsde.ybar[at];
        out.jump_cpty[at] = ledger.phi_cpty[at] - bsde.ybar[at];
    }
    double max_err = 0.0;
    for (int p = 0; p < n; ++p) {
        const std::size_t up = static_cast<std::size_t>(p);
        const std::int32_t m = credit.first_node[up];
        const int stop = (m == kNoDefault) ? n_nodes - 1 : m;
        double stop_value = 0.0;
        if (m == kNoDefault) {
            stop_value = bsde.ybar[static_cast<std::size_t>(stop) * n + up];
        } else {
            const std::size_t stop_at = static_cast<std::size_t>(stop) * n + up;
            stop_value = credit.first_is_cpty[up] ? ledger.phi_cpty[stop_at]
                                                  : ledger.phi_bank[stop_at];
        }
        for (int k = 0; k < n_nodes; ++k) {
            const std::size_t at = static_cast<std::size_t>(k) * n + up;
            out.y[at] = (k < stop) ? bsde.ybar[at] : stop_value;
        }
        max_err = std::max(max_err, std::fabs(stop_value - ledger.target_g[up]));
    }
    out.max_roundtrip_err = max_err;
    return out;
}

}  // namespace riskmin
