#include "riskmin/credit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskmin/errors.hpp"
#include "riskmin/parallel.hpp"
#include "riskmin/rng.hpp"

namespace riskmin {

namespace {

void validate_party(const IntensityParams& ip, const std::string& tag,
                    std::vector<std::string>& problems) {
    switch (ip.kind) {
        case IntensityParams::Kind::None:
            break;
        case IntensityParams::Kind::Constant:
            if (!(ip.value >= 0.0)) problems.push_back(tag + ".value: must be >= 0");
            break;
        case IntensityParams::Kind::Jacobi:
            if (!(ip.lambda_min >= 0.0)) problems.push_back(tag + ".lambda_min: must be >= 0");
            if (!(ip.lambda_max > ip.lambda_min))
                problems.push_back(tag + ".lambda_max: must exceed lambda_min");
            if (!(ip.lambda0 >= ip.lambda_min && ip.lambda0 <= ip.lambda_max))
                problems.push_back(tag + ".lambda0: must lie in [lambda_min, lambda_max]");
            if (!(ip.theta >= ip.lambda_min && ip.theta <= ip.lambda_max))
                problems.push_back(tag + ".theta: must lie in [lambda_min, lambda_max]");
            if (!(ip.kappa >= 0.0)) problems.push_back(tag + ".kappa: must be >= 0");
            if (!(std::fabs(ip.rho) < 1.0)) problems.push_back(tag + ".rho: must lie in (-1,1)");
            break;
    }
}

// Evolves one party's intensity along one path into `lam` (n_nodes entries).
// Full-truncation Euler: the raw state may leave the band, but the diffusion
// coefficients and the stored path use the value clamped to
// [lambda_min, lambda_max].  DwAsset/DwPerp map a step index to the Brownian
// increment of that step.
template <typename DwAsset, typename DwPerp>
void evolve_one(const IntensityParams& ip, const TimeGrid& grid, DwAsset&& dw_asset,
                DwPerp&& dw_perp, std::vector<double>& lam) {
    const int n_nodes = grid.n_nodes();
    lam.resize(static_cast<std::size_t>(n_nodes));
    if (ip.kind == IntensityParams::Kind::None) {
        std::fill(lam.begin(), lam.end(), 0.0);
        return;
    }
    if (ip.kind == IntensityParams::Kind::Constant) {
        std::fill(lam.begin(), lam.end(), ip.value);
        return;
    }
    const double dt = grid.dt();
    const double ortho = std::sqrt(1.0 - ip.rho * ip.rho);
    double x = ip.lambda0;
    for (int k = 0; k < n_nodes; ++k) {
        const double clamped = std::clamp(x, ip.lambda_min, ip.lambda_max);
        lam[static_cast<std::size_t>(k)] = clamped;
        if (k == grid.n_steps) break;
        const double diffusion =
            std::sqrt(std::max((ip.lambda_max - clamped) * (clamped - ip.lambda_min), 0.0));
        const double dz = ip.rho * dw_asset(k) + ortho * dw_perp(k);
        x += ip.kappa * (ip.theta - clamped) * dt + diffusion * dz;
    }
}

void accumulate_hazard(const std::vector<double>& lam, double dt, std::vector<double>& hazard) {
    hazard.resize(lam.size());
    hazard[0] = 0.0;
    for (std::size_t k = 1; k < lam.size(); ++k)
        hazard[k] = hazard[k - 1] + 0.5 * (lam[k - 1] + lam[k]) * dt;
}

// First node whose cumulative hazard reaches the trigger; kNoDefault if the
// terminal hazard stays below it.
std::int32_t trigger_node(const std::vector<double>& hazard, double trigger) {
    for (std::size_t k = 1; k < hazard.size(); ++k)
        if (hazard[k] >= trigger) return static_cast<std::int32_t>(k);
    return kNoDefault;
}

double interpolate_time(const std::vector<double>& hazard, std::int32_t node, double trigger,
                        const TimeGrid& grid) {
    if (node == kNoDefault) return std::numeric_limits<double>::infinity();
    const std::size_t k = static_cast<std::size_t>(node);
    const double lo = hazard[k - 1], hi = hazard[k];
    const double frac = (hi > lo) ? (trigger - lo) / (hi - lo) : 1.0;
    return grid.time(node - 1) + frac * grid.dt();
}

}  // namespace

void validate_credit(const CreditParams& params) {
    std::vector<std::string> problems;
    validate_party(params.bank, "credit.bank", problems);
    validate_party(params.counterparty, "credit.counterparty", problems);
    if (!problems.empty()) throw ConfigError(problems);
}

CreditScenarios simulate_credit(const CreditParams& params, const TimeGrid& grid,
                                const MarketPaths& market, std::uint64_t seed, int n_threads) {
    const int n_paths = market.n_paths;
    const int n_nodes = grid.n_nodes();
    const std::size_t node_size = static_cast<std::size_t>(n_nodes) * n_paths;

    CreditScenarios out;
    out.n_paths = n_paths;
    out.grid = grid;
    out.lambda_bank.resize(node_size);
    out.lambda_cpty.resize(node_size);
    out.hazard_bank.resize(node_size);
    out.hazard_cpty.resize(node_size);
    out.node_bank.resize(static_cast<std::size_t>(n_paths));
    out.node_cpty.resize(static_cast<std::size_t>(n_paths));
    out.time_bank.resize(static_cast<std::size_t>(n_paths));
    out.time_cpty.resize(static_cast<std::size_t>(n_paths));
    out.first_node.resize(static_cast<std::size_t>(n_paths));
    out.first_is_cpty.assign(static_cast<std::size_t>(n_paths), 0);
    out.first_time.resize(static_cast<std::size_t>(n_paths));

    if (market.dW.empty())
        throw NumericalError("simulate", "credit drivers", "market bundle carries no assets");
    const CounterRng perp_rng(seed, Stream::IntensityOrthogonal);
    const CounterRng trigger_rng(seed, Stream::DefaultTriggers);
    const CounterRng tie_rng(seed, Stream::TieBreaks);
    const double sqrt_dt = std::sqrt(grid.dt());
    const std::vector<double>& dw0 = market.dW[0];

    parallel_for(n_paths, n_threads, [&](int begin, int end) {
        std::vector<double> lam_b, lam_c, haz_b, haz_c;
        for (int p = begin; p < end; ++p) {
            const std::uint64_t up = static_cast<std::uint64_t>(p);
            auto dw_asset = [&](int k) -> double { return dw0[market.idx(k, p)]; };
            auto perp_bank = [&](int k) -> double {
                return sqrt_dt * perp_rng.normal(up, static_cast<std::uint64_t>(k) * 2u);
            };
            auto perp_cpty = [&](int k) -> double {
                return sqrt_dt * perp_rng.normal(up, static_cast<std::uint64_t>(k) * 2u + 1u);
            };
            evolve_one(params.bank, grid, dw_asset, perp_bank, lam_b);
            evolve_one(params.counterparty, grid, dw_asset, perp_cpty, lam_c);
            accumulate_hazard(lam_b, grid.dt(), haz_b);
            accumulate_hazard(lam_c, grid.dt(), haz_c);
            for (int k = 0; k < n_nodes; ++k) {
                const std::size_t at = out.idx(k, p);
                out.lambda_bank[at] = lam_b[static_cast<std::size_t>(k)];
                out.lambda_cpty[at] = lam_c[static_cast<std::size_t>(k)];
                out.hazard_bank[at] = haz_b[static_cast<std::size_t>(k)];
                out.hazard_cpty[at] = haz_c[static_cast<std::size_t>(k)];
            }

            // Inverse-transform default triggers; -log1p(-u) keeps full
            // precision for small uniforms.
            const double trig_b = -std::log1p(-trigger_rng.uniform(up, 0));
            const double trig_c = -std::log1p(-trigger_rng.uniform(up, 1));
            const std::int32_t nb = trigger_node(haz_b, trig_b);
            const std::int32_t nc = trigger_node(haz_c, trig_c);
            out.node_bank[up] = nb;
            out.node_cpty[up] = nc;
            out.time_bank[up] = interpolate_time(haz_b, nb, trig_b, grid);
            out.time_cpty[up] = interpolate_time(haz_c, nc, trig_c, grid);

            std::int32_t first = std::min(nb, nc);
            std::uint8_t cpty_first = 0;
            if (first != kNoDefault) {
                if (nb == nc) {
                    // Same-node tie: seeded fair coin, counted by the caller.
                    cpty_first = (tie_rng.uniform(up, 0) >= 0.5) ? 1 : 0;
                } else {
                    cpty_first = (nc < nb) ? 1 : 0;
                }
            }
            out.first_node[up] = first;
            out.first_is_cpty[up] = cpty_first;
            out.first_time[up] = (first == kNoDefault)
                                     ? std::numeric_limits<double>::infinity()
                                     : (cpty_first ? out.time_cpty[up] : out.time_bank[up]);
        }
    });

    // Serial tallies keep the counters deterministic under any thread count.
    for (int p = 0; p < n_paths; ++p) {
        const std::uint64_t up = static_cast<std::uint64_t>(p);
        if (out.node_bank[up] != kNoDefault && out.node_bank[up] == out.node_cpty[up])
            ++out.tie_count;
        if (out.first_node[up] != kNoDefault) ++out.default_count;
    }
    return out;
}

void resimulate_intensity_pair(const CreditParams& params, const TimeGrid& grid,
                               const MarketPaths& market, int path, std::uint64_t seed,
                               std::uint64_t inner_index, std::vector<double>& lambda_bank,
                               std::vector<double>& lambda_cpty, std::vector<double>& hazard_bank,
                               std::vector<double>& hazard_cpty) {
    const CounterRng inner_rng(seed, static_cast<std::uint64_t>(Stream::TwoStepInner));
    const double sqrt_dt = std::sqrt(grid.dt());
    const std::uint64_t up = static_cast<std::uint64_t>(path);
    const std::uint64_t steps = static_cast<std::uint64_t>(grid.n_steps);
    const std::vector<double>& dw0 = market.dW[0];

    auto dw_asset = [&](int k) -> double { return dw0[market.idx(k, path)]; };
    auto perp_bank = [&](int k) -> double {
        const std::uint64_t draw = (inner_index * steps + static_cast<std::uint64_t>(k)) * 2u;
        return sqrt_dt * inner_rng.normal(up, draw);
    };
    auto perp_cpty = [&](int k) -> double {
        const std::uint64_t draw = (inner_index * steps + static_cast<std::uint64_t>(k)) * 2u + 1u;
        return sqrt_dt * inner_rng.normal(up, draw);
    };
    evolve_one(params.bank, grid, dw_asset, perp_bank, lambda_bank);
    evolve_one(params.counterparty, grid, dw_asset, perp_cpty, lambda_cpty);
    accumulate_hazard(lambda_bank, grid.dt(), hazard_bank);
    accumulate_hazard(lambda_cpty, grid.dt(), hazard_cpty);
}

}  // namespace riskmin
