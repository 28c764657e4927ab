#pragma once

#include <vector>

namespace riskmin {

// Uniform time grid t_k = k * horizon / n_steps, k = 0..n_steps.
// All processes are stored on the n_steps + 1 nodes; increments (Brownian
// draws, accrual terms) live on the n_steps intervals.
struct TimeGrid {
    double horizon = 1.0;  // final maturity T
    int n_steps = 1;       // number of intervals

    double dt() const { return horizon / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    double time(int k) const { return horizon * k / n_steps; }
};

// Right-continuous step function of time, used for every deterministic rate
// (funding, discount, repo, collateral remuneration).  `times` holds the
// breakpoints after 0 in increasing order; value(t) = values[i] on
// [times[i-1], times[i]) with times[-1] = 0 and times[n] = +infinity, so
// `values` has exactly times.size() + 1 entries.
struct PiecewiseRate {
    std::vector<double> times;   // strictly increasing breakpoints (may be empty)
    std::vector<double> values;  // one more entry than `times`

    static PiecewiseRate constant(double v) { return PiecewiseRate{{}, {v}}; }

    double at(double t) const;

    // Rate sampled at the left endpoint of every step: out[k] = at(t_k) for
    // k = 0..n_steps (the last entry is only used by callers that need a
    // value at maturity).
    std::vector<double> node_values(const TimeGrid& grid) const;

    // Accumulation account B_k = exp(sum_{l<k} at(t_l) dt), B_0 = 1, using the
    // left-point integral convention shared by the whole engine.
    std::vector<double> account(const TimeGrid& grid) const;

    double min_value() const;
    double max_value() const;
};

}  // namespace riskmin
