#include "riskmin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskmin {

double PiecewiseRate::at(double t) const {
    if (values.empty()) throw std::invalid_argument("PiecewiseRate: no values");
    if (values.size() != times.size() + 1)
        throw std::invalid_argument("PiecewiseRate: values must have times.size()+1 entries");
    // First breakpoint strictly above t selects the segment.
    auto it = std::upper_bound(times.begin(), times.end(), t);
    return values[static_cast<size_t>(it - times.begin())];
}

std::vector<double> PiecewiseRate::node_values(const TimeGrid& grid) const {
    std::vector<double> out(static_cast<size_t>(grid.n_nodes()));
    for (int k = 0; k < grid.n_nodes(); ++k) out[static_cast<size_t>(k)] = at(grid.time(k));
    return out;
}

std::vector<double> PiecewiseRate::account(const TimeGrid& grid) const {
    std::vector<double> out(static_cast<size_t>(grid.n_nodes()));
    const double dt = grid.dt();
    double log_acc = 0.0;
    out[0] = 1.0;
    for (int k = 1; k < grid.n_nodes(); ++k) {
        log_acc += at(grid.time(k - 1)) * dt;
        out[static_cast<size_t>(k)] = std::exp(log_acc);
    }
    return out;
}

double PiecewiseRate::min_value() const {
    if (values.empty()) throw std::invalid_argument("PiecewiseRate: no values");
    return *std::min_element(values.begin(), values.end());
}

double PiecewiseRate::max_value() const {
    if (values.empty()) throw std::invalid_argument("PiecewiseRate: no values");
    return *std::max_element(values.begin(), values.end());
}

}  // namespace riskmin
