#include "riskmin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace riskmin {

bool Estimate::within(double reference, double n_se) const {
    return std::fabs(value - reference) <= n_se * se;
}

Estimate mean_se(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean_se: empty sample");
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    const double var = (values.size() > 1) ? ss / (n - 1.0) : 0.0;
    return Estimate{mean, std::sqrt(var / n)};
}

Estimate covariance_se(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("covariance_se: samples must be equal-sized and non-empty");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    // Covariance as the mean of centred products; its SE is the SE of that mean.
    double sum = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double p = (a[i] - ma) * (b[i] - mb);
        sum += p;
        ss += p * p;
    }
    const double mean = sum / n;
    const double var = (a.size() > 1) ? (ss / n - mean * mean) * n / (n - 1.0) : 0.0;
    return Estimate{mean, std::sqrt(std::max(var, 0.0) / n)};
}

double superquantile(std::span<const double> values, double alpha) {
    if (values.empty()) throw std::invalid_argument("superquantile: empty sample");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("superquantile: alpha must lie in (0,1)");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    // Average of the top (1-alpha) mass with a fractional weight on the
    // boundary order statistic.
    const double tail = (1.0 - alpha) * static_cast<double>(sorted.size());
    const std::size_t whole = static_cast<std::size_t>(std::floor(tail));
    double acc = 0.0;
    for (std::size_t i = 0; i < whole && i < sorted.size(); ++i) acc += sorted[i];
    const double frac = tail - static_cast<double>(whole);
    if (whole < sorted.size() && frac > 0.0) acc += frac * sorted[whole];
    return acc / tail;
}

std::size_t superquantile_min_sample(double alpha) {
    return static_cast<std::size_t>(std::ceil(1.0 / (1.0 - alpha)));
}

}  // namespace riskmin
