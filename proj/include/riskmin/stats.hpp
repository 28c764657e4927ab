#pragma once

#include <cstddef>
#include <span>

namespace riskmin {

// Monte Carlo point estimate with its standard error.
struct Estimate {
    double value = 0.0;  // sample mean
    double se = 0.0;     // standard error of the mean

    // True when |value - reference| <= n_se * se.
    bool within(double reference, double n_se) const;
};

// Sample mean and standard error of the mean (sample std / sqrt(n)).
Estimate mean_se(std::span<const double> values);

// Sample mean and SE of the elementwise product a*b minus mean(a)*mean(b),
// i.e. the sample covariance together with the standard error of the
// covariance estimator (delta-method on the centred products).
Estimate covariance_se(std::span<const double> a, std::span<const double> b);

// Empirical superquantile (expected shortfall) at confidence level alpha:
// the average of the upper (1-alpha) tail of the sample, with the boundary
// atom weighted fractionally.  `values` is copied internally; losses are
// positive values.
double superquantile(std::span<const double> values, double alpha);

// Minimum number of sample points for a meaningful superquantile at level
// alpha: ceil(1 / (1 - alpha)).
std::size_t superquantile_min_sample(double alpha);

}  // namespace riskmin
