#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "riskmin/rng.hpp"
#include "riskmin/stats.hpp"

using namespace riskmin;

TEST_CASE("mean and standard error on a known sample") {
    const std::vector<double> sample = {1.0, 2.0, 3.0, 4.0};
    const Estimate est = mean_se(sample);
    CHECK(est.value == doctest::Approx(2.5).epsilon(1e-15));
    // Sample variance 5/3, SE = sqrt(5/3)/2.
    CHECK(est.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
    CHECK(est.within(2.5, 0.0));
    CHECK(est.within(2.5 + est.se, 1.0));
    CHECK_FALSE(est.within(2.5 + 4.0 * est.se, 3.0));
}

TEST_CASE("covariance estimate on correlated and independent samples") {
    // Perfectly correlated: cov(x, 2x) = 2 var(x).
    const std::vector<double> x = {-1.0, 0.0, 1.0, 2.0};
    const std::vector<double> y = {-2.0, 0.0, 2.0, 4.0};
    const Estimate cov = covariance_se(x, y);
    // Population-style covariance of the sample: E[xy] - E[x]E[y] with 1/n.
    // mean x = 0.5, mean y = 1, mean xy = (2 + 0 + 2 + 8)/4 = 3 -> cov = 2.5.
    CHECK(cov.value == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(cov.se > 0.0);

    // Independent draws: covariance statistically zero.
    const CounterRng rng(11, 5);
    const int n = 50000;
    std::vector<double> a(n), b(n);
    for (int p = 0; p < n; ++p) {
        a[static_cast<std::size_t>(p)] = rng.normal(static_cast<std::uint64_t>(p), 0);
        b[static_cast<std::size_t>(p)] = rng.normal(static_cast<std::uint64_t>(p), 1);
    }
    const Estimate indep = covariance_se(a, b);
    CHECK(indep.within(0.0, 3.0));
}

TEST_CASE("superquantile averages the upper tail with fractional boundary weight") {
    // Three-point distribution: P(-1) = 0.5, P(1) = 0.3, P(2) = 0.2, in exact
    // sample proportions.
    const std::vector<double> sample = {-1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 2.0, 2.0};

    // alpha = 0.7: tail mass 3 of 10 -> (2 + 2 + 1)/3 = 5/3.
    CHECK(superquantile(sample, 0.7) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    // alpha = 0.75: tail mass 2.5 -> (2 + 2 + 0.5 * 1)/2.5 = 1.8.
    CHECK(superquantile(sample, 0.75) == doctest::Approx(1.8).epsilon(1e-15));
    // alpha = 0.9: exactly the two largest points.
    CHECK(superquantile(sample, 0.9) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(superquantile(sample, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(superquantile(sample, 1.0), std::invalid_argument);

    CHECK(superquantile_min_sample(0.975) == 40);
    CHECK(superquantile_min_sample(0.5) == 2);
}

TEST_CASE("superquantile of sampled three-point losses converges to the analytic value") {
    // Batched draws: each batch estimate is biased O(1/batch), negligible
    // against the Monte Carlo spread; the batch-mean SE certifies the match.
    const CounterRng rng(23, 9);
    const int n_batches = 20;
    const int batch = 2000;
    std::vector<double> estimates(n_batches);
    for (int b = 0; b < n_batches; ++b) {
        std::vector<double> sample(batch);
        for (int i = 0; i < batch; ++i) {
            const double u = rng.uniform(static_cast<std::uint64_t>(b),
                                         static_cast<std::uint64_t>(i));
            sample[static_cast<std::size_t>(i)] = (u < 0.5) ? -1.0 : (u < 0.8) ? 1.0 : 2.0;
        }
        estimates[static_cast<std::size_t>(b)] = superquantile(sample, 0.7);
    }
    const Estimate est = mean_se(estimates);
    CHECK(est.within(5.0 / 3.0, 3.0));
}
