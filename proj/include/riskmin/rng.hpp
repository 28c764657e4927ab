#pragma once

#include <array>
#include <cstdint>

namespace riskmin {

// Logical random-number streams.  Every stochastic input of the engine draws
// from its own stream so that adding paths, steps, or a new consumer never
// perturbs the draws of an existing one.
enum class Stream : std::uint64_t {
    AssetIncrements = 0,      // Brownian increments of the traded assets
    IntensityOrthogonal = 1,  // Brownian increments driving the intensity factors
    DefaultTriggers = 2,      // exponential triggers of the two default times
    TieBreaks = 3,            // fair coin for same-node default ties
    TwoStepInner = 16,        // inner resimulations of the two-step estimator
};

// Counter-based generator (Philox4x32 with 10 rounds).  A value is a pure
// function of (seed, stream, path, draw), so any worker can produce any
// coordinate independently: results are identical for every thread count and
// evaluation order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, Stream stream);
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    // Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform(std::uint64_t path, std::uint64_t draw) const;

    // Standard normal via the inverse-CDF transform of uniform(path, draw).
    double normal(std::uint64_t path, std::uint64_t draw) const;

    // Raw 128-bit block for the given (path, draw) counter, mainly for tests.
    std::array<std::uint32_t, 4> block(std::uint64_t path, std::uint64_t draw) const;

private:
    std::array<std::uint32_t, 2> key_;
};

// Inverse of the standard normal CDF (Wichura's double-precision rational
// approximation, accurate to ~1e-15 in the central region).  Exposed for tests.
double inverse_normal_cdf(double p);

// Standard normal CDF, used by validation tests and analytic oracles.
double normal_cdf(double x);

// 64-bit finalizer used to derive stream keys from (seed, stream).
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace riskmin
