#include "riskmin/regression.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace riskmin {

namespace {

constexpr double kDegenerateSd = 1e-12;

// All exponent tuples over `dims` variables with total degree <= max_total,
// ordered by total degree then lexicographically; deterministic basis layout.
void enumerate_tuples(int dims, int max_total, std::vector<std::vector<int>>& out) {
    std::vector<int> current(static_cast<std::size_t>(dims), 0);
    for (int total = 0; total <= max_total; ++total) {
        // Depth-first over exponents summing exactly to `total`.
        std::function<void(int, int)> rec = [&](int pos, int remaining) {
            if (pos == dims - 1) {
                current[static_cast<std::size_t>(pos)] = remaining;
                out.push_back(current);
                return;
            }
            for (int e = remaining; e >= 0; --e) {
                current[static_cast<std::size_t>(pos)] = e;
                rec(pos + 1, remaining - e);
            }
        };
        if (dims == 0) {
            if (total == 0) out.emplace_back();
            continue;
        }
        rec(0, total);
    }
}

}  // namespace

LeastSquares::LeastSquares(std::vector<std::span<const double>> price_features, int price_degree,
                           std::vector<std::span<const double>> extra_features, int extra_degree,
                           double condition_threshold) {
    n_price_ = static_cast<int>(price_features.size());
    const int n_extra = static_cast<int>(extra_features.size());
    const int n_feat = n_price_ + n_extra;
    if (n_feat == 0) throw std::invalid_argument("LeastSquares: no features");
    n_ = static_cast<int>(price_features.empty() ? extra_features[0].size()
                                                 : price_features[0].size());
    if (n_ <= 0) throw std::invalid_argument("LeastSquares: empty sample");

    std::vector<std::span<const double>> all;
    all.reserve(static_cast<std::size_t>(n_feat));
    for (auto& f : price_features) all.push_back(f);
    for (auto& f : extra_features) all.push_back(f);
    for (auto& f : all)
        if (static_cast<int>(f.size()) != n_)
            throw std::invalid_argument("LeastSquares: feature size mismatch");

    mean_.assign(static_cast<std::size_t>(n_feat), 0.0);
    sd_.assign(static_cast<std::size_t>(n_feat), 1.0);
    std::vector<bool> degenerate(static_cast<std::size_t>(n_feat), false);
    for (int f = 0; f < n_feat; ++f) {
        double m = 0.0;
        for (double v : all[static_cast<std::size_t>(f)]) m += v;
        m /= n_;
        double ss = 0.0;
        for (double v : all[static_cast<std::size_t>(f)]) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / n_);
        mean_[static_cast<std::size_t>(f)] = m;
        if (sd < kDegenerateSd) {
            degenerate[static_cast<std::size_t>(f)] = true;  // constant column: keep level only
            sd_[static_cast<std::size_t>(f)] = 1.0;
        } else {
            sd_[static_cast<std::size_t>(f)] = sd;
        }
    }

    // Price block: full total-degree polynomial; extras: univariate powers.
    std::vector<std::vector<int>> price_tuples;
    enumerate_tuples(n_price_, price_degree, price_tuples);
    for (auto& t : price_tuples) {
        t.resize(static_cast<std::size_t>(n_feat), 0);
        powers_.push_back(t);
    }
    for (int e = 0; e < n_extra; ++e) {
        for (int pow = 1; pow <= extra_degree; ++pow) {
            std::vector<int> t(static_cast<std::size_t>(n_feat), 0);
            t[static_cast<std::size_t>(n_price_ + e)] = pow;
            powers_.push_back(t);
        }
    }
    // Drop functions that touch a degenerate feature (they would duplicate the
    // constant and make the Gram singular).
    std::erase_if(powers_, [&](const std::vector<int>& t) {
        for (int f = 0; f < n_feat; ++f)
            if (t[static_cast<std::size_t>(f)] > 0 && degenerate[static_cast<std::size_t>(f)])
                return true;
        return false;
    });

    const int K = n_functions();
    design_.resize(n_, K);
    std::vector<double> std_values(static_cast<std::size_t>(n_feat));
    std::vector<double> row(static_cast<std::size_t>(K));
    for (int i = 0; i < n_; ++i) {
        for (int f = 0; f < n_feat; ++f)
            std_values[static_cast<std::size_t>(f)] =
                (all[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)] -
                 mean_[static_cast<std::size_t>(f)]) /
                sd_[static_cast<std::size_t>(f)];
        raw_row(std_values.data(), row.data());
        for (int j = 0; j < K; ++j) design_(i, j) = row[static_cast<std::size_t>(j)];
    }

    Eigen::MatrixXd gram = design_.transpose() * design_;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double emin = eig.eigenvalues().minCoeff();
    const double emax = eig.eigenvalues().maxCoeff();
    condition_ = (emin > 0.0) ? emax / emin : std::numeric_limits<double>::infinity();
    if (!(condition_ <= condition_threshold)) {
        ridged_ = true;
        ridge_ = emax / condition_threshold;
        gram.diagonal().array() += ridge_;
    }
    factor_ = gram.ldlt();
}

void LeastSquares::raw_row(const double* std_values, double* out) const {
    const int K = n_functions();
    for (int j = 0; j < K; ++j) {
        double v = 1.0;
        const std::vector<int>& t = powers_[static_cast<std::size_t>(j)];
        for (std::size_t f = 0; f < t.size(); ++f)
            for (int e = 0; e < t[f]; ++e) v *= std_values[f];
        out[j] = v;
    }
}

Eigen::VectorXd LeastSquares::fit(std::span<const double> targets,
                                  std::span<double> fitted) const {
    if (static_cast<int>(targets.size()) != n_)
        throw std::invalid_argument("LeastSquares::fit: target size mismatch");
    const Eigen::Map<const Eigen::VectorXd> y(targets.data(), n_);
    const Eigen::VectorXd rhs = design_.transpose() * y;
    const Eigen::VectorXd coeffs = factor_.solve(rhs);
    if (!fitted.empty()) {
        if (static_cast<int>(fitted.size()) != n_)
            throw std::invalid_argument("LeastSquares::fit: fitted size mismatch");
        Eigen::Map<Eigen::VectorXd>(fitted.data(), n_) = design_ * coeffs;
    }
    return coeffs;
}

void LeastSquares::evaluate(const Eigen::VectorXd& coeffs,
                            std::vector<std::span<const double>> price_features,
                            std::vector<std::span<const double>> extra_features,
                            std::span<double> out) const {
    const int n_feat = static_cast<int>(mean_.size());
    if (static_cast<int>(price_features.size()) != n_price_ ||
        static_cast<int>(price_features.size() + extra_features.size()) != n_feat)
        throw std::invalid_argument("LeastSquares::evaluate: feature layout mismatch");
    std::vector<std::span<const double>> all;
    for (auto& f : price_features) all.push_back(f);
    for (auto& f : extra_features) all.push_back(f);
    const std::size_t m = out.size();
    for (auto& f : all)
        if (f.size() != m)
            throw std::invalid_argument("LeastSquares::evaluate: feature size mismatch");

    const int K = n_functions();
    std::vector<double> std_values(static_cast<std::size_t>(n_feat));
    std::vector<double> row(static_cast<std::size_t>(K));
    for (std::size_t i = 0; i < m; ++i) {
        for (int f = 0; f < n_feat; ++f)
            std_values[static_cast<std::size_t>(f)] =
                (all[static_cast<std::size_t>(f)][i] - mean_[static_cast<std::size_t>(f)]) /
                sd_[static_cast<std::size_t>(f)];
        raw_row(std_values.data(), row.data());
        double acc = 0.0;
        for (int j = 0; j < K; ++j) acc += row[static_cast<std::size_t>(j)] * coeffs(j);
        out[i] = acc;
    }
}

}  // namespace riskmin
