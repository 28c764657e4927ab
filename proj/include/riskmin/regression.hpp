#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace riskmin {

struct RegressionConfig {
    int price_degree = 3;                // total degree of the log-spot monomials
    int intensity_degree = 1;            // univariate powers of each intensity covariate
    double condition_threshold = 1e8;    // Gram condition number triggering the ridge fallback
};

// One ridge fallback occurrence, reported in diagnostics.
struct RidgeEvent {
    int node = 0;
    double condition = 0.0;  // Gram condition number before regularization
    double ridge = 0.0;      // ridge parameter added to the Gram diagonal
};

// Cross-sectional polynomial regression at one grid node.
//
// The basis is every monomial of total degree <= price_degree in the
// standardized primary features (log-spots), plus univariate powers
// 1..extra_degree of each standardized extra covariate (intensities).
// Standardization constants come from the training sample and are reused when
// evaluating the fitted function on a different bundle.  The normal equations
// are solved through a single LDLT factorization of the Gram matrix, reused
// across all targets of the node; if the Gram condition number exceeds the
// configured threshold, a ridge of max_eigenvalue/threshold is added once and
// recorded.
class LeastSquares {
public:
    LeastSquares(std::vector<std::span<const double>> price_features, int price_degree,
                 std::vector<std::span<const double>> extra_features, int extra_degree,
                 double condition_threshold);

    int n_functions() const { return static_cast<int>(powers_.size()); }
    int n_samples() const { return n_; }
    double condition() const { return condition_; }
    bool ridged() const { return ridged_; }
    double ridge() const { return ridge_; }

    // Fits the targets, writes fitted values for the training sample into
    // `fitted` (may be empty to skip), and returns the coefficient vector.
    Eigen::VectorXd fit(std::span<const double> targets, std::span<double> fitted) const;

    // Evaluates a coefficient vector on external features laid out like the
    // training features (same count and order), using the stored
    // standardization.
    void evaluate(const Eigen::VectorXd& coeffs,
                  std::vector<std::span<const double>> price_features,
                  std::vector<std::span<const double>> extra_features,
                  std::span<double> out) const;

private:
    void raw_row(const double* std_values, double* out) const;

    int n_ = 0;
    int n_price_ = 0;
    std::vector<std::vector<int>> powers_;  // exponent tuple per basis function
    std::vector<double> mean_, sd_;         // standardization per feature
    Eigen::MatrixXd design_;                // training design matrix (n x K)
    Eigen::LDLT<Eigen::MatrixXd> factor_;
    double condition_ = 0.0;
    bool ridged_ = false;
    double ridge_ = 0.0;
};

}  // namespace riskmin
