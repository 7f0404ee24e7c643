#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tdid {

// y ~ intercept + slopes . x
struct LinearModel {
  Eigen::VectorXd coefficients;  // length d+1, intercept first
  std::string fitted_on;
  double residual_variance = 0.0;
  std::size_t n_obs = 0;

  std::size_t dim() const noexcept {
    return coefficients.size() == 0 ? 0 : static_cast<std::size_t>(coefficients.size() - 1);
  }
  double predict(std::span<const double> x) const;
};

struct OlsFit {
  LinearModel model;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd xtx_inverse;  // (X'X)^{-1}, the sandwich bread
};

// `design` carries its own intercept column. Solved by column-pivoted
// Householder QR on unit-norm columns; a pivot below 1e-10 of the largest
// marks the design rank deficient.
OlsFit fit_ols_full(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                    std::string label = {}, const std::vector<std::string>& column_names = {});

LinearModel fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                    std::string label = {}, const std::vector<std::string>& column_names = {});

enum class CovarianceKind { Classical, HC1, ClusterCR1 };

// Coefficient covariance for a fitted regression. `clusters` is required for
// ClusterCR1 and holds one cluster index per row.
Eigen::MatrixXd ols_covariance(const OlsFit& fit, const Eigen::MatrixXd& design,
                               CovarianceKind kind, std::span<const std::size_t> clusters = {});

}  // namespace tdid
