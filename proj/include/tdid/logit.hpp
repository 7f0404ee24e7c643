#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tdid {

struct LogitOptions {
  int max_iter = 100;
  double tol = 1e-10;           // stop when the log-likelihood gain falls below this
  double grad_tol = 1e-8;       // or the per-observation gradient max-norm falls below this
  double separation_norm = 1e4; // coefficient max-norm that signals separation
};

struct MultinomialFit {
  // One row per class, intercept first; the reference row is identically zero.
  Eigen::MatrixXd coefficients;
  std::size_t reference = 0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;  // initial value, then one entry per accepted step
};

// Multinomial logit by damped Newton iterations with step halving.
// `covariates` is n x p without an intercept column; labels take values in
// [0, classes). Covariates are centred and scaled internally and the
// coefficients are returned on the original scale.
MultinomialFit fit_multinomial_logit(const Eigen::MatrixXd& covariates,
                                     std::span<const std::size_t> labels, std::size_t classes,
                                     std::size_t reference, const LogitOptions& options = {},
                                     const std::string& label = {});

// Class probabilities for one covariate vector given a coefficient matrix with
// one row per class; log-sum-exp stabilised.
void softmax_probabilities(const Eigen::MatrixXd& coefficients, std::span<const double> x,
                           std::span<double> out);

}  // namespace tdid
