#include "tdid/ols.hpp"

#include <map>
#include <sstream>

#include "tdid/error.hpp"

namespace tdid {

double LinearModel::predict(std::span<const double> x) const {
  double y = coefficients[0];
  for (std::size_t j = 0; j < x.size(); ++j) y += coefficients[static_cast<Eigen::Index>(j + 1)] * x[j];
  return y;
}

OlsFit fit_ols_full(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                    std::string label, const std::vector<std::string>& column_names) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (response.size() != n) throw Error(ErrorKind::Configuration, "design/response row mismatch");
  if (k == 0) throw Error(ErrorKind::Configuration, "design has no columns");
  if (n < k) {
    std::ostringstream msg;
    msg << "insufficient data" << (label.empty() ? "" : " for " + label) << ": n = " << n
        << " < " << k << " parameters";
    throw Error(ErrorKind::InsufficientData, msg.str());
  }

  auto name_of = [&](Eigen::Index j) {
    return j < static_cast<Eigen::Index>(column_names.size()) ? column_names[j]
                                                              : "column " + std::to_string(j);
  };

  Eigen::VectorXd scale = design.colwise().norm().transpose();
  std::vector<std::string> zero_cols;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (scale[j] == 0.0) zero_cols.push_back(name_of(j));
  }
  if (!zero_cols.empty()) {
    throw SingularDesignError("singular design" + (label.empty() ? "" : " for " + label) +
                                  ": all-zero column(s) " + zero_cols.front(),
                              zero_cols);
  }
  const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::vector<std::string> dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < k; ++j) dependent.push_back(name_of(perm[j]));
    std::string joined;
    for (const auto& d : dependent) joined += (joined.empty() ? "" : ", ") + d;
    throw SingularDesignError(
        "singular design" + (label.empty() ? "" : " for " + label) + ": dependent column(s) " + joined,
        dependent);
  }

  OlsFit fit;
  const Eigen::VectorXd beta_scaled = qr.solve(response);
  fit.model.coefficients = beta_scaled.cwiseQuotient(scale);
  fit.model.fitted_on = std::move(label);
  fit.model.n_obs = static_cast<std::size_t>(n);
  fit.residuals = response - design * fit.model.coefficients;
  const double dof = static_cast<double>(n - k);
  fit.model.residual_variance = dof > 0 ? fit.residuals.squaredNorm() / dof : 0.0;

  // (X'X)^{-1} = S^{-1} P R^{-1} R^{-T} P' S^{-1} for the scaled factorisation.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
  const Eigen::MatrixXd unpermuted =
      qr.colsPermutation() * inner * qr.colsPermutation().transpose();
  fit.xtx_inverse = scale.cwiseInverse().asDiagonal() * unpermuted * scale.cwiseInverse().asDiagonal();
  return fit;
}

LinearModel fit_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                    std::string label, const std::vector<std::string>& column_names) {
  return fit_ols_full(design, response, std::move(label), column_names).model;
}

Eigen::MatrixXd ols_covariance(const OlsFit& fit, const Eigen::MatrixXd& design,
                               CovarianceKind kind, std::span<const std::size_t> clusters) {
  const auto n = static_cast<double>(design.rows());
  const auto k = static_cast<double>(design.cols());
  const Eigen::MatrixXd& bread = fit.xtx_inverse;
  switch (kind) {
    case CovarianceKind::Classical:
      return fit.model.residual_variance * bread;
    case CovarianceKind::HC1: {
      const Eigen::MatrixXd weighted = design.array().colwise() * fit.residuals.array();
      const Eigen::MatrixXd meat = weighted.transpose() * weighted;
      return (n > k ? n / (n - k) : 1.0) * bread * meat * bread;
    }
    case CovarianceKind::ClusterCR1: {
      if (static_cast<Eigen::Index>(clusters.size()) != design.rows())
        throw Error(ErrorKind::Configuration, "cluster ids must have one entry per row");
      std::map<std::size_t, Eigen::VectorXd> scores;
      for (Eigen::Index i = 0; i < design.rows(); ++i) {
        auto [it, inserted] = scores.try_emplace(clusters[i], Eigen::VectorXd::Zero(design.cols()));
        it->second += design.row(i).transpose() * fit.residuals[i];
      }
      Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(design.cols(), design.cols());
      for (const auto& [id, s] : scores) meat += s * s.transpose();
      const auto g = static_cast<double>(scores.size());
      const double c = g > 1 && n > k ? (g / (g - 1.0)) * ((n - 1.0) / (n - k)) : 1.0;
      return c * bread * meat * bread;
    }
  }
  return bread;
}

}  // namespace tdid
