#include "tdid/logit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tdid/error.hpp"

namespace tdid {
namespace {

// Standardised slope magnitude beyond which a fitted propensity is treated as
// separated even if the likelihood gain has already fallen below tolerance:
// ten log-odds units per standard deviation of a covariate.
constexpr double kSeparatedSlope = 10.0;

struct Problem {
  const Eigen::MatrixXd& design;  // n x q, intercept first, standardised
  std::span<const std::size_t> labels;
  std::size_t classes;
  std::size_t reference;

  Eigen::Index q() const { return design.cols(); }
  Eigen::Index free() const { return static_cast<Eigen::Index>(classes - 1); }

  std::size_t class_of_free(Eigen::Index f) const {
    const auto c = static_cast<std::size_t>(f);
    return c < reference ? c : c + 1;
  }

  // theta: free() x q
  double loglik(const Eigen::MatrixXd& theta) const {
    const Eigen::MatrixXd eta = design * theta.transpose();  // n x free
    double ll = 0.0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      double top = 0.0;
      for (Eigen::Index f = 0; f < free(); ++f) top = std::max(top, eta(i, f));
      double denom = std::exp(-top);
      for (Eigen::Index f = 0; f < free(); ++f) denom += std::exp(eta(i, f) - top);
      const std::size_t y = labels[i];
      double own = 0.0;
      if (y != reference) own = eta(i, static_cast<Eigen::Index>(y < reference ? y : y - 1));
      ll += own - top - std::log(denom);
    }
    return ll;
  }

  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& theta) const {
    const Eigen::MatrixXd eta = design * theta.transpose();
    Eigen::MatrixXd p(design.rows(), free());
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
      double top = 0.0;
      for (Eigen::Index f = 0; f < free(); ++f) top = std::max(top, eta(i, f));
      double denom = std::exp(-top);
      for (Eigen::Index f = 0; f < free(); ++f) denom += std::exp(eta(i, f) - top);
      for (Eigen::Index f = 0; f < free(); ++f) p(i, f) = std::exp(eta(i, f) - top) / denom;
    }
    return p;
  }
};

}  // namespace

void softmax_probabilities(const Eigen::MatrixXd& coefficients, std::span<const double> x,
                           std::span<double> out) {
  const Eigen::Index k = coefficients.rows();
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < k; ++c) {
    double eta = coefficients(c, 0);
    for (std::size_t j = 0; j < x.size(); ++j)
      eta += coefficients(c, static_cast<Eigen::Index>(j + 1)) * x[j];
    out[c] = eta;
    top = std::max(top, eta);
  }
  double denom = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    out[c] = std::exp(out[c] - top);
    denom += out[c];
  }
  for (Eigen::Index c = 0; c < k; ++c) out[c] /= denom;
}

MultinomialFit fit_multinomial_logit(const Eigen::MatrixXd& covariates,
                                     std::span<const std::size_t> labels, std::size_t classes,
                                     std::size_t reference, const LogitOptions& options,
                                     const std::string& label) {
  const Eigen::Index n = covariates.rows();
  const Eigen::Index p = covariates.cols();
  const Eigen::Index q = p + 1;
  const std::string where = label.empty() ? std::string() : " (" + label + ")";
  if (classes < 2 || reference >= classes)
    throw Error(ErrorKind::Configuration, "logit needs at least two classes and a valid reference");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw Error(ErrorKind::Configuration, "logit labels/covariates row mismatch");

  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t y : labels) {
    if (y >= classes) throw Error(ErrorKind::Configuration, "logit label out of range");
    ++counts[y];
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] < static_cast<std::size_t>(q)) {
      std::ostringstream msg;
      msg << "insufficient data" << where << ": class " << c << " has " << counts[c]
          << " observations, needs at least " << q;
      throw Error(ErrorKind::InsufficientData, msg.str());
    }
  }

  // Centre and scale.
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  Eigen::MatrixXd design(n, q);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    centre[j] = covariates.col(j).mean();
    const double var = (covariates.col(j).array() - centre[j]).square().mean();
    if (!(var > 0.0)) {
      throw SingularDesignError("singular design" + where + ": covariate column " +
                                    std::to_string(j) + " is constant",
                                {"covariate " + std::to_string(j)});
    }
    scale[j] = std::sqrt(var);
    design.col(j + 1) = (covariates.col(j).array() - centre[j]) / scale[j];
  }

  const Problem prob{design, labels, classes, reference};
  const Eigen::Index nf = prob.free();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(nf, q);
  for (Eigen::Index f = 0; f < nf; ++f) {
    theta(f, 0) = std::log(static_cast<double>(counts[prob.class_of_free(f)]) /
                           static_cast<double>(counts[reference]));
  }

  MultinomialFit fit;
  fit.reference = reference;
  double ll = prob.loglik(theta);
  fit.loglik_trace.push_back(ll);

  const auto dn = static_cast<double>(n);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Eigen::MatrixXd prob_mat = prob.probabilities(theta);
    Eigen::VectorXd grad(nf * q);
    for (Eigen::Index f = 0; f < nf; ++f) {
      Eigen::VectorXd resid = -prob_mat.col(f);
      const std::size_t cls = prob.class_of_free(f);
      for (Eigen::Index i = 0; i < n; ++i)
        if (labels[i] == cls) resid[i] += 1.0;
      grad.segment(f * q, q) = design.transpose() * resid;
    }
    if (grad.cwiseAbs().maxCoeff() / dn < options.grad_tol) {
      fit.converged = true;
      break;
    }

    Eigen::MatrixXd info(nf * q, nf * q);
    for (Eigen::Index f = 0; f < nf; ++f) {
      for (Eigen::Index g = f; g < nf; ++g) {
        Eigen::VectorXd w = -prob_mat.col(f).cwiseProduct(prob_mat.col(g));
        if (f == g) w += prob_mat.col(f);
        const Eigen::MatrixXd block = design.transpose() * (design.array().colwise() * w.array()).matrix();
        info.block(f * q, g * q, q, q) = block;
        if (g != f) info.block(g * q, f * q, q, q) = block.transpose();
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    const Eigen::VectorXd diag = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * diag.cwiseAbs().maxCoeff()) {
      if (theta.cwiseAbs().maxCoeff() > kSeparatedSlope) {
        throw Error(ErrorKind::Separation,
                    "perfect separation" + where +
                        ": information matrix became singular while coefficients diverged; "
                        "trim the sample or use fewer covariates");
      }
      throw SingularDesignError("singular design" + where + ": logit information matrix is singular",
                                {});
    }
    const Eigen::VectorXd step_vec = ldlt.solve(grad);
    const Eigen::MatrixXd step = Eigen::Map<const Eigen::MatrixXd>(step_vec.data(), q, nf).transpose();

    double t = 1.0;
    bool accepted = false;
    Eigen::MatrixXd candidate;
    double ll_new = ll;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      candidate = theta + t * step;
      ll_new = prob.loglik(candidate);
      if (std::isfinite(ll_new) && ll_new >= ll) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Newton is an ascent direction, so this only happens at numerical optimum.
      fit.converged = true;
      break;
    }
    const double gain = ll_new - ll;
    theta = candidate;
    ll = ll_new;
    fit.loglik_trace.push_back(ll);
    fit.iterations = iter + 1;
    if (theta.cwiseAbs().maxCoeff() > options.separation_norm && gain > 0.0) {
      throw Error(ErrorKind::Separation,
                  "perfect separation" + where +
                      ": coefficient norm exceeded the divergence bound with rising likelihood; "
                      "trim the sample or use fewer covariates");
    }
    if (gain < options.tol) {
      fit.converged = true;
      break;
    }
  }

  if (!fit.converged) {
    std::ostringstream msg;
    msg << "multinomial logit" << where << " did not converge in " << options.max_iter
        << " iterations (last log-likelihood " << ll << ")";
    throw ConvergenceError(msg.str(), fit.loglik_trace);
  }
  if (p > 0 && theta.rightCols(p).cwiseAbs().maxCoeff() > kSeparatedSlope) {
    throw Error(ErrorKind::Separation,
                "perfect separation" + where +
                    ": standardised slope above 10 log-odds per standard deviation; "
                    "trim the sample or use fewer covariates");
  }

  fit.loglik = ll;
  fit.coefficients = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes), q);
  for (Eigen::Index f = 0; f < nf; ++f) {
    const auto row = static_cast<Eigen::Index>(prob.class_of_free(f));
    double intercept = theta(f, 0);
    for (Eigen::Index j = 0; j < p; ++j) {
      const double slope = theta(f, j + 1) / scale[j];
      fit.coefficients(row, j + 1) = slope;
      intercept -= slope * centre[j];
    }
    fit.coefficients(row, 0) = intercept;
  }
  return fit;
}

}  // namespace tdid
