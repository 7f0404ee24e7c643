#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "tdid/error.hpp"
#include "tdid/ols.hpp"
#include "tdid/rng.hpp"

using namespace tdid;

namespace {

// Independent oracle: Cholesky solve of the normal equations.
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (x.transpose() * x).llt().solve(x.transpose() * y);
}

Eigen::MatrixXd random_design(int n, int k, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::MatrixXd x(n, k);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) x(i, j) = rng.normal(static_cast<std::uint64_t>(i * k + j));
  }
  return x;
}

Eigen::VectorXd random_response(const Eigen::MatrixXd& x, std::uint64_t seed) {
  const CounterRng rng(seed);
  Eigen::VectorXd beta = Eigen::VectorXd::LinSpaced(x.cols(), 1.0, -1.0);
  Eigen::VectorXd y = x * beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += rng.normal(static_cast<std::uint64_t>(i));
  return y;
}

}  // namespace

TEST_CASE("intercept-only regression returns the mean") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 1);
  const Eigen::VectorXd y = (Eigen::VectorXd(3) << 1, 2, 3).finished();
  const LinearModel m = fit_ols(x, y);
  CHECK(m.coefficients.size() == 1);
  CHECK(m.coefficients[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.dim() == 0);
}

TEST_CASE("noise-free linear response is interpolated") {
  Eigen::MatrixXd x(5, 2);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = i - 1.5;
    y[i] = 3.0 + 2.0 * x(i, 1);
  }
  const LinearModel m = fit_ols(x, y);
  CHECK(std::abs(m.coefficients[0] - 3.0) < 1e-10);
  CHECK(std::abs(m.coefficients[1] - 2.0) < 1e-10);
  const std::vector<double> pt{0.25};
  CHECK(m.predict(pt) == doctest::Approx(3.5));
}

TEST_CASE("random 50x3 problem agrees with the normal-equations oracle") {
  const Eigen::MatrixXd x = random_design(50, 3, 5);
  const Eigen::VectorXd y = random_response(x, 6);
  const LinearModel m = fit_ols(x, y);
  const Eigen::VectorXd oracle = normal_equations(x, y);
  CHECK((m.coefficients - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("residuals are orthogonal to every regressor") {
  const Eigen::MatrixXd x = random_design(200, 4, 8);
  const Eigen::VectorXd y = random_response(x, 9);
  const OlsFit fit = fit_ols_full(x, y);
  const Eigen::VectorXd xr = x.transpose() * fit.residuals;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    CHECK(std::abs(xr[j]) < 1e-8 * x.col(j).norm() * std::max(1.0, fit.residuals.norm()));
}

TEST_CASE("saturated dummy design reproduces group means") {
  const int n = 30;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 3);
  Eigen::VectorXd y(n);
  std::array<double, 3> sum{}, cnt{};
  const CounterRng rng(3);
  for (int i = 0; i < n; ++i) {
    const int g = i % 3;
    x(i, 0) = 1.0;
    if (g > 0) x(i, g) = 1.0;
    y[i] = g * 2.0 + rng.normal(static_cast<std::uint64_t>(i));
    sum[g] += y[i];
    cnt[g] += 1;
  }
  const LinearModel m = fit_ols(x, y);
  CHECK(std::abs(m.coefficients[0] - sum[0] / cnt[0]) < 1e-10);
  CHECK(std::abs(m.coefficients[0] + m.coefficients[1] - sum[1] / cnt[1]) < 1e-10);
  CHECK(std::abs(m.coefficients[0] + m.coefficients[2] - sum[2] / cnt[2]) < 1e-10);
}

TEST_CASE("row permutation leaves coefficients unchanged") {
  const Eigen::MatrixXd x = random_design(80, 3, 12);
  const Eigen::VectorXd y = random_response(x, 13);
  std::vector<int> perm(80);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 17, perm.end());
  Eigen::MatrixXd xp(80, 3);
  Eigen::VectorXd yp(80);
  for (int i = 0; i < 80; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yp[i] = y[perm[static_cast<std::size_t>(i)]];
  }
  CHECK((fit_ols(x, y).coefficients - fit_ols(xp, yp).coefficients).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rank deficiency names the dependent column") {
  Eigen::MatrixXd x = random_design(20, 3, 2);
  x.col(2) = 2.0 * x.col(1) - x.col(0);
  const Eigen::VectorXd y = random_response(random_design(20, 3, 2), 4);
  try {
    fit_ols(x, y, "test", {"intercept", "a", "b"});
    FAIL("expected SingularDesignError");
  } catch (const SingularDesignError& e) {
    CHECK(e.kind() == ErrorKind::SingularDesign);
    REQUIRE(e.dependent_columns().size() == 1);
    const std::string col = e.dependent_columns().front();
    CHECK((col == "intercept" || col == "a" || col == "b"));
  }
}

TEST_CASE("fewer rows than parameters is insufficient data") {
  const Eigen::MatrixXd x = random_design(2, 3, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
  try {
    fit_ols(x, y);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
  }
}

TEST_CASE("covariance estimators agree with direct formulas") {
  const Eigen::MatrixXd x = random_design(60, 3, 21);
  const Eigen::VectorXd y = random_response(x, 22);
  const OlsFit fit = fit_ols_full(x, y);
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
  CHECK((fit.xtx_inverse - xtx_inv).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::VectorXd e = y - x * normal_equations(x, y);
  const double s2 = e.squaredNorm() / (60 - 3);
  CHECK((ols_covariance(fit, x, CovarianceKind::Classical) - s2 * xtx_inv).cwiseAbs().maxCoeff() < 1e-10);

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 60; ++i) meat += e[i] * e[i] * x.row(i).transpose() * x.row(i);
  const Eigen::MatrixXd hc1 = 60.0 / 57.0 * xtx_inv * meat * xtx_inv;
  CHECK((ols_covariance(fit, x, CovarianceKind::HC1) - hc1).cwiseAbs().maxCoeff() < 1e-10);

  // Singleton clusters: CR1 = HC1 * (G/(G-1)) * ((n-1)/(n-k)) / (n/(n-k)).
  std::vector<std::size_t> ids(60);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const Eigen::MatrixXd cr1 = ols_covariance(fit, x, CovarianceKind::ClusterCR1, ids);
  const Eigen::MatrixXd expect = (60.0 / 59.0) * (59.0 / 57.0) * xtx_inv * meat * xtx_inv;
  CHECK((cr1 - expect).cwiseAbs().maxCoeff() < 1e-10);
}
