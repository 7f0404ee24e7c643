#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "tdid/error.hpp"
#include "tdid/estimators.hpp"

using namespace tdid;
using tdid::test::simulated;

namespace {

NuisanceOptions loose_trim() {
  NuisanceOptions opts;
  opts.trim_epsilon = 1e-6;
  return opts;
}

NuisanceSet fit(const PanelDataset& d) { return fit_nuisances(d, FitMode::ScoreSet, loose_trim()); }

PanelDataset shift_outcomes(const PanelDataset& d, double c) {
  std::vector<PanelUnit> units(d.units().begin(), d.units().end());
  for (PanelUnit& u : units) u.y2 += c;
  return d.with_units(units);
}

}  // namespace

TEST_CASE("variance of centred influence values") {
  const std::vector<double> eta{1.0, -1.0};
  const VarianceEstimate v = variance(eta);
  CHECK(v.v_hat == doctest::Approx(1.0));
  CHECK(v.se == doctest::Approx(std::sqrt(0.5)));

  const std::vector<double> contrib{4.0, 0.0, 0.0, 0.0};
  const std::vector<double> wt{4.0, 0.0, 0.0, 0.0};
  const VarianceEstimate z = variance(contrib, wt, 1.0);
  CHECK(z.v_hat == 0.0);
  const VarianceEstimate w = variance(contrib, wt, 0.5);
  // eta = (2, 0, 0, 0): V = 1, se = 1/2.
  CHECK(w.v_hat == doctest::Approx(1.0));
  CHECK(w.se == doctest::Approx(0.5));
}

TEST_CASE("no change in outcomes gives a zero estimate") {
  const PanelDataset base = simulated(2000, 7);
  std::vector<PanelUnit> units(base.units().begin(), base.units().end());
  for (PanelUnit& u : units) u.y2 = u.y1;
  const PanelDataset d = base.with_units(units);
  const NuisanceSet theta = fit(d);
  CHECK(std::abs(estimate_tau_t2(d, theta).tau_hat) < 1e-10);
  CHECK(std::abs(estimate_naive_difference(d, theta).tau_hat) < 1e-10);
}

TEST_CASE("a common outcome shift leaves the estimates unchanged") {
  const PanelDataset d = simulated(3000, 9);
  const PanelDataset s = shift_outcomes(d, 7.5);
  for (bool hajek : {false, true}) {
    EstimatorOptions opts;
    opts.scores.normalize_weights = hajek;
    const EstimateResult a = estimate_tau_t2(d, fit(d), opts);
    const EstimateResult b = estimate_tau_t2(s, fit(s), opts);
    CHECK(std::abs(a.tau_hat - b.tau_hat) < 1e-10);
    CHECK(std::abs(a.se - b.se) < 1e-10);
    const EstimateResult na = estimate_naive_difference(d, fit(d), opts);
    const EstimateResult nb = estimate_naive_difference(s, fit(s), opts);
    CHECK(std::abs(na.tau_hat - nb.tau_hat) < 1e-10);
  }
}

TEST_CASE("reweighted estimator agrees with its score definition") {
  const PanelDataset d = simulated(4000, 13);
  const NuisanceSet theta = fit(d);
  const CellTable cells = cell_table(d);
  const EstimateResult r = estimate_tau_t2(d, theta);
  const std::vector<double> a = score_vector(ScoreKind::DR_A, d, cells, theta).values;
  const std::vector<double> w = score_vector(ScoreKind::WDR, d, cells, theta).values;
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += a[i] - w[i];
  const double tau = s / static_cast<double>(d.size());
  CHECK(r.tau_hat == doctest::Approx(tau).epsilon(1e-12));

  double ss = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double eta = a[i] - w[i] - weight_t(d.unit(i), Cell::A2, cells) * tau;
    ss += eta * eta;
  }
  CHECK(r.se == doctest::Approx(std::sqrt(ss / static_cast<double>(d.size()) / static_cast<double>(d.size()))).epsilon(1e-10));
  REQUIRE(r.influence_values);
  CHECK(std::abs(tdid::test::mean(*r.influence_values)) < 1e-10);
  CHECK(r.n == d.size());
  CHECK(r.method == Method::DR_reweighted);
  CHECK(r.se_kind == SeKind::InfluenceFunction);

  EstimatorOptions lean;
  lean.keep_influence = false;
  CHECK_FALSE(estimate_tau_t2(d, theta, lean).influence_values);
}

TEST_CASE("estimates track the closed-form targets") {
  struct Point {
    double mu_a, mu_b;
    double naive, reweighted;
  };
  // Heterogeneous effects, both groups treated: naive = (4 mu_a + mu_a) - (mu_b + mu_b),
  // reweighted = 5 mu_a - 2 mu_a.
  for (const Point& p : {Point{1.0, 3.0, -1.0, 3.0}, Point{1.0, 1.0, 3.0, 3.0}}) {
    const PanelDataset d = simulated(20000, 101, EffectCase::HeterogeneousEffects, p.mu_a, p.mu_b);
    const NuisanceSet theta = fit(d);
    const EstimateResult n = estimate_naive_difference(d, theta);
    const EstimateResult r = estimate_tau_t2(d, theta);
    CHECK(std::abs(n.tau_hat - p.naive) < 4.0 * n.se);
    CHECK(std::abs(r.tau_hat - p.reweighted) < 4.0 * r.se);
    CHECK(r.estimand_label == EstimandLabel::AvgCATTDiff_onA);
    CHECK(n.estimand_label == EstimandLabel::Descriptive);
  }
}

TEST_CASE("bias diagnostic under group-A-only treatment") {
  struct Point {
    double mu_a, mu_b, slope;
    double bias;
  };
  for (const Point& p : {Point{1.0, 3.0, 1.0, -2.0}, Point{2.0, 2.0, 1.0, 0.0}, Point{1.0, 3.0, 0.0, 0.0}}) {
    const PanelDataset d =
        simulated(20000, 211, EffectCase::HeterogeneousEffects, p.mu_a, p.mu_b, Mechanism::OnlyGroupA, p.slope);
    const BiasEstimate b = bias_diagnostic(d, fit(d));
    INFO(p.mu_a, " ", p.mu_b, " ", p.slope);
    CHECK(b.se > 0.0);
    CHECK(std::abs(b.bias_hat - p.bias) < 4.0 * b.se);
  }
  const PanelDataset d = simulated(2000, 5, EffectCase::HeterogeneousEffects, 1.0, 3.0, Mechanism::OnlyGroupA);
  CHECK(estimate_tau_t2(d, fit(d)).estimand_label == EstimandLabel::ATT_A);
}

TEST_CASE("bias diagnostic refuses the both-groups mechanism") {
  const PanelDataset d = simulated(2000, 5);
  try {
    bias_diagnostic(d, fit(d));
    FAIL("expected UnsupportedMechanism");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedMechanism);
  }
}

TEST_CASE("method and label names round trip") {
  for (Method m : kMethods) CHECK(parse_method(method_name(m)) == m);
  CHECK(reweighted_estimand(Mechanism::OnlyGroupA) == EstimandLabel::ATT_A);
  CHECK(reweighted_estimand(Mechanism::BothGroups) == EstimandLabel::AvgCATTDiff_onA);
  CHECK_THROWS_AS(parse_method("OLS_quadruple"), Error);
}
