#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "tdid/error.hpp"
#include "tdid/estimators.hpp"
#include "tdid/monte_carlo.hpp"
#include "tdid/rng.hpp"

using namespace tdid;

namespace {

DgpSpec small_spec(std::size_t n = 400) {
  DgpSpec s;
  s.n = n;
  s.seed = 2024;
  return s;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

MonteCarloResult constant_result(double v, std::size_t reps) {
  MonteCarloResult r;
  r.estimates_naive.assign(reps, v);
  r.estimates_reweighted.assign(reps, v);
  r.se_naive.assign(reps, 0.1);
  r.se_reweighted.assign(reps, 0.1);
  r.flags.resize(reps);
  return r;
}

}  // namespace

TEST_CASE("a single replication is deterministic and flagged degenerate") {
  const MonteCarloResult a = run_monte_carlo(small_spec(), 1);
  const MonteCarloResult b = run_monte_carlo(small_spec(), 1);
  CHECK(a.estimates_reweighted == b.estimates_reweighted);
  CHECK(a.estimates_naive == b.estimates_naive);
  const MonteCarloSummary s = summarize(a);
  CHECK(s.degenerate);
  CHECK(s.reweighted.sd == 0.0);
  CHECK(s.replications == 1);
}

TEST_CASE("replication r is the estimator applied to its derived seed") {
  const DgpSpec spec = small_spec();
  const MonteCarloResult mc = run_monte_carlo(spec, 3);
  const EstimatorConfig cfg;
  for (std::size_t r = 0; r < 3; ++r) {
    DgpSpec rep = spec;
    rep.seed = derive_seed(spec.seed, r);
    const PanelDataset d = simulate_sample(rep);
    const NuisanceSet theta = fit_nuisances(d, FitMode::ScoreSet, cfg.nuisance);
    const EstimateResult tau = estimate_tau_t2(d, theta);
    const EstimateResult naive = estimate_naive_difference(d, theta);
    CHECK(mc.estimates_reweighted[r] == doctest::Approx(tau.tau_hat).epsilon(1e-12));
    CHECK(mc.se_reweighted[r] == doctest::Approx(tau.se).epsilon(1e-12));
    CHECK(mc.estimates_naive[r] == doctest::Approx(naive.tau_hat).epsilon(1e-12));
    CHECK(mc.se_naive[r] == doctest::Approx(naive.se).epsilon(1e-12));
  }
}

TEST_CASE("parallel replications match the serial reference bit for bit") {
  tdid::test::use_threads(4);
  const MonteCarloResult p = run_monte_carlo(small_spec(), 12);
  const MonteCarloResult s = run_monte_carlo_serial(small_spec(), 12);
  CHECK(p.estimates_naive == s.estimates_naive);
  CHECK(p.estimates_reweighted == s.estimates_reweighted);
  CHECK(p.se_naive == s.se_naive);
  CHECK(p.se_reweighted == s.se_reweighted);
}

TEST_CASE("histogram export") {
  const auto dir = tdid::test::temp_dir("histogram");
  SUBCASE("one bin holds every replication") {
    const MonteCarloResult mc = run_monte_carlo(small_spec(), 5);
    export_histogram(mc, dir / "h.csv", 1);
    const auto rows = read_rows(dir / "h.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"estimator_label", "bin_left", "bin_right", "count"});
    CHECK(rows[1][0] == "naive_DR_A_minus_DR_B");
    CHECK(rows[2][0] == "reweighted_DR_A_minus_WDR_B");
    CHECK(rows[1][3] == "5");
    CHECK(rows[2][3] == "5");
  }
  SUBCASE("a single distinct value gets a unit-width range") {
    export_histogram(constant_result(2.0, 4), dir / "c.csv", 2);
    const auto rows = read_rows(dir / "c.csv");
    REQUIRE(rows.size() == 5);
    CHECK(std::stod(rows[1][1]) == 1.5);
    CHECK(std::stod(rows[2][2]) == 2.5);
    CHECK(std::stoi(rows[1][3]) + std::stoi(rows[2][3]) == 4);
  }
  SUBCASE("counts sum to the successful replications") {
    MonteCarloResult r = constant_result(0.0, 10);
    for (std::size_t k = 0; k < 10; ++k) r.estimates_reweighted[k] = static_cast<double>(k);
    r.flags[3].ok = false;
    export_histogram(r, dir / "s.csv", 4);
    int total = 0;
    for (const auto& row : read_rows(dir / "s.csv"))
      if (row[0] == "reweighted_DR_A_minus_WDR_B") total += std::stoi(row[3]);
    CHECK(total == 9);
    CHECK_THROWS_AS(export_histogram(r, dir / "z.csv", 0), Error);
  }
}

TEST_CASE("widespread replication failure aborts the study") {
  EstimatorConfig cfg;
  cfg.nuisance.trim_epsilon = 0.2;  // every sample violates this floor
  try {
    run_monte_carlo(small_spec(), 10, cfg);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Estimation);
    CHECK(std::string(e.what()).find("10 of 10") != std::string::npos);
  }
}

TEST_CASE("summaries skip failed replications") {
  MonteCarloResult r = constant_result(1.0, 4);
  r.estimates_reweighted = {1.0, 3.0, std::nan(""), 5.0};
  r.flags[2].ok = false;
  const MonteCarloSummary s = summarize(r);
  CHECK(s.failures == 1);
  CHECK(s.reweighted.ok == 3);
  CHECK(s.reweighted.mean == doctest::Approx(3.0));
  CHECK(s.reweighted.sd == doctest::Approx(2.0));
  CHECK_FALSE(s.degenerate);
}

TEST_CASE("Monte Carlo means agree with the closed-form targets across designs") {
  struct Point {
    double mu_a, mu_b;
    EffectCase c;
    Mechanism m;
  };
  // Group mean gaps up to 1.5 keep overlap good enough for a 200-replication check;
  // wider gaps are exercised by the acceptance study.
  const std::vector<Point> points{
      {0.0, 0.0, EffectCase::HeterogeneousEffects, Mechanism::BothGroups},
      {-1.0, 0.5, EffectCase::HeterogeneousEffects, Mechanism::BothGroups},
      {2.0, 1.0, EffectCase::ConstantEffects, Mechanism::BothGroups},
      {-3.0, -2.0, EffectCase::ConstantEffects, Mechanism::OnlyGroupA},
      {4.0, 3.0, EffectCase::HeterogeneousEffects, Mechanism::OnlyGroupA},
  };
  for (const Point& p : points) {
    DgpSpec spec;
    spec.mu_a = p.mu_a;
    spec.mu_b = p.mu_b;
    spec.effect_case = p.c;
    spec.mechanism = p.m;
    spec.n = 2000;
    spec.seed = 99;
    const MonteCarloSummary s = summarize(run_monte_carlo(spec, 200));
    const OracleValues o = closed_form_oracle(spec);
    INFO(p.mu_a, " ", p.mu_b);
    const double mc_se_r = s.reweighted.sd / std::sqrt(200.0);
    const double mc_se_n = s.naive.sd / std::sqrt(200.0);
    CHECK(std::abs(s.reweighted.mean - o.reweighted_diff) < 4.0 * mc_se_r);
    CHECK(std::abs(s.naive.mean - o.naive_diff) < 4.0 * mc_se_n);
  }
}
