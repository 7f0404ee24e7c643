#include <doctest.h>

#include <algorithm>

#include "test_support.hpp"
#include "tdid/error.hpp"
#include "tdid/scores.hpp"

using namespace tdid;
using tdid::test::minimal_design;
using tdid::test::simulated;

namespace {

LinearModel constant_model(double c) {
  LinearModel m;
  m.coefficients = Eigen::VectorXd::Constant(1, c);
  return m;
}

// One unit per cell with hand-set nuisances: p = (0.4, 0.1, 0.2, 0.3) and
// m = (1, 0.5, 1, 0) in cell order.
NuisanceSet fixture_theta() {
  NuisanceSet theta;
  theta.propensity = constant_propensity({0.4, 0.1, 0.2, 0.3});
  theta.propensity->trim_epsilon = 0.01;
  theta.outcome_models.emplace(Cell::A2, constant_model(1.0));
  theta.outcome_models.emplace(Cell::AInf, constant_model(0.5));
  theta.outcome_models.emplace(Cell::B2, constant_model(1.0));
  theta.outcome_models.emplace(Cell::BInf, constant_model(0.0));
  return theta;
}

// The simulated groups overlap poorly in the tails; trim as the simulations do.
NuisanceOptions loose_trim() {
  NuisanceOptions opts;
  opts.trim_epsilon = 1e-6;
  return opts;
}

std::vector<double> values(ScoreKind k, const PanelDataset& d, const NuisanceSet& theta,
                           const ScoreOptions& opts = {}) {
  return score_vector(k, d, cell_table(d), theta, opts).values;
}

void check_values(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("hand-computed scores on the one-unit-per-cell fixture") {
  // Delta Y = (3, 1, 2, -0.5); every share is 1/4.
  const PanelDataset d = minimal_design();
  const NuisanceSet theta = fixture_theta();
  check_values(values(ScoreKind::OR_A, d, theta), {10, 0, 0, 0});
  check_values(values(ScoreKind::IPW_A, d, theta), {12, -16, 0, 0});
  check_values(values(ScoreKind::DR_A, d, theta), {10, -8, 0, 0});
  check_values(values(ScoreKind::OR_B, d, theta), {0, 0, 8, 0});
  check_values(values(ScoreKind::IPW_B, d, theta), {0, 0, 8, 4.0 / 3.0});
  check_values(values(ScoreKind::DR_B, d, theta), {0, 0, 8, 4.0 / 3.0});
  check_values(values(ScoreKind::WOR, d, theta), {4, 0, 0, 0});
  check_values(values(ScoreKind::WIPW, d, theta), {0, 0, 16, 8.0 / 3.0});
  check_values(values(ScoreKind::WDR, d, theta), {4, 0, 8, 8.0 / 3.0});

  const CellTable cells = cell_table(d);
  CHECK(weight_t(d.unit(0), Cell::A2, cells) == 4.0);
  CHECK(weight_t(d.unit(1), Cell::A2, cells) == 0.0);
  CHECK(weight_c(d.unit(1), Cell::A2, Cell::AInf, cells, *theta.propensity) == doctest::Approx(16.0));
  CHECK(weight_c(d.unit(2), Cell::A2, Cell::B2, cells, *theta.propensity) == doctest::Approx(8.0));
  CHECK(weight_c(d.unit(0), Cell::A2, Cell::B2, cells, *theta.propensity) == 0.0);
  CHECK(score(ScoreKind::WDR, d.unit(3), cells, theta) == doctest::Approx(8.0 / 3.0));
}

TEST_CASE("normalised weights divide each comparison weight by its mean") {
  const PanelDataset d = minimal_design();
  ScoreOptions opts;
  opts.normalize_weights = true;
  // w_C(a2, a_inf) has mean 4, so unit 2's weight drops from 16 to 4.
  check_values(values(ScoreKind::DR_A, d, fixture_theta(), opts), {10, -2, 0, 0});
}

TEST_CASE("trimming collects every offending unit") {
  const PanelDataset d = minimal_design();
  NuisanceSet theta = fixture_theta();
  theta.propensity->trim_epsilon = 0.15;
  const std::vector<ScoreKind> kinds{ScoreKind::DR_A, ScoreKind::WDR};
  try {
    score_vectors(kinds, d, cell_table(d), theta);
    FAIL("expected TrimmingError");
  } catch (const TrimmingError& e) {
    CHECK(e.kind() == ErrorKind::Trimming);
    REQUIRE(e.unit_ids() == std::vector<std::string>{"2"});
  }
}

TEST_CASE("an empty target cell is reported") {
  const PanelDataset full = minimal_design();
  std::vector<PanelUnit> units(full.units().begin(), full.units().end());
  units.erase(units.begin() + 2);
  const PanelDataset d(units, {}, Mechanism::BothGroups);
  try {
    score_vector(ScoreKind::DR_B, d, cell_table(d), fixture_theta());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("empty cell (B, Eligible)") != std::string::npos);
  }
}

TEST_CASE("missing nuisances are configuration errors") {
  const PanelDataset d = minimal_design();
  NuisanceSet theta = fixture_theta();
  theta.outcome_models.erase(Cell::AInf);
  CHECK_THROWS_AS(score_vector(ScoreKind::DR_A, d, cell_table(d), theta), Error);
  // IPW needs no outcome model.
  CHECK_NOTHROW(score_vector(ScoreKind::IPW_A, d, cell_table(d), theta));
  theta.propensity.reset();
  CHECK_THROWS_AS(score_vector(ScoreKind::IPW_A, d, cell_table(d), theta), Error);
}

TEST_CASE("score identities on a simulated sample") {
  const PanelDataset d = simulated(20000, 11);
  const CellTable cells = cell_table(d);
  const NuisanceSet theta = fit_nuisances(d, FitMode::ScoreSet, loose_trim());

  SUBCASE("target weights average to one") {
    for (Cell c : kCells) {
      double s = 0.0;
      for (const PanelUnit& u : d.units()) s += weight_t(u, c, cells);
      CHECK(s / static_cast<double>(d.size()) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("comparison weights average to about one") {
    const std::array<std::pair<Cell, Cell>, 4> pairs{{{Cell::A2, Cell::AInf},
                                                       {Cell::A2, Cell::B2},
                                                       {Cell::A2, Cell::BInf},
                                                       {Cell::B2, Cell::BInf}}};
    for (const auto& [num, src] : pairs) {
      double s = 0.0;
      for (const PanelUnit& u : d.units()) s += weight_c(u, num, src, cells, *theta.propensity);
      CHECK(std::abs(s / static_cast<double>(d.size()) - 1.0) < 0.1);
    }
  }
  SUBCASE("weighted OR is zero outside the target cell") {
    const std::vector<double> v = values(ScoreKind::WOR, d, theta);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.unit(i).cell() != Cell::A2) CHECK(v[i] == 0.0);
  }
  SUBCASE("zero outcome models reduce DR to IPW") {
    NuisanceOptions opts = loose_trim();
    opts.outcome_spec = ModelSpec::Zero;
    const NuisanceSet zero = fit_nuisances(d, FitMode::ScoreSet, opts);
    CHECK(values(ScoreKind::DR_A, d, zero) == values(ScoreKind::IPW_A, d, zero));
    CHECK(values(ScoreKind::DR_B, d, zero) == values(ScoreKind::IPW_B, d, zero));
    CHECK(values(ScoreKind::WDR, d, zero) == values(ScoreKind::WIPW, d, zero));
  }
  SUBCASE("influence-function standard error") {
    const ScoreVector dr = score_vector(ScoreKind::DR_A, d, cells, theta);
    const MeanWithSe m = mean_with_se(dr, d, cells);
    double s = 0.0;
    for (double v : dr.values) s += v;
    const double mu = s / static_cast<double>(d.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double eta = dr.values[i] - weight_t(d.unit(i), Cell::A2, cells) * mu;
      ss += eta * eta;
    }
    CHECK(m.mean == doctest::Approx(mu).epsilon(1e-12));
    CHECK(m.se == doctest::Approx(std::sqrt(ss / static_cast<double>(d.size()) / static_cast<double>(d.size()))).epsilon(1e-10));
  }
}

TEST_CASE("score means do not depend on unit order") {
  const PanelDataset d = simulated(3000, 19);
  std::vector<PanelUnit> units(d.units().begin(), d.units().end());
  std::reverse(units.begin(), units.end());
  const PanelDataset r = d.with_units(units);
  const NuisanceSet td = fit_nuisances(d, FitMode::ScoreSet, loose_trim());
  const NuisanceSet tr = fit_nuisances(r, FitMode::ScoreSet, loose_trim());
  for (ScoreKind k : kScoreKinds) {
    INFO(score_name(k));
    CHECK(std::abs(score_mean(k, d, cell_table(d), td) - score_mean(k, r, cell_table(r), tr)) < 1e-9);
  }
}

TEST_CASE("parallel scores match the serial reference bit for bit") {
  tdid::test::use_threads(4);
  const PanelDataset d = simulated(5000, 23);
  const CellTable cells = cell_table(d);
  const NuisanceSet theta = fit_nuisances(d, FitMode::ScoreSet, loose_trim());
  for (bool hajek : {false, true}) {
    ScoreOptions opts;
    opts.normalize_weights = hajek;
    const auto par = score_vectors(kScoreKinds, d, cells, theta, opts);
    const auto ser = score_vectors_serial(kScoreKinds, d, cells, theta, opts);
    REQUIRE(par.size() == ser.size());
    for (std::size_t k = 0; k < par.size(); ++k) {
      CHECK(par[k].kind == ser[k].kind);
      CHECK(par[k].values == ser[k].values);
    }
  }
}

TEST_CASE("score names round trip") {
  for (ScoreKind k : kScoreKinds) CHECK(parse_score_kind(score_name(k)) == k);
  CHECK(target_cell(ScoreKind::DR_B) == Cell::B2);
  CHECK(target_cell(ScoreKind::WDR) == Cell::A2);
  CHECK_THROWS_AS(parse_score_kind("psi_nope"), Error);
}
