#include "tdid/estimators.hpp"

#include <cmath>
#include <numeric>

#include "tdid/error.hpp"

namespace tdid {

std::string_view estimand_name(EstimandLabel label) noexcept {
  switch (label) {
    case EstimandLabel::ATT_A: return "ATT_A";
    case EstimandLabel::ATT_A_minus_ATT_B: return "ATT_A_minus_ATT_B";
    case EstimandLabel::AvgCATTDiff_onA: return "AvgCATTDiff_onA";
    case EstimandLabel::Descriptive: return "Descriptive";
  }
  return "?";
}

std::string_view method_name(Method method) noexcept {
  switch (method) {
    case Method::DR_reweighted: return "DR_reweighted";
    case Method::DR_naive_difference: return "DR_naive_difference";
    case Method::OLS_TDID: return "OLS_TDID";
    case Method::OLS_DID_A: return "OLS_DID_A";
    case Method::OLS_DID_B: return "OLS_DID_B";
    case Method::OR_DID_A: return "OR_DID_A";
    case Method::OR_DID_B: return "OR_DID_B";
    case Method::OR_WDID_B: return "OR_WDID_B";
    case Method::OR_difference: return "OR_difference";
    case Method::OR_reweighted_difference: return "OR_reweighted_difference";
  }
  return "?";
}

std::string_view se_kind_name(SeKind kind) noexcept {
  switch (kind) {
    case SeKind::None: return "none";
    case SeKind::InfluenceFunction: return "influence_function";
    case SeKind::Bootstrap: return "bootstrap";
    case SeKind::RegressionClassical: return "classical";
    case SeKind::RegressionHC1: return "hc1";
    case SeKind::RegressionCR1: return "cluster_cr1";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : kMethods)
    if (method_name(m) == name) return m;
  throw Error(ErrorKind::Configuration, "unknown method '" + std::string(name) + "'");
}

EstimandLabel reweighted_estimand(Mechanism mechanism) noexcept {
  return mechanism == Mechanism::OnlyGroupA ? EstimandLabel::ATT_A : EstimandLabel::AvgCATTDiff_onA;
}

VarianceEstimate variance(std::span<const double> eta) {
  VarianceEstimate out;
  if (eta.empty()) return out;
  const auto n = static_cast<double>(eta.size());
  double ss = 0.0;
  for (double v : eta) ss += v * v;
  out.v_hat = ss / n;
  out.se = std::sqrt(out.v_hat / n);
  return out;
}

VarianceEstimate variance(std::span<const double> contributions,
                          std::span<const double> target_weights, double tau) {
  if (contributions.size() != target_weights.size())
    throw Error(ErrorKind::Configuration, "variance: contribution/weight length mismatch");
  std::vector<double> eta(contributions.size());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = contributions[i] - target_weights[i] * tau;
  return variance(eta);
}

namespace {

std::vector<double> target_weights(const PanelDataset& dataset, const CellTable& cells, Cell target) {
  std::vector<double> w(dataset.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight_t(dataset.unit(i), target, cells);
  return w;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Influence values of mean(lhs) - mean(rhs), each centred on its own target cell.
std::vector<double> difference_influence(const PanelDataset& dataset, const CellTable& cells,
                                         const ScoreVector& lhs, const ScoreVector& rhs,
                                         double& estimate) {
  const double mu_l = lhs.mean();
  const double mu_r = rhs.mean();
  estimate = mu_l - mu_r;
  const std::vector<double> wl = target_weights(dataset, cells, target_cell(lhs.kind));
  const std::vector<double> wr = target_weights(dataset, cells, target_cell(rhs.kind));
  std::vector<double> eta(dataset.size());
  for (std::size_t i = 0; i < eta.size(); ++i)
    eta[i] = (lhs.values[i] - wl[i] * mu_l) - (rhs.values[i] - wr[i] * mu_r);
  return eta;
}

}  // namespace

std::vector<double> influence_tau_t2(const PanelDataset& dataset, const CellTable& cells,
                                     std::span<const double> psi_dr_a, std::span<const double> psi_wdr,
                                     double tau) {
  const std::vector<double> w = target_weights(dataset, cells, Cell::A2);
  std::vector<double> eta(dataset.size());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = psi_dr_a[i] - psi_wdr[i] - w[i] * tau;
  return eta;
}

EstimateResult estimate_tau_t2(const PanelDataset& dataset, const NuisanceSet& theta,
                               const EstimatorOptions& options) {
  const CellTable cells = cell_table(dataset);
  const std::array<ScoreKind, 2> kinds{ScoreKind::DR_A, ScoreKind::WDR};
  const std::vector<ScoreVector> s = score_vectors(kinds, dataset, cells, theta, options.scores);

  std::vector<double> diff(dataset.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = s[0].values[i] - s[1].values[i];

  EstimateResult r;
  r.method = Method::DR_reweighted;
  r.estimand_label = reweighted_estimand(dataset.mechanism());
  r.n = dataset.size();
  r.tau_hat = mean_of(diff);
  std::vector<double> eta = influence_tau_t2(dataset, cells, s[0].values, s[1].values, r.tau_hat);
  r.se = variance(eta).se;
  r.se_kind = SeKind::InfluenceFunction;
  if (options.keep_influence) r.influence_values = std::move(eta);
  return r;
}

EstimateResult estimate_naive_difference(const PanelDataset& dataset, const NuisanceSet& theta,
                                         const EstimatorOptions& options) {
  const CellTable cells = cell_table(dataset);
  const std::array<ScoreKind, 2> kinds{ScoreKind::DR_A, ScoreKind::DR_B};
  const std::vector<ScoreVector> s = score_vectors(kinds, dataset, cells, theta, options.scores);

  EstimateResult r;
  r.method = Method::DR_naive_difference;
  r.estimand_label = EstimandLabel::Descriptive;
  r.n = dataset.size();
  std::vector<double> eta = difference_influence(dataset, cells, s[0], s[1], r.tau_hat);
  r.se = variance(eta).se;
  r.se_kind = SeKind::InfluenceFunction;
  if (options.keep_influence) r.influence_values = std::move(eta);
  return r;
}

BiasEstimate bias_diagnostic(const PanelDataset& dataset, const NuisanceSet& theta,
                             const EstimatorOptions& options) {
  if (dataset.mechanism() != Mechanism::OnlyGroupA) {
    throw Error(ErrorKind::UnsupportedMechanism,
                "bias diagnostic requires mechanism only-a: the conditional parallel-trends bias "
                "is identified only when eligible group-B units stay untreated");
  }
  const CellTable cells = cell_table(dataset);
  const std::array<ScoreKind, 2> kinds{ScoreKind::WDR, ScoreKind::DR_B};
  const std::vector<ScoreVector> s = score_vectors(kinds, dataset, cells, theta, options.scores);
  BiasEstimate out;
  const std::vector<double> eta = difference_influence(dataset, cells, s[0], s[1], out.bias_hat);
  out.se = variance(eta).se;
  return out;
}

}  // namespace tdid
