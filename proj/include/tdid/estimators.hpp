#pragma once

// Score-based TDID estimators: the reweighted doubly robust estimator, the
// naive difference of group DR estimators, and the mechanism-(i) bias
// diagnostic, all with influence-function standard errors.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tdid/nuisance.hpp"
#include "tdid/panel.hpp"
#include "tdid/scores.hpp"

namespace tdid {

enum class EstimandLabel { ATT_A, ATT_A_minus_ATT_B, AvgCATTDiff_onA, Descriptive };

enum class Method {
  DR_reweighted,
  DR_naive_difference,
  OLS_TDID,
  OLS_DID_A,
  OLS_DID_B,
  OR_DID_A,
  OR_DID_B,
  OR_WDID_B,
  OR_difference,
  OR_reweighted_difference,
};

inline constexpr std::array<Method, 10> kMethods{
    Method::DR_reweighted, Method::DR_naive_difference, Method::OLS_TDID,  Method::OLS_DID_A,
    Method::OLS_DID_B,     Method::OR_DID_A,           Method::OR_DID_B,  Method::OR_WDID_B,
    Method::OR_difference, Method::OR_reweighted_difference};

enum class SeKind { None, InfluenceFunction, Bootstrap, RegressionClassical, RegressionHC1, RegressionCR1 };

std::string_view estimand_name(EstimandLabel label) noexcept;
std::string_view method_name(Method method) noexcept;
std::string_view se_kind_name(SeKind kind) noexcept;
Method parse_method(std::string_view name);

struct EstimateResult {
  double tau_hat = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  EstimandLabel estimand_label = EstimandLabel::Descriptive;
  Method method = Method::DR_reweighted;
  SeKind se_kind = SeKind::None;
  std::optional<std::vector<double>> influence_values;
};

// Estimand identified by the reweighted difference under each mechanism.
EstimandLabel reweighted_estimand(Mechanism mechanism) noexcept;

struct EstimatorOptions {
  ScoreOptions scores;
  bool keep_influence = true;
};

// mean(psi_DR(a) - psi_WDR), eta = psi_DR(a) - psi_WDR - w_T(a,2) * tau.
EstimateResult estimate_tau_t2(const PanelDataset& dataset, const NuisanceSet& theta,
                               const EstimatorOptions& options = {});

// mean psi_DR(a) - mean psi_DR(b). Influence values are
// (psi_DR(a) - w_T(a,2) mu_a) - (psi_DR(b) - w_T(b,2) mu_b).
EstimateResult estimate_naive_difference(const PanelDataset& dataset, const NuisanceSet& theta,
                                         const EstimatorOptions& options = {});

struct VarianceEstimate {
  double v_hat = 0.0;
  double se = 0.0;
};

// V = mean(eta^2), se = sqrt(V / n), for already centred influence values.
VarianceEstimate variance(std::span<const double> eta);
// Same with eta_i = contributions_i - target_weights_i * tau.
VarianceEstimate variance(std::span<const double> contributions,
                          std::span<const double> target_weights, double tau);

// eta for the reweighted estimator at a given tau.
std::vector<double> influence_tau_t2(const PanelDataset& dataset, const CellTable& cells,
                                     std::span<const double> psi_dr_a, std::span<const double> psi_wdr,
                                     double tau);

struct BiasEstimate {
  double bias_hat = 0.0;
  double se = 0.0;
};

// mean psi_WDR - mean psi_DR(b): the bias term of the naive difference.
// Identified only when just group A is treated.
BiasEstimate bias_diagnostic(const PanelDataset& dataset, const NuisanceSet& theta,
                             const EstimatorOptions& options = {});

}  // namespace tdid
