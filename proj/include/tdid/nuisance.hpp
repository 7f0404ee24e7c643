#pragma once

// Nuisance parameters: generalized propensity scores p(g,e,x) over the four
// cells and outcome regressions m(g,e,x).

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tdid/logit.hpp"
#include "tdid/ols.hpp"
#include "tdid/panel.hpp"

namespace tdid {

// Maps raw covariates to the regressors each nuisance model sees.
struct CovariateBasis {
  std::string name = "linear";
  std::function<std::vector<double>(std::span<const double>)> expand;  // empty: identity

  std::vector<double> apply(std::span<const double> x) const;
  Eigen::MatrixXd apply(const PanelDataset& dataset) const;
};

// "linear" (identity) or "quadratic" (x followed by x_j^2).
CovariateBasis basis_by_name(const std::string& name);

enum class PropensityKind { Multinomial4, SeparateBinary };

struct PropensityModel {
  PropensityKind kind = PropensityKind::Multinomial4;
  // 4 rows in cell order (a,2), (a,inf), (b,2), (b,inf); intercept first.
  // Multinomial4 rows are softmax logits with the (b,inf) row fixed at zero;
  // SeparateBinary rows are one-vs-rest logits, renormalised on prediction.
  Eigen::MatrixXd coefficients;
  double trim_epsilon = 0.01;
  CovariateBasis basis;
  bool intercept_only = false;  // ignores covariates entirely
  int iterations = 0;
  std::vector<double> loglik_trace;
};

struct PropensityPrediction {
  std::array<double, 4> p{};
  bool flagged = false;  // some component outside [trim_epsilon, 1 - trim_epsilon]

  double operator[](Cell c) const noexcept { return p[index(c)]; }
};

PropensityModel fit_logistic_multinomial(const Eigen::MatrixXd& covariates,
                                         std::span<const Cell> cell_labels,
                                         const LogitOptions& options = {});
PropensityModel fit_logistic_separate_binary(const Eigen::MatrixXd& covariates,
                                             std::span<const Cell> cell_labels,
                                             const LogitOptions& options = {});

// Intercept-only model: predicted probabilities equal the given shares.
PropensityModel constant_propensity(const std::array<double, 4>& shares);

PropensityPrediction predict_propensity(const PropensityModel& model, std::span<const double> x);

enum class FitMode { ScoreSet, EightModelOR };

enum class ModelSpec {
  Full,           // intercept plus basis-expanded covariates
  InterceptOnly,  // covariates dropped
  Zero,           // outcome models only: m == 0
};

struct NuisanceOptions {
  PropensityKind propensity_kind = PropensityKind::Multinomial4;
  ModelSpec propensity_spec = ModelSpec::Full;
  ModelSpec outcome_spec = ModelSpec::Full;
  CovariateBasis basis;
  double trim_epsilon = 0.01;
  LogitOptions logit;
};

struct NuisanceSet {
  FitMode mode = FitMode::ScoreSet;
  std::optional<PropensityModel> propensity;
  // E[Y2 - Y1 | cell, x] per cell.
  std::map<Cell, LinearModel> outcome_models;
  // Level regressions E[Y_t | cell, x] keyed by (cell, period in {1, 2}).
  std::map<std::pair<Cell, int>, LinearModel> eight_model_or;
  CovariateBasis basis;
  bool outcome_intercept_only = false;

  bool has_outcome(Cell c) const { return outcome_models.count(c) > 0; }
  const LinearModel& outcome_model(Cell c) const;
  const LinearModel& level_model(Cell c, int period) const;
  const PropensityModel& propensity_model() const;

  // m(c, x) for raw covariates x.
  double outcome(Cell c, std::span<const double> x) const;
  double level(Cell c, int period, std::span<const double> x) const;
};

NuisanceSet fit_nuisances(const PanelDataset& dataset, FitMode mode,
                          const NuisanceOptions& options = {});

}  // namespace tdid
