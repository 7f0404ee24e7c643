#include "tdid/regression.hpp"

#include <cmath>

#include "tdid/error.hpp"

namespace tdid {
namespace {

SeKind se_kind_of(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::Classical: return SeKind::RegressionClassical;
    case CovarianceKind::HC1: return SeKind::RegressionHC1;
    case CovarianceKind::ClusterCR1: return SeKind::RegressionCR1;
  }
  return SeKind::None;
}

EstimandLabel unconditional_tdid_estimand(Mechanism mechanism) {
  return mechanism == Mechanism::OnlyGroupA ? EstimandLabel::ATT_A : EstimandLabel::ATT_A_minus_ATT_B;
}

struct StackedRegression {
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  std::vector<std::size_t> clusters;
  std::vector<std::string> names;
};

// Two rows per selected unit: period 1 then period 2.
template <class Row>
StackedRegression stack(const PanelDataset& dataset, const std::vector<std::size_t>& units,
                        std::vector<std::string> names, bool with_controls, Row&& row) {
  const std::size_t base = names.size();
  const std::size_t d = with_controls ? dataset.dim() : 0;
  if (with_controls)
    for (const std::string& c : dataset.covariate_names()) names.push_back(c);
  StackedRegression reg;
  const auto rows = static_cast<Eigen::Index>(2 * units.size());
  reg.design = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(base + d));
  reg.response.resize(rows);
  reg.clusters.resize(2 * units.size());
  for (std::size_t k = 0; k < units.size(); ++k) {
    const PanelUnit& u = dataset.unit(units[k]);
    for (int post = 0; post < 2; ++post) {
      const auto r = static_cast<Eigen::Index>(2 * k + static_cast<std::size_t>(post));
      const std::vector<double> values = row(u, post);
      for (std::size_t j = 0; j < base; ++j) reg.design(r, static_cast<Eigen::Index>(j)) = values[j];
      for (std::size_t j = 0; j < d; ++j)
        reg.design(r, static_cast<Eigen::Index>(base + j)) = u.covariates[j];
      reg.response[r] = post ? u.y2 : u.y1;
      reg.clusters[static_cast<std::size_t>(r)] = k;
    }
  }
  reg.names = std::move(names);
  return reg;
}

EstimateResult fit_target(const StackedRegression& reg, Eigen::Index target, std::size_t n_units,
                          const RegressionOptions& options, const std::string& label) {
  const OlsFit fit = fit_ols_full(reg.design, reg.response, label, reg.names);
  const Eigen::MatrixXd cov = ols_covariance(fit, reg.design, options.covariance, reg.clusters);
  EstimateResult r;
  r.tau_hat = fit.model.coefficients[target];
  r.se = std::sqrt(std::max(0.0, cov(target, target)));
  r.se_kind = se_kind_of(options.covariance);
  r.n = n_units;
  return r;
}

}  // namespace

EstimateResult ols_did(const PanelDataset& dataset, Group group, bool with_controls,
                       const RegressionOptions& options) {
  std::vector<std::size_t> units;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (dataset.unit(i).group == group) units.push_back(i);
  const StackedRegression reg =
      stack(dataset, units, {"intercept", "eligible", "post", "eligible:post"}, with_controls,
            [](const PanelUnit& u, int post) {
              const double e = u.eligibility == Eligibility::Eligible ? 1.0 : 0.0;
              return std::vector<double>{1.0, e, double(post), e * post};
            });
  const std::string label = group == Group::A ? "DID regression, group A" : "DID regression, group B";
  EstimateResult r = fit_target(reg, 3, units.size(), options, label);
  r.method = group == Group::A ? Method::OLS_DID_A : Method::OLS_DID_B;
  r.estimand_label = EstimandLabel::Descriptive;
  return r;
}

EstimateResult ols_tdid(const PanelDataset& dataset, bool with_controls,
                        const RegressionOptions& options) {
  std::vector<std::size_t> units(dataset.size());
  for (std::size_t i = 0; i < units.size(); ++i) units[i] = i;
  const StackedRegression reg = stack(
      dataset, units,
      {"intercept", "eligible", "post", "group_a", "eligible:post", "eligible:group_a",
       "post:group_a", "eligible:post:group_a"},
      with_controls, [](const PanelUnit& u, int post) {
        const double e = u.eligibility == Eligibility::Eligible ? 1.0 : 0.0;
        const double a = u.group == Group::A ? 1.0 : 0.0;
        const double t = post;
        return std::vector<double>{1.0, e, t, a, e * t, e * a, t * a, e * t * a};
      });
  EstimateResult r = fit_target(reg, 7, units.size(), options, "TDID regression");
  r.method = Method::OLS_TDID;
  r.estimand_label = with_controls ? EstimandLabel::Descriptive
                                   : unconditional_tdid_estimand(dataset.mechanism());
  return r;
}

namespace {

// Mean DID contrast of `models_group`'s level models over `target` units.
double or_contrast(const PanelDataset& dataset, const NuisanceSet& theta, Cell target,
                   Group models_group) {
  const Cell c2 = cell_of(models_group, Eligibility::Eligible);
  const Cell cinf = cell_of(models_group, Eligibility::Never);
  for (Cell c : {c2, cinf})
    for (int t : {1, 2}) (void)theta.level_model(c, t);  // missing models fail before the loop
  double sum = 0.0;
  std::size_t count = 0;
  for (const PanelUnit& u : dataset.units()) {
    if (u.cell() != target) continue;
    const double treated = theta.level(c2, 2, u.covariates) - theta.level(c2, 1, u.covariates);
    const double control = theta.level(cinf, 2, u.covariates) - theta.level(cinf, 1, u.covariates);
    sum += treated - control;
    ++count;
  }
  if (count == 0) {
    throw Error(ErrorKind::Estimation,
                "outcome-regression DID: no units in cell " + std::string(cell_name(target)));
  }
  return sum / static_cast<double>(count);
}

}  // namespace

EstimateResult or_did(const PanelDataset& dataset, const NuisanceSet& theta, Group group) {
  EstimateResult r;
  r.tau_hat = or_contrast(dataset, theta, cell_of(group, Eligibility::Eligible), group);
  r.method = group == Group::A ? Method::OR_DID_A : Method::OR_DID_B;
  r.estimand_label = EstimandLabel::Descriptive;
  r.n = dataset.size();
  return r;
}

EstimateResult or_wdid_b(const PanelDataset& dataset, const NuisanceSet& theta) {
  EstimateResult r;
  r.tau_hat = or_contrast(dataset, theta, Cell::A2, Group::B);
  r.method = Method::OR_WDID_B;
  r.estimand_label = EstimandLabel::Descriptive;
  r.n = dataset.size();
  return r;
}

OrDifferences or_differences(const PanelDataset& dataset, const NuisanceSet& theta) {
  const double a = or_did(dataset, theta, Group::A).tau_hat;
  const double b = or_did(dataset, theta, Group::B).tau_hat;
  const double wb = or_wdid_b(dataset, theta).tau_hat;
  OrDifferences out;
  out.a_minus_b.tau_hat = a - b;
  out.a_minus_b.method = Method::OR_difference;
  out.a_minus_b.estimand_label = theta.outcome_intercept_only
                                     ? unconditional_tdid_estimand(dataset.mechanism())
                                     : EstimandLabel::Descriptive;
  out.a_minus_b.n = dataset.size();
  out.a_minus_wb.tau_hat = a - wb;
  out.a_minus_wb.method = Method::OR_reweighted_difference;
  out.a_minus_wb.estimand_label = reweighted_estimand(dataset.mechanism());
  out.a_minus_wb.n = dataset.size();
  return out;
}

}  // namespace tdid
