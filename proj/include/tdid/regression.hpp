#pragma once

// Conventional DID / TDID interaction regressions on the stacked two-period
// panel, and the eight-model outcome-regression procedure.

#include "tdid/estimators.hpp"
#include "tdid/ols.hpp"

namespace tdid {

struct RegressionOptions {
  CovarianceKind covariance = CovarianceKind::HC1;  // ClusterCR1 clusters on unit
};

// Y_it = a0 + a1 E + a2 post + a3 E*post [+ phi X] on group g's units; returns a3.
EstimateResult ols_did(const PanelDataset& dataset, Group group, bool with_controls,
                       const RegressionOptions& options = {});

// Full three-way interaction in (E, post, G=a) [+ phi X]; returns the triple
// interaction coefficient.
EstimateResult ols_tdid(const PanelDataset& dataset, bool with_controls,
                        const RegressionOptions& options = {});

// Average over group g's eligible units of
// [m(g,2,t=2) - m(g,2,t=1)] - [m(g,inf,t=2) - m(g,inf,t=1)] evaluated at x.
// Point estimate only (se_kind None); standard errors come from the bootstrap.
EstimateResult or_did(const PanelDataset& dataset, const NuisanceSet& theta, Group group);

// Group B's four level models evaluated on group A's eligible units.
EstimateResult or_wdid_b(const PanelDataset& dataset, const NuisanceSet& theta);

struct OrDifferences {
  EstimateResult a_minus_b;   // OR_DID_A - OR_DID_B
  EstimateResult a_minus_wb;  // OR_DID_A - OR_WDID_B
};
OrDifferences or_differences(const PanelDataset& dataset, const NuisanceSet& theta);

}  // namespace tdid
