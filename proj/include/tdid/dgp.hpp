#pragma once

// Analytical two-group example: X ~ N(mu_g, 1) and a conditional parallel
// trends bias s * x attached to eligibility, with closed-form estimands.

#include <cstdint>
#include <string_view>

#include "tdid/estimators.hpp"
#include "tdid/panel.hpp"

namespace tdid {

enum class EffectCase {
  ConstantEffects,       // beta(a) = 4, beta(b) = 1
  HeterogeneousEffects,  // beta(a,x) = 4x, beta(b,x) = x
};

std::string_view effect_case_name(EffectCase c) noexcept;  // "constant" / "heterogeneous"
EffectCase parse_effect_case(std::string_view text);

struct DgpSpec {
  double mu_a = 1.0;
  double mu_b = 3.0;
  EffectCase effect_case = EffectCase::HeterogeneousEffects;
  Mechanism mechanism = Mechanism::BothGroups;
  std::size_t n = 2000;
  std::uint64_t seed = 0;
  // Slope of the eligibility trend term s * 1{E=2} * X; 0 gives conditional
  // parallel trends.
  double cpt_bias_slope = 1.0;
};

// Throws Configuration on n < 40 or non-finite parameters.
void check_spec(const DgpSpec& spec);

// P(G=a) = P(E=2) = 1/2 independently.
// Y1 = X + e1; Y2 = X + s 1{E=2} X + e2 + W2 beta(G, X).
PanelDataset simulate_sample(const DgpSpec& spec);

double treatment_effect(EffectCase c, Group g, double x) noexcept;

struct OracleValues {
  double att_a = 0.0;
  // Mean effect of group B's eligible units; hypothetical (never realised)
  // when only group A is treated.
  double att_b = 0.0;
  double mean_D_a_onA = 0.0;  // E[D(a,X) | G=a, E=2]
  double mean_D_b_onB = 0.0;  // E[D(b,X) | G=b, E=2]
  double mean_D_b_onA = 0.0;  // E[D(b,X) | G=a, E=2]
  double naive_diff = 0.0;
  double reweighted_diff = 0.0;
  double target_tau_t2 = 0.0;
  double bias_naive = 0.0;  // s * (mu_a - mu_b): group gap in average trend bias
  EstimandLabel target_label = EstimandLabel::AvgCATTDiff_onA;
};

OracleValues closed_form_oracle(const DgpSpec& spec);

}  // namespace tdid
