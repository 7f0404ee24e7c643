#include "tdid/dgp.hpp"

#include <cmath>
#include <string>

#include "tdid/error.hpp"
#include "tdid/rng.hpp"

namespace tdid {

std::string_view effect_case_name(EffectCase c) noexcept {
  return c == EffectCase::ConstantEffects ? "constant" : "heterogeneous";
}

EffectCase parse_effect_case(std::string_view text) {
  if (text == "constant" || text == "1") return EffectCase::ConstantEffects;
  if (text == "heterogeneous" || text == "2") return EffectCase::HeterogeneousEffects;
  throw Error(ErrorKind::Configuration,
              "unknown effect case '" + std::string(text) + "' (expected constant or heterogeneous)");
}

void check_spec(const DgpSpec& spec) {
  if (spec.n < 40) throw Error(ErrorKind::Configuration, "simulation sample size must be at least 40");
  if (!std::isfinite(spec.mu_a) || !std::isfinite(spec.mu_b) || !std::isfinite(spec.cpt_bias_slope))
    throw Error(ErrorKind::Configuration, "simulation parameters must be finite");
}

double treatment_effect(EffectCase c, Group g, double x) noexcept {
  const double scale = g == Group::A ? 4.0 : 1.0;
  return c == EffectCase::ConstantEffects ? scale : scale * x;
}

PanelDataset simulate_sample(const DgpSpec& spec) {
  check_spec(spec);
  const CounterRng rng(spec.seed);
  std::vector<PanelUnit> units(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::uint64_t base = 5 * static_cast<std::uint64_t>(i);
    PanelUnit& u = units[i];
    u.id = std::to_string(i + 1);
    u.group = rng.uniform(base) < 0.5 ? Group::A : Group::B;
    u.eligibility = rng.uniform(base + 1) < 0.5 ? Eligibility::Eligible : Eligibility::Never;
    const double x = (u.group == Group::A ? spec.mu_a : spec.mu_b) + rng.normal(base + 2);
    const double eligible = u.eligibility == Eligibility::Eligible ? 1.0 : 0.0;
    u.covariates = {x};
    u.y1 = x + rng.normal(base + 3);
    u.y2 = x + spec.cpt_bias_slope * eligible * x + rng.normal(base + 4);
    if (treated_in_period2(u, spec.mechanism)) u.y2 += treatment_effect(spec.effect_case, u.group, x);
  }
  return PanelDataset(std::move(units), {"x"}, spec.mechanism);
}

OracleValues closed_form_oracle(const DgpSpec& spec) {
  check_spec(spec);
  const double s = spec.cpt_bias_slope;
  const bool constant = spec.effect_case == EffectCase::ConstantEffects;
  const bool b_treated = spec.mechanism == Mechanism::BothGroups;

  OracleValues o;
  // Effects are linear in x, so their conditional means are the effects at mu_g.
  o.att_a = treatment_effect(spec.effect_case, Group::A, spec.mu_a);
  o.att_b = treatment_effect(spec.effect_case, Group::B, spec.mu_b);
  const double beta_b_onA = constant ? 1.0 : spec.mu_a;
  o.mean_D_a_onA = o.att_a + s * spec.mu_a;
  o.mean_D_b_onB = (b_treated ? o.att_b : 0.0) + s * spec.mu_b;
  o.mean_D_b_onA = (b_treated ? beta_b_onA : 0.0) + s * spec.mu_a;
  o.naive_diff = o.mean_D_a_onA - o.mean_D_b_onB;
  o.reweighted_diff = o.mean_D_a_onA - o.mean_D_b_onA;
  o.target_tau_t2 = o.reweighted_diff;
  o.bias_naive = s * (spec.mu_a - spec.mu_b);
  o.target_label = reweighted_estimand(spec.mechanism);
  return o;
}

}  // namespace tdid
