#pragma once

// Shared fixtures for the unit tests.

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <omp.h>

#include "tdid/dgp.hpp"
#include "tdid/panel.hpp"

namespace tdid::test {

inline PanelUnit make_unit(std::string id, double y1, double y2, Group g, Eligibility e,
                           std::vector<double> x = {}) {
  PanelUnit u;
  u.id = std::move(id);
  u.y1 = y1;
  u.y2 = y2;
  u.group = g;
  u.eligibility = e;
  u.covariates = std::move(x);
  return u;
}

// One unit per cell, no covariates.
inline PanelDataset minimal_design(Mechanism m = Mechanism::BothGroups) {
  std::vector<PanelUnit> units{
      make_unit("1", 1.0, 4.0, Group::A, Eligibility::Eligible),
      make_unit("2", 2.0, 3.0, Group::A, Eligibility::Never),
      make_unit("3", 0.5, 2.5, Group::B, Eligibility::Eligible),
      make_unit("4", 1.5, 1.0, Group::B, Eligibility::Never),
  };
  return PanelDataset(std::move(units), {}, m);
}

inline PanelDataset simulated(std::size_t n, std::uint64_t seed, EffectCase c = EffectCase::HeterogeneousEffects,
                              double mu_a = 1.0, double mu_b = 3.0,
                              Mechanism m = Mechanism::BothGroups, double slope = 1.0) {
  DgpSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.effect_case = c;
  spec.mu_a = mu_a;
  spec.mu_b = mu_b;
  spec.mechanism = m;
  spec.cpt_bias_slope = slope;
  return simulate_sample(spec);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tdid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// More threads than cores so parallel-vs-serial comparisons exercise real
// interleavings even on a single-core machine.
inline void use_threads(int k = 4) { omp_set_num_threads(k); }

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace tdid::test
