#pragma once

// Repeated-sampling study of the naive and reweighted DR estimators.

#include <filesystem>
#include <string>
#include <vector>

#include "tdid/dgp.hpp"
#include "tdid/nuisance.hpp"
#include "tdid/scores.hpp"

namespace tdid {

struct EstimatorConfig {
  NuisanceOptions nuisance = default_simulation_nuisance();
  ScoreOptions scores;

  // Logit propensity + linear outcome models with a 1e-6 trimming floor
  // (the simulated design puts a few units below 0.01 in most samples).
  static NuisanceOptions default_simulation_nuisance() {
    NuisanceOptions o;
    o.trim_epsilon = 1e-6;
    return o;
  }
};

struct ReplicationStatus {
  bool ok = true;
  std::string message;
};

struct MonteCarloResult {
  std::vector<double> estimates_naive;
  std::vector<double> estimates_reweighted;
  std::vector<double> se_naive;
  std::vector<double> se_reweighted;
  std::vector<ReplicationStatus> flags;

  std::size_t replications() const noexcept { return flags.size(); }
  std::size_t failures() const noexcept;
};

// Replication r simulates with seed derive_seed(spec.seed, r). Failed
// replications are flagged (their estimates are NaN); more than 1% failures
// raises an Estimation error.
MonteCarloResult run_monte_carlo(const DgpSpec& spec, int replications,
                                 const EstimatorConfig& config = {});
MonteCarloResult run_monte_carlo_serial(const DgpSpec& spec, int replications,
                                        const EstimatorConfig& config = {});

struct EstimatorSummary {
  double mean = 0.0;
  double sd = 0.0;       // B-1 denominator; 0 with a single replication
  double mean_se = 0.0;  // average influence-function se
  std::size_t ok = 0;
};

struct MonteCarloSummary {
  EstimatorSummary naive;
  EstimatorSummary reweighted;
  std::size_t replications = 0;
  std::size_t failures = 0;
  bool degenerate = false;  // fewer than two successful replications
};

MonteCarloSummary summarize(const MonteCarloResult& result);

// CSV columns estimator_label, bin_left, bin_right, count over the successful
// replications, equal-width bins spanning each estimator's range.
void export_histogram(const MonteCarloResult& result, const std::filesystem::path& path, int bins);

}  // namespace tdid
