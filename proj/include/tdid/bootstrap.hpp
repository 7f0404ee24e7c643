#pragma once

// Nonparametric pairs bootstrap over units. Replicate b, attempt k draws its
// resample from the counter stream derive_seed(derive_seed(seed, b), k), so
// results do not depend on thread count or schedule.

#include <cstdint>
#include <functional>
#include <vector>

#include "tdid/panel.hpp"

namespace tdid {

enum class BootstrapScheme { PairsNonparametric };

struct BootstrapConfig {
  int replications = 999;
  std::uint64_t seed = 0;
  BootstrapScheme scheme = BootstrapScheme::PairsNonparametric;
};

using Statistic = std::function<double(const PanelDataset&)>;
using VectorStatistic = std::function<std::vector<double>(const PanelDataset&)>;

struct BootstrapResult {
  std::vector<std::vector<double>> draws;  // replications x statistics
  std::vector<double> se;                   // sample SD per statistic, B-1 denominator
  std::size_t attempts = 0;                 // including redrawn resamples
};

// Resample for replicate b; redraws on an empty cell.
PanelDataset bootstrap_resample(const PanelDataset& dataset, std::uint64_t seed, int replicate,
                                std::size_t& attempts, std::size_t max_attempts);

BootstrapResult bootstrap(const PanelDataset& dataset, const VectorStatistic& statistic,
                          const BootstrapConfig& config);
BootstrapResult bootstrap_serial(const PanelDataset& dataset, const VectorStatistic& statistic,
                                 const BootstrapConfig& config);

double bootstrap_se(const PanelDataset& dataset, const Statistic& statistic,
                    const BootstrapConfig& config);

}  // namespace tdid
