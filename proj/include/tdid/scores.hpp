#pragma once

// Weights and per-unit score functions for the outcome-regression, inverse
// probability weighted and doubly robust DID scores, both for a group's own
// covariate distribution and for group B reweighted to group A ("W" scores).

#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tdid/nuisance.hpp"
#include "tdid/panel.hpp"

namespace tdid {

enum class ScoreKind { OR_A, OR_B, IPW_A, IPW_B, DR_A, DR_B, WOR, WIPW, WDR };

inline constexpr std::array<ScoreKind, 9> kScoreKinds{
    ScoreKind::OR_A, ScoreKind::OR_B, ScoreKind::IPW_A, ScoreKind::IPW_B, ScoreKind::DR_A,
    ScoreKind::DR_B, ScoreKind::WOR,  ScoreKind::WIPW,  ScoreKind::WDR};

std::string_view score_name(ScoreKind kind) noexcept;
ScoreKind parse_score_kind(std::string_view name);

// Cell whose share normalises the score: (a,2) for group-A and weighted
// scores, (b,2) for group-B scores.
Cell target_cell(ScoreKind kind) noexcept;

struct ScoreOptions {
  // Hajek variant: each w_C divided by its sample mean. Off by default.
  bool normalize_weights = false;
};

struct ScoreVector {
  ScoreKind kind = ScoreKind::DR_A;
  std::vector<double> values;

  double mean() const;
};

// 1{unit in target} / share(target).
double weight_t(const PanelUnit& unit, Cell target, const CellTable& cells);

// 1{unit in source} / share(numerator) * p(numerator, x) / p(source, x).
double weight_c(const PanelUnit& unit, Cell numerator, Cell source, const CellTable& cells,
                const PropensityModel& ps);

// Pointwise score with unnormalised weights.
double score(ScoreKind kind, const PanelUnit& unit, const CellTable& cells, const NuisanceSet& theta);

// Scores for every unit (OpenMP over units). Trimming violations across the
// whole sample are collected into a single TrimmingError.
std::vector<ScoreVector> score_vectors(std::span<const ScoreKind> kinds, const PanelDataset& dataset,
                                       const CellTable& cells, const NuisanceSet& theta,
                                       const ScoreOptions& options = {});
// Single-threaded reference for score_vectors.
std::vector<ScoreVector> score_vectors_serial(std::span<const ScoreKind> kinds,
                                              const PanelDataset& dataset, const CellTable& cells,
                                              const NuisanceSet& theta,
                                              const ScoreOptions& options = {});

ScoreVector score_vector(ScoreKind kind, const PanelDataset& dataset, const CellTable& cells,
                         const NuisanceSet& theta, const ScoreOptions& options = {});

double score_mean(ScoreKind kind, const PanelDataset& dataset, const CellTable& cells,
                  const NuisanceSet& theta, const ScoreOptions& options = {});

// Sample mean of a score with its influence-function standard error,
// eta_i = psi_i - w_T(target)_i * mean.
struct MeanWithSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanWithSe mean_with_se(const ScoreVector& scores, const PanelDataset& dataset, const CellTable& cells);
// Same for the paired difference of two scores with a common target cell.
MeanWithSe difference_with_se(const ScoreVector& lhs, const ScoreVector& rhs,
                              const PanelDataset& dataset, const CellTable& cells);

void write_scores_csv(const PanelDataset& dataset, std::span<const ScoreVector> scores,
                      const std::filesystem::path& path);

}  // namespace tdid
