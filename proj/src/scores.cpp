#include "tdid/scores.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "tdid/error.hpp"

namespace tdid {

std::string_view score_name(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::OR_A: return "psi_or_a";
    case ScoreKind::OR_B: return "psi_or_b";
    case ScoreKind::IPW_A: return "psi_ipw_a";
    case ScoreKind::IPW_B: return "psi_ipw_b";
    case ScoreKind::DR_A: return "psi_dr_a";
    case ScoreKind::DR_B: return "psi_dr_b";
    case ScoreKind::WOR: return "psi_wor";
    case ScoreKind::WIPW: return "psi_wipw";
    case ScoreKind::WDR: return "psi_wdr";
  }
  return "?";
}

ScoreKind parse_score_kind(std::string_view name) {
  for (ScoreKind k : kScoreKinds)
    if (score_name(k) == name) return k;
  throw Error(ErrorKind::Configuration, "unknown score kind '" + std::string(name) + "'");
}

Cell target_cell(ScoreKind kind) noexcept {
  switch (kind) {
    case ScoreKind::OR_B:
    case ScoreKind::IPW_B:
    case ScoreKind::DR_B:
      return Cell::B2;
    default:
      return Cell::A2;
  }
}

double ScoreVector::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

namespace {

struct Requirements {
  bool propensity = false;
  std::array<bool, 4> outcome{};
  std::array<bool, 4> source{};  // cells whose propensity appears in a ratio denominator
};

// Weight ratio pairs (numerator, source) that can appear.
constexpr std::array<std::pair<Cell, Cell>, 6> kRatioPairs{{
    {Cell::A2, Cell::A2},
    {Cell::A2, Cell::AInf},
    {Cell::B2, Cell::B2},
    {Cell::B2, Cell::BInf},
    {Cell::A2, Cell::B2},
    {Cell::A2, Cell::BInf},
}};

constexpr std::size_t pair_slot(Cell num, Cell src) noexcept {
  for (std::size_t k = 0; k < kRatioPairs.size(); ++k)
    if (kRatioPairs[k].first == num && kRatioPairs[k].second == src) return k;
  return 0;
}

Requirements requirements(std::span<const ScoreKind> kinds) {
  Requirements r;
  auto need_m = [&](Cell c) { r.outcome[index(c)] = true; };
  auto need_src = [&](Cell a, Cell b) {
    r.propensity = true;
    r.source[index(a)] = true;
    r.source[index(b)] = true;
  };
  for (ScoreKind k : kinds) {
    switch (k) {
      case ScoreKind::OR_A: need_m(Cell::AInf); break;
      case ScoreKind::OR_B: need_m(Cell::BInf); break;
      case ScoreKind::IPW_A: need_src(Cell::A2, Cell::AInf); break;
      case ScoreKind::IPW_B: need_src(Cell::B2, Cell::BInf); break;
      case ScoreKind::DR_A:
        need_src(Cell::A2, Cell::AInf);
        need_m(Cell::A2);
        need_m(Cell::AInf);
        break;
      case ScoreKind::DR_B:
        need_src(Cell::B2, Cell::BInf);
        need_m(Cell::B2);
        need_m(Cell::BInf);
        break;
      case ScoreKind::WOR:
        need_m(Cell::B2);
        need_m(Cell::BInf);
        break;
      case ScoreKind::WIPW: need_src(Cell::B2, Cell::BInf); break;
      case ScoreKind::WDR:
        need_src(Cell::B2, Cell::BInf);
        need_m(Cell::B2);
        need_m(Cell::BInf);
        break;
    }
  }
  return r;
}

struct UnitParts {
  Cell cell = Cell::A2;
  double dy = 0.0;
  std::array<double, 4> p{};
  std::array<double, 4> m{};
};

struct Evaluator {
  const CellTable& cells;
  std::array<double, 6> ratio_scale{1, 1, 1, 1, 1, 1};

  double wt(const UnitParts& u, Cell target) const {
    return u.cell == target ? 1.0 / cells.share(target) : 0.0;
  }

  double wc_raw(const UnitParts& u, Cell num, Cell src) const {
    if (u.cell != src) return 0.0;
    return (1.0 / cells.share(num)) * (u.p[index(num)] / u.p[index(src)]);
  }

  double wc(const UnitParts& u, Cell num, Cell src) const {
    return wc_raw(u, num, src) / ratio_scale[pair_slot(num, src)];
  }

  double m(const UnitParts& u, Cell c) const { return u.m[index(c)]; }

  double or_score(const UnitParts& u, Cell g2, Cell ginf) const {
    return wt(u, g2) * u.dy - wt(u, g2) * m(u, ginf);
  }

  double ipw(const UnitParts& u, Cell num, Cell s2, Cell sinf) const {
    return (wc(u, num, s2) - wc(u, num, sinf)) * u.dy;
  }

  double dr(const UnitParts& u, Cell num, Cell s2, Cell sinf) const {
    return ipw(u, num, s2, sinf) + (wt(u, num) - wc(u, num, s2)) * m(u, s2) -
           (wt(u, num) - wc(u, num, sinf)) * m(u, sinf);
  }

  double operator()(ScoreKind kind, const UnitParts& u) const {
    switch (kind) {
      case ScoreKind::OR_A: return or_score(u, Cell::A2, Cell::AInf);
      case ScoreKind::OR_B: return or_score(u, Cell::B2, Cell::BInf);
      case ScoreKind::IPW_A: return ipw(u, Cell::A2, Cell::A2, Cell::AInf);
      case ScoreKind::IPW_B: return ipw(u, Cell::B2, Cell::B2, Cell::BInf);
      case ScoreKind::DR_A: return dr(u, Cell::A2, Cell::A2, Cell::AInf);
      case ScoreKind::DR_B: return dr(u, Cell::B2, Cell::B2, Cell::BInf);
      case ScoreKind::WOR:
        return wt(u, Cell::A2) * m(u, Cell::B2) - wt(u, Cell::A2) * m(u, Cell::BInf);
      case ScoreKind::WIPW: return ipw(u, Cell::A2, Cell::B2, Cell::BInf);
      case ScoreKind::WDR: return dr(u, Cell::A2, Cell::B2, Cell::BInf);
    }
    return 0.0;
  }
};

void check_models(const Requirements& req, const NuisanceSet& theta) {
  if (req.propensity) (void)theta.propensity_model();
  for (Cell c : kCells)
    if (req.outcome[index(c)]) (void)theta.outcome_model(c);
}

void require_nonempty(const Requirements& req, const CellTable& cells) {
  auto check = [&](Cell c) {
    if (cells.count(c) == 0)
      throw Error(ErrorKind::Estimation,
                  "weight denominator is zero: empty cell " + std::string(cell_name(c)));
  };
  check(Cell::A2);
  check(Cell::B2);
  for (Cell c : kCells)
    if (req.source[index(c)]) check(c);
}

UnitParts unit_parts(const PanelUnit& unit, const Requirements& req, const NuisanceSet& theta) {
  UnitParts parts;
  parts.cell = unit.cell();
  parts.dy = delta_y(unit);
  if (req.propensity) parts.p = predict_propensity(*theta.propensity, unit.covariates).p;
  for (Cell c : kCells)
    if (req.outcome[index(c)]) parts.m[index(c)] = theta.outcome(c, unit.covariates);
  return parts;
}

std::vector<ScoreVector> compute(std::span<const ScoreKind> kinds, const PanelDataset& dataset,
                                 const CellTable& cells, const NuisanceSet& theta,
                                 const ScoreOptions& options, bool parallel) {
  const Requirements req = requirements(kinds);
  check_models(req, theta);
  require_nonempty(req, cells);

  const auto n = static_cast<std::ptrdiff_t>(dataset.size());
  std::vector<UnitParts> parts(dataset.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    parts[static_cast<std::size_t>(i)] = unit_parts(dataset.unit(static_cast<std::size_t>(i)), req, theta);
  }

  Evaluator eval{cells};
  if (req.propensity) {
    const double eps = theta.propensity->trim_epsilon;
    std::vector<std::string> offending;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const UnitParts& u = parts[i];
      if (req.source[index(u.cell)] && !(u.p[index(u.cell)] >= eps && u.p[index(u.cell)] > 0.0))
        offending.push_back(dataset.unit(i).id);
    }
    if (!offending.empty()) {
      std::ostringstream msg;
      msg << offending.size() << " unit(s) have a propensity for their own cell below the trimming "
          << "threshold " << eps << ":";
      for (std::size_t k = 0; k < offending.size() && k < 10; ++k) msg << ' ' << offending[k];
      if (offending.size() > 10) msg << " ...";
      throw TrimmingError(msg.str(), std::move(offending));
    }
    if (options.normalize_weights) {
      for (std::size_t k = 0; k < kRatioPairs.size(); ++k) {
        const auto [num, src] = kRatioPairs[k];
        if (!req.source[index(src)]) continue;
        double sum = 0.0;
        for (const UnitParts& u : parts) sum += eval.wc_raw(u, num, src);
        const double mean = sum / static_cast<double>(parts.size());
        if (mean > 0.0) eval.ratio_scale[k] = mean;
      }
    }
  }

  std::vector<ScoreVector> out;
  out.reserve(kinds.size());
  for (ScoreKind kind : kinds) out.push_back({kind, std::vector<double>(parts.size())});
  const auto nk = static_cast<std::ptrdiff_t>(kinds.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t k = 0; k < nk; ++k) {
      out[static_cast<std::size_t>(k)].values[static_cast<std::size_t>(i)] =
          eval(kinds[static_cast<std::size_t>(k)], parts[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

}  // namespace

double weight_t(const PanelUnit& unit, Cell target, const CellTable& cells) {
  if (cells.count(target) == 0) {
    throw Error(ErrorKind::Estimation,
                "weight denominator is zero: empty cell " + std::string(cell_name(target)));
  }
  return unit.cell() == target ? 1.0 / cells.share(target) : 0.0;
}

double weight_c(const PanelUnit& unit, Cell numerator, Cell source, const CellTable& cells,
                const PropensityModel& ps) {
  if (cells.count(numerator) == 0) {
    throw Error(ErrorKind::Estimation,
                "weight denominator is zero: empty cell " + std::string(cell_name(numerator)));
  }
  if (unit.cell() != source) return 0.0;
  const PropensityPrediction pred = predict_propensity(ps, unit.covariates);
  const double p_src = pred[source];
  if (!(p_src >= ps.trim_epsilon && p_src > 0.0)) {
    std::ostringstream msg;
    msg << "unit " << unit.id << ": p" << cell_label(source) << " = " << p_src
        << " is below the trimming threshold " << ps.trim_epsilon;
    throw TrimmingError(msg.str(), {unit.id});
  }
  return (1.0 / cells.share(numerator)) * (pred[numerator] / p_src);
}

double score(ScoreKind kind, const PanelUnit& unit, const CellTable& cells, const NuisanceSet& theta) {
  const std::array<ScoreKind, 1> one{kind};
  const Requirements req = requirements(one);
  check_models(req, theta);
  require_nonempty(req, cells);
  const UnitParts parts = unit_parts(unit, req, theta);
  if (req.propensity && req.source[index(parts.cell)]) {
    const double p_src = parts.p[index(parts.cell)];
    const double eps = theta.propensity->trim_epsilon;
    if (!(p_src >= eps && p_src > 0.0)) {
      std::ostringstream msg;
      msg << "unit " << unit.id << ": p" << cell_label(parts.cell) << " = " << p_src
          << " is below the trimming threshold " << eps;
      throw TrimmingError(msg.str(), {unit.id});
    }
  }
  return Evaluator{cells}(kind, parts);
}

std::vector<ScoreVector> score_vectors(std::span<const ScoreKind> kinds, const PanelDataset& dataset,
                                       const CellTable& cells, const NuisanceSet& theta,
                                       const ScoreOptions& options) {
  return compute(kinds, dataset, cells, theta, options, true);
}

std::vector<ScoreVector> score_vectors_serial(std::span<const ScoreKind> kinds,
                                              const PanelDataset& dataset, const CellTable& cells,
                                              const NuisanceSet& theta, const ScoreOptions& options) {
  return compute(kinds, dataset, cells, theta, options, false);
}

ScoreVector score_vector(ScoreKind kind, const PanelDataset& dataset, const CellTable& cells,
                         const NuisanceSet& theta, const ScoreOptions& options) {
  const std::array<ScoreKind, 1> one{kind};
  return std::move(score_vectors(one, dataset, cells, theta, options).front());
}

double score_mean(ScoreKind kind, const PanelDataset& dataset, const CellTable& cells,
                  const NuisanceSet& theta, const ScoreOptions& options) {
  return score_vector(kind, dataset, cells, theta, options).mean();
}

namespace {

MeanWithSe influence_mean(const std::vector<double>& values, Cell target,
                          const PanelDataset& dataset, const CellTable& cells) {
  MeanWithSe out;
  const auto n = static_cast<double>(values.size());
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  const double inv_share = 1.0 / cells.share(target);
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double wt = dataset.unit(i).cell() == target ? inv_share : 0.0;
    const double eta = values[i] - wt * out.mean;
    ss += eta * eta;
  }
  out.se = std::sqrt(ss / n / n);
  return out;
}

}  // namespace

MeanWithSe mean_with_se(const ScoreVector& scores, const PanelDataset& dataset,
                        const CellTable& cells) {
  return influence_mean(scores.values, target_cell(scores.kind), dataset, cells);
}

MeanWithSe difference_with_se(const ScoreVector& lhs, const ScoreVector& rhs,
                              const PanelDataset& dataset, const CellTable& cells) {
  if (target_cell(lhs.kind) != target_cell(rhs.kind))
    throw Error(ErrorKind::Configuration, "paired score difference needs a common target cell");
  std::vector<double> diff(lhs.values.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = lhs.values[i] - rhs.values[i];
  return influence_mean(diff, target_cell(lhs.kind), dataset, cells);
}

void write_scores_csv(const PanelDataset& dataset, std::span<const ScoreVector> scores,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << "unit_id";
  for (const ScoreVector& s : scores) out << ',' << score_name(s.kind);
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    out << dataset.unit(i).id;
    for (const ScoreVector& s : scores) out << ',' << s.values[i];
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace tdid
