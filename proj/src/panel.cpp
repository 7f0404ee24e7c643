#include "tdid/panel.hpp"

#include <cmath>
#include <sstream>

#include "tdid/error.hpp"

namespace tdid {

std::string_view cell_name(Cell c) noexcept {
  switch (c) {
    case Cell::A2: return "(A, Eligible)";
    case Cell::AInf: return "(A, Never)";
    case Cell::B2: return "(B, Eligible)";
    case Cell::BInf: return "(B, Never)";
  }
  return "?";
}

std::string_view cell_label(Cell c) noexcept {
  switch (c) {
    case Cell::A2: return "(a,2)";
    case Cell::AInf: return "(a,inf)";
    case Cell::B2: return "(b,2)";
    case Cell::BInf: return "(b,inf)";
  }
  return "?";
}

std::string_view mechanism_name(Mechanism m) noexcept {
  return m == Mechanism::OnlyGroupA ? "only-a" : "both";
}

Mechanism parse_mechanism(std::string_view text) {
  if (text == "only-a" || text == "OnlyGroupA" || text == "i") return Mechanism::OnlyGroupA;
  if (text == "both" || text == "BothGroups" || text == "ii") return Mechanism::BothGroups;
  throw Error(ErrorKind::Configuration,
              "unknown mechanism '" + std::string(text) + "' (expected only-a or both)");
}

bool treated_in_period2(const PanelUnit& unit, Mechanism mechanism) noexcept {
  if (unit.eligibility != Eligibility::Eligible) return false;
  return mechanism == Mechanism::BothGroups || unit.group == Group::A;
}

PanelDataset::PanelDataset(std::vector<PanelUnit> units, std::vector<std::string> covariate_names,
                           Mechanism mechanism)
    : units_(std::move(units)), covariate_names_(std::move(covariate_names)), mechanism_(mechanism) {
  const std::size_t d = covariate_names_.size();
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const PanelUnit& u = units_[i];
    if (u.covariates.size() != d) {
      std::ostringstream msg;
      msg << "unit " << u.id << " has " << u.covariates.size() << " covariates, expected " << d;
      throw Error(ErrorKind::Validation, msg.str());
    }
    bool finite = std::isfinite(u.y1) && std::isfinite(u.y2);
    for (double x : u.covariates) finite = finite && std::isfinite(x);
    if (!finite) throw Error(ErrorKind::Validation, "unit " + u.id + " has a non-finite value");
  }
}

PanelDataset PanelDataset::with_units(std::vector<PanelUnit> units) const {
  return PanelDataset(std::move(units), covariate_names_, mechanism_);
}

Eigen::MatrixXd PanelDataset::covariate_matrix() const {
  const auto n = static_cast<Eigen::Index>(units_.size());
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = units_[i].covariates[j];
  return x;
}

CellTable cell_table(const PanelDataset& dataset) {
  CellTable table;
  table.n = dataset.size();
  for (const PanelUnit& u : dataset.units()) ++table.counts[index(u.cell())];
  if (table.n > 0) {
    const double n = static_cast<double>(table.n);
    for (std::size_t k = 0; k < 4; ++k) table.shares[k] = static_cast<double>(table.counts[k]) / n;
  }
  return table;
}

ValidationReport validate(const PanelDataset& dataset) {
  ValidationReport report;
  const CellTable table = cell_table(dataset);
  const std::size_t d = dataset.dim();
  report.n = table.n;
  report.counts = table.counts;

  for (Cell c : kCells) {
    CellSummary s;
    s.cell = c;
    s.count = table.count(c);
    s.covariate_means.assign(d, 0.0);
    s.covariate_sds.assign(d, 0.0);
    report.cells.push_back(std::move(s));
  }
  for (const PanelUnit& u : dataset.units()) {
    CellSummary& s = report.cells[index(u.cell())];
    s.mean_delta_y += delta_y(u);
    for (std::size_t j = 0; j < d; ++j) s.covariate_means[j] += u.covariates[j];
  }
  for (CellSummary& s : report.cells) {
    if (s.count == 0) continue;
    s.mean_delta_y /= static_cast<double>(s.count);
    for (double& m : s.covariate_means) m /= static_cast<double>(s.count);
  }
  for (const PanelUnit& u : dataset.units()) {
    CellSummary& s = report.cells[index(u.cell())];
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = u.covariates[j] - s.covariate_means[j];
      s.covariate_sds[j] += dev * dev;
    }
  }
  for (CellSummary& s : report.cells) {
    if (s.count < 2) continue;
    for (double& v : s.covariate_sds) v = std::sqrt(v / static_cast<double>(s.count - 1));
  }

  for (Cell c : kCells) {
    if (table.count(c) == 0) report.failures.push_back("empty cell " + std::string(cell_name(c)));
  }
  if (table.n < 4 * (d + 1)) {
    std::ostringstream msg;
    msg << "n = " << table.n << " is below 4(d+1) = " << 4 * (d + 1);
    report.failures.push_back(msg.str());
  }
  if (d == 0) {
    report.warnings.emplace_back("no covariates: conditional and unconditional TDID coincide");
  }
  for (Cell c : kCells) {
    if (table.count(c) > 0 && table.count(c) < d + 1) {
      std::ostringstream msg;
      msg << "cell " << cell_name(c) << " has " << table.count(c)
          << " units, fewer than the d+1 = " << d + 1 << " parameters of a per-cell regression";
      report.warnings.push_back(msg.str());
    }
  }
  report.passed = report.failures.empty();
  return report;
}

}  // namespace tdid
