#include "tdid/application_table.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tdid/error.hpp"

namespace tdid {

std::string_view row_name(TableRow row) noexcept {
  switch (row) {
    case TableRow::OlsNoControls: return "OLS no Controls";
    case TableRow::OlsControls: return "OLS w/ Controls";
    case TableRow::OrNoControls: return "OR no Controls";
    case TableRow::OrControls: return "OR w/ Controls";
  }
  return "?";
}

std::string_view column_name(TableColumn col) noexcept {
  switch (col) {
    case TableColumn::DidA: return "DID A";
    case TableColumn::DidB: return "DID B";
    case TableColumn::WDidB: return "W DID B";
    case TableColumn::AMinusB: return "A - B";
    case TableColumn::AMinusWB: return "A - WB";
  }
  return "?";
}

std::optional<ReferenceValue> reference_value(TableRow row, TableColumn col) {
  using R = ReferenceValue;
  switch (row) {
    case TableRow::OlsNoControls:
      if (col == TableColumn::DidA) return R{2.84, 2.38};
      if (col == TableColumn::DidB) return R{1.49, 2.67};
      if (col == TableColumn::AMinusB) return R{1.35, 3.57};
      return std::nullopt;
    case TableRow::OlsControls:
      if (col == TableColumn::DidA) return R{3.08, 2.04};
      if (col == TableColumn::DidB) return R{1.52, 2.27};
      if (col == TableColumn::AMinusB) return R{1.56, 3.05};
      return std::nullopt;
    case TableRow::OrNoControls:
      if (col == TableColumn::DidA) return R{2.72, 2.60};
      if (col == TableColumn::DidB) return R{1.47, 2.76};
      if (col == TableColumn::AMinusB) return R{1.25, 3.66};
      return std::nullopt;
    case TableRow::OrControls:
      switch (col) {
        case TableColumn::DidA: return R{3.76, 3.37};
        case TableColumn::DidB: return R{-1.67, 4.40};
        case TableColumn::WDidB: return R{-0.47, 3.52};
        case TableColumn::AMinusB: return R{5.42, 5.51};
        case TableColumn::AMinusWB: return R{4.23, 4.86};
      }
  }
  return std::nullopt;
}

const TableCell& ApplicationTable::at(TableRow row, TableColumn col) const {
  return cells.at(static_cast<std::size_t>(row) * kTableColumns.size() + static_cast<std::size_t>(col));
}

std::size_t ApplicationTable::comparisons() const {
  std::size_t k = 0;
  for (const TableCell& c : cells) k += c.computed && c.reference ? 1 : 0;
  return k;
}

std::size_t ApplicationTable::point_passes() const {
  std::size_t k = 0;
  for (const TableCell& c : cells) k += c.computed && c.reference && c.point_pass ? 1 : 0;
  return k;
}

std::size_t ApplicationTable::se_passes() const {
  std::size_t k = 0;
  for (const TableCell& c : cells) k += c.computed && c.reference && c.se_pass ? 1 : 0;
  return k;
}

namespace {

std::vector<double> or_columns(const PanelDataset& d, ModelSpec spec) {
  NuisanceOptions opts;
  opts.outcome_spec = spec;
  const NuisanceSet theta = fit_nuisances(d, FitMode::EightModelOR, opts);
  const double a = or_did(d, theta, Group::A).tau_hat;
  const double b = or_did(d, theta, Group::B).tau_hat;
  const double wb = or_wdid_b(d, theta).tau_hat;
  return {a, b, wb, a - b, a - wb};
}

}  // namespace

ApplicationTable application_table(const PanelDataset& dataset, const ApplicationOptions& options) {
  ApplicationTable table;
  table.n = dataset.size();
  for (TableRow row : kTableRows) {
    for (TableColumn col : kTableColumns) {
      TableCell cell;
      cell.row = row;
      cell.column = col;
      cell.reference = reference_value(row, col);
      table.cells.push_back(cell);
    }
  }
  auto cell = [&](TableRow row, TableColumn col) -> TableCell& {
    return table.cells[static_cast<std::size_t>(row) * kTableColumns.size() + static_cast<std::size_t>(col)];
  };
  auto put = [&](TableRow row, TableColumn col, double est, double se, SeKind kind) {
    TableCell& c = cell(row, col);
    c.computed = true;
    c.estimate = est;
    c.se = se;
    c.se_kind = kind;
    if (c.reference) {
      // Compare on the two-decimal rounding used for reporting.
      c.point_pass = std::abs(est - c.reference->estimate) <= kPointTolerance + 1e-12;
      c.se_pass = std::abs(se - c.reference->se) <= kSeRelativeTolerance * c.reference->se;
    }
  };

  for (bool controls : {false, true}) {
    const TableRow row = controls ? TableRow::OlsControls : TableRow::OlsNoControls;
    const EstimateResult a = ols_did(dataset, Group::A, controls, options.regression);
    const EstimateResult b = ols_did(dataset, Group::B, controls, options.regression);
    const EstimateResult t = ols_tdid(dataset, controls, options.regression);
    put(row, TableColumn::DidA, a.tau_hat, a.se, a.se_kind);
    put(row, TableColumn::DidB, b.tau_hat, b.se, b.se_kind);
    put(row, TableColumn::AMinusB, t.tau_hat, t.se, t.se_kind);
  }

  for (bool controls : {false, true}) {
    const TableRow row = controls ? TableRow::OrControls : TableRow::OrNoControls;
    const ModelSpec spec = controls ? ModelSpec::Full : ModelSpec::InterceptOnly;
    const std::vector<double> point = or_columns(dataset, spec);
    const BootstrapResult boot = bootstrap(
        dataset, [spec](const PanelDataset& d) { return or_columns(d, spec); }, options.bootstrap);
    for (std::size_t j = 0; j < kTableColumns.size(); ++j)
      put(row, kTableColumns[j], point[j], boot.se[j], SeKind::Bootstrap);
  }
  return table;
}

void write_application_csv(const ApplicationTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << "row,column,estimate,se,se_kind,reference_estimate,reference_se,point_pass,se_pass,note\n";
  out << std::setprecision(17);
  for (const TableCell& c : table.cells) {
    if (!c.computed) continue;
    out << '"' << row_name(c.row) << "\",\"" << column_name(c.column) << "\"," << c.estimate << ','
        << c.se << ',' << se_kind_name(c.se_kind) << ',';
    if (c.reference) {
      out << c.reference->estimate << ',' << c.reference->se << ',' << (c.point_pass ? "true" : "false")
          << ',' << (c.se_pass ? "true" : "false") << ",\n";
    } else {
      out << ",,,,not reported in reference table\n";
    }
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string format_application_text(const ApplicationTable& table) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(18) << "Method";
  for (TableColumn col : kTableColumns) out << std::right << std::setw(18) << column_name(col);
  out << '\n';
  for (TableRow row : kTableRows) {
    out << std::left << std::setw(18) << row_name(row);
    for (TableColumn col : kTableColumns) {
      const TableCell& c = table.at(row, col);
      std::ostringstream v;
      v << std::fixed << std::setprecision(2);
      if (c.computed) {
        v << c.estimate;
        if (c.reference) v << " [" << c.reference->estimate << (c.point_pass ? " ok" : " x") << ']';
      }
      out << std::right << std::setw(18) << v.str();
    }
    out << '\n' << std::left << std::setw(18) << "";
    for (TableColumn col : kTableColumns) {
      const TableCell& c = table.at(row, col);
      std::ostringstream v;
      v << std::fixed << std::setprecision(2);
      if (c.computed) {
        v << '(' << c.se << ')';
        if (c.reference) v << " [" << c.reference->se << (c.se_pass ? " ok" : " x") << ']';
      }
      out << std::right << std::setw(18) << v.str();
    }
    out << '\n';
  }
  out << "n = " << table.n << "; point estimates within " << kPointTolerance << ": "
      << table.point_passes() << "/" << table.comparisons() << "; standard errors within "
      << std::setprecision(0) << kSeRelativeTolerance * 100 << "%: " << table.se_passes() << "/"
      << table.comparisons() << '\n';
  return out.str();
}

}  // namespace tdid
