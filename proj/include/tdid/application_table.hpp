#pragma once

// Minimum-wage application table: OLS and outcome-regression DID/TDID by wage
// group, with and without controls, compared against fixed reference values.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tdid/bootstrap.hpp"
#include "tdid/regression.hpp"

namespace tdid {

enum class TableRow { OlsNoControls, OlsControls, OrNoControls, OrControls };
enum class TableColumn { DidA, DidB, WDidB, AMinusB, AMinusWB };

inline constexpr std::array<TableRow, 4> kTableRows{TableRow::OlsNoControls, TableRow::OlsControls,
                                                    TableRow::OrNoControls, TableRow::OrControls};
inline constexpr std::array<TableColumn, 5> kTableColumns{
    TableColumn::DidA, TableColumn::DidB, TableColumn::WDidB, TableColumn::AMinusB,
    TableColumn::AMinusWB};

std::string_view row_name(TableRow row) noexcept;        // "OLS no Controls"
std::string_view column_name(TableColumn col) noexcept;  // "DID A"

struct ReferenceValue {
  double estimate = 0.0;
  double se = 0.0;
};

// Reference value for a cell, if one exists.
std::optional<ReferenceValue> reference_value(TableRow row, TableColumn col);

inline constexpr double kPointTolerance = 0.01;
inline constexpr double kSeRelativeTolerance = 0.15;

struct TableCell {
  TableRow row = TableRow::OlsNoControls;
  TableColumn column = TableColumn::DidA;
  bool computed = false;  // OLS rows have no reweighted columns
  double estimate = 0.0;
  double se = 0.0;
  SeKind se_kind = SeKind::None;
  std::optional<ReferenceValue> reference;
  bool point_pass = false;
  bool se_pass = false;
};

struct ApplicationOptions {
  RegressionOptions regression;
  BootstrapConfig bootstrap;
};

struct ApplicationTable {
  std::size_t n = 0;
  std::vector<TableCell> cells;  // row-major over kTableRows x kTableColumns

  const TableCell& at(TableRow row, TableColumn col) const;
  std::size_t comparisons() const;
  std::size_t point_passes() const;
  std::size_t se_passes() const;
};

ApplicationTable application_table(const PanelDataset& dataset, const ApplicationOptions& options = {});

void write_application_csv(const ApplicationTable& table, const std::filesystem::path& path);
std::string format_application_text(const ApplicationTable& table);

}  // namespace tdid
