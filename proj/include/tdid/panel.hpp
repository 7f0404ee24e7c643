#pragma once

// Two-period, two-group, two-eligibility panel data model.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tdid {

enum class Group : std::uint8_t { A, B };

// Period in which a unit becomes eligible: 2, or never (infinity).
enum class Eligibility : std::uint8_t { Eligible, Never };

// Who is treated in period 2. Nobody is treated in period 1.
enum class Mechanism : std::uint8_t {
  OnlyGroupA,  // W2 = 1{E = 2, G = a}
  BothGroups,  // W2 = 1{E = 2}
};

enum class Cell : std::uint8_t { A2 = 0, AInf = 1, B2 = 2, BInf = 3 };

inline constexpr std::array<Cell, 4> kCells{Cell::A2, Cell::AInf, Cell::B2, Cell::BInf};

constexpr std::size_t index(Cell c) noexcept { return static_cast<std::size_t>(c); }

constexpr Cell cell_of(Group g, Eligibility e) noexcept {
  if (g == Group::A) return e == Eligibility::Eligible ? Cell::A2 : Cell::AInf;
  return e == Eligibility::Eligible ? Cell::B2 : Cell::BInf;
}

constexpr Group group_of(Cell c) noexcept {
  return (c == Cell::A2 || c == Cell::AInf) ? Group::A : Group::B;
}

constexpr Eligibility eligibility_of(Cell c) noexcept {
  return (c == Cell::A2 || c == Cell::B2) ? Eligibility::Eligible : Eligibility::Never;
}

// "(A, Eligible)" style, used in messages.
std::string_view cell_name(Cell c) noexcept;
// "(a,2)" style, used in JSON keys and model labels.
std::string_view cell_label(Cell c) noexcept;
std::string_view mechanism_name(Mechanism m) noexcept;
Mechanism parse_mechanism(std::string_view text);

struct PanelUnit {
  std::string id;
  double y1 = 0.0;
  double y2 = 0.0;
  Group group = Group::A;
  Eligibility eligibility = Eligibility::Eligible;
  std::vector<double> covariates;

  Cell cell() const noexcept { return cell_of(group, eligibility); }
};

inline double delta_y(const PanelUnit& unit) noexcept { return unit.y2 - unit.y1; }

// Derived period-2 treatment status.
bool treated_in_period2(const PanelUnit& unit, Mechanism mechanism) noexcept;

// Immutable collection of units. The constructor enforces per-unit invariants
// (covariate length, finite values); design-level checks live in validate().
class PanelDataset {
 public:
  PanelDataset(std::vector<PanelUnit> units, std::vector<std::string> covariate_names,
               Mechanism mechanism);

  std::span<const PanelUnit> units() const noexcept { return units_; }
  const PanelUnit& unit(std::size_t i) const { return units_[i]; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }
  Mechanism mechanism() const noexcept { return mechanism_; }
  std::size_t size() const noexcept { return units_.size(); }
  std::size_t dim() const noexcept { return covariate_names_.size(); }

  // Same covariate metadata and mechanism, different units.
  PanelDataset with_units(std::vector<PanelUnit> units) const;

  // n x d matrix of raw covariates, row order = unit order.
  Eigen::MatrixXd covariate_matrix() const;

 private:
  std::vector<PanelUnit> units_;
  std::vector<std::string> covariate_names_;
  Mechanism mechanism_;
};

struct CellTable {
  std::size_t n = 0;
  std::array<std::size_t, 4> counts{};
  std::array<double, 4> shares{};

  std::size_t count(Cell c) const noexcept { return counts[index(c)]; }
  double share(Cell c) const noexcept { return shares[index(c)]; }
};

CellTable cell_table(const PanelDataset& dataset);

struct CellSummary {
  Cell cell = Cell::A2;
  std::size_t count = 0;
  double mean_delta_y = 0.0;
  std::vector<double> covariate_means;
  std::vector<double> covariate_sds;
};

struct ValidationReport {
  bool passed = true;
  std::size_t n = 0;
  std::array<std::size_t, 4> counts{};
  std::vector<CellSummary> cells;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
};

ValidationReport validate(const PanelDataset& dataset);

// ---------------------------------------------------------------------------
// Ingestion

enum class MissingPolicy : std::uint8_t { DropRow, Error };
enum class InputLayout : std::uint8_t { Wide, Long };

// Group A assigned to rows whose `column` value is <= threshold; with no
// threshold the median of the retained rows is used (ties go to group A).
struct GroupSplit {
  std::string column;
  std::optional<double> threshold;
};

struct Schema {
  std::string id_column;  // empty: 1-based row number
  std::string y1_column = "y1";
  std::string y2_column = "y2";
  std::string group_column = "group";
  std::string group_a_level = "A";
  std::optional<GroupSplit> group_split;  // replaces group_column when set
  std::string eligibility_column = "eligibility";
  std::string eligible_level = "eligible";
  std::vector<std::string> covariates;
  std::string treatment_column;  // optional observed W2, checked against the mechanism
  char delimiter = ',';
  Mechanism mechanism = Mechanism::BothGroups;

  InputLayout layout = InputLayout::Wide;
  // Long layout: one row per (unit, period). id_column is required.
  std::string period_column = "period";
  std::string outcome_column = "y";
  std::string pre_level = "1";
  std::string post_level = "2";
};

struct IngestResult {
  PanelDataset dataset;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::string> warnings;
};

IngestResult load_csv(const std::filesystem::path& path, const Schema& schema,
                      MissingPolicy policy = MissingPolicy::DropRow);
IngestResult parse_csv(std::istream& in, const Schema& schema,
                       MissingPolicy policy = MissingPolicy::DropRow);

// Writes the dataset in wide layout at full precision; native_schema() reads it back.
void write_csv(const PanelDataset& dataset, const std::filesystem::path& path);
void write_csv(const PanelDataset& dataset, std::ostream& out);
Schema native_schema(const PanelDataset& dataset);

}  // namespace tdid
