#include <doctest.h>

#include <fstream>
#include <numeric>
#include <sstream>

#include "test_support.hpp"
#include "tdid/error.hpp"
#include "tdid/panel.hpp"

using namespace tdid;
using tdid::test::make_unit;

namespace {

IngestResult parse(const std::string& text, const Schema& schema,
                   MissingPolicy policy = MissingPolicy::DropRow) {
  std::istringstream in(text);
  return parse_csv(in, schema, policy);
}

Schema with_x() {
  Schema s;
  s.id_column = "id";
  s.covariates = {"x"};
  return s;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("delta_y") {
  CHECK(delta_y(make_unit("u", 2, 5, Group::A, Eligibility::Eligible)) == 3.0);
  CHECK(delta_y(make_unit("u", 0, 0, Group::A, Eligibility::Eligible)) == 0.0);
  CHECK(delta_y(make_unit("u", -1.5, -1.5, Group::A, Eligibility::Eligible)) == 0.0);
}

TEST_CASE("mechanism determines who is treated in period 2") {
  const auto a2 = make_unit("1", 0, 0, Group::A, Eligibility::Eligible);
  const auto b2 = make_unit("2", 0, 0, Group::B, Eligibility::Eligible);
  const auto ainf = make_unit("3", 0, 0, Group::A, Eligibility::Never);
  CHECK(treated_in_period2(a2, Mechanism::OnlyGroupA));
  CHECK_FALSE(treated_in_period2(b2, Mechanism::OnlyGroupA));
  CHECK(treated_in_period2(b2, Mechanism::BothGroups));
  CHECK_FALSE(treated_in_period2(ainf, Mechanism::BothGroups));
  CHECK(parse_mechanism("only-a") == Mechanism::OnlyGroupA);
  CHECK(parse_mechanism("both") == Mechanism::BothGroups);
}

TEST_CASE("dataset constructor enforces covariate length and finite values") {
  std::vector<PanelUnit> units{make_unit("1", 0, 1, Group::A, Eligibility::Eligible, {1.0, 2.0})};
  CHECK_THROWS_AS(PanelDataset(units, {"x"}, Mechanism::BothGroups), Error);
  units[0].covariates = {1.0};
  units[0].y2 = std::nan("");
  CHECK_THROWS_AS(PanelDataset(units, {"x"}, Mechanism::BothGroups), Error);
}

TEST_CASE("cell table on the minimal design") {
  const PanelDataset d = test::minimal_design();
  const CellTable t = cell_table(d);
  CHECK(t.n == 4);
  for (Cell c : kCells) {
    CHECK(t.count(c) == 1);
    CHECK(t.share(c) == 0.25);
  }
}

TEST_CASE("cell shares sum to one and counts to n") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PanelDataset d = test::simulated(41 + 97 * seed, seed);
    const CellTable t = cell_table(d);
    CHECK(std::accumulate(t.counts.begin(), t.counts.end(), std::size_t{0}) == d.size());
    CHECK(std::abs(std::accumulate(t.shares.begin(), t.shares.end(), 0.0) - 1.0) < 1e-12);
    for (Cell c : kCells)
      CHECK(t.share(c) == static_cast<double>(t.count(c)) / static_cast<double>(t.n));
  }
}

TEST_CASE("validate: simulated sample passes with balanced cells") {
  const PanelDataset d = test::simulated(2000, 2024);
  const ValidationReport r = validate(d);
  CHECK(r.passed);
  CHECK(r.failures.empty());
  const double sigma = std::sqrt(2000 * 0.25 * 0.75);
  for (Cell c : kCells) CHECK(std::abs(double(cell_table(d).count(c)) - 500.0) < 4 * sigma);
  REQUIRE(r.cells.size() == 4);
  CHECK(r.cells[0].covariate_means.size() == 1);
}

TEST_CASE("validate: no covariates passes with a warning") {
  const ValidationReport r = validate(test::minimal_design());
  CHECK(r.passed);
  REQUIRE(!r.warnings.empty());
  CHECK(r.warnings.front() == "no covariates: conditional and unconditional TDID coincide");
}

TEST_CASE("validate: an empty cell fails and is named") {
  std::vector<PanelUnit> units;
  for (int i = 0; i < 3; ++i) {
    units.push_back(make_unit(std::to_string(i), 0, 1, Group::A, Eligibility::Eligible));
    units.push_back(make_unit("n" + std::to_string(i), 0, 1, Group::A, Eligibility::Never));
    units.push_back(make_unit("b" + std::to_string(i), 0, 1, Group::B, Eligibility::Never));
  }
  const ValidationReport r = validate(PanelDataset(units, {}, Mechanism::BothGroups));
  CHECK_FALSE(r.passed);
  REQUIRE(!r.failures.empty());
  CHECK(r.failures.front() == "empty cell (B, Eligible)");
}

TEST_CASE("load: minimal four-row file") {
  const IngestResult r = parse(
      "id,y1,y2,group,eligibility\n"
      "1,1,2,A,eligible\n2,1,3,A,never\n3,2,2,B,eligible\n4,0,1,B,never\n",
      [] {
        Schema s;
        s.id_column = "id";
        return s;
      }());
  CHECK(r.dataset.size() == 4);
  for (Cell c : kCells) CHECK(cell_table(r.dataset).count(c) == 1);
  CHECK(r.rows_dropped == 0);
}

TEST_CASE("load: dropping every group-B row empties a cell") {
  std::string text = "id,y1,y2,group,eligibility,x\n";
  for (int i = 0; i < 12; ++i) {
    const bool b = i % 2 == 1;
    text += std::to_string(i) + ",1,2," + (b ? "B" : "A") + "," + (i % 4 < 2 ? "eligible" : "never") +
            "," + (b ? "NA" : "0.5") + "\n";
  }
  try {
    parse(text, with_x());
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()) == "empty cell (B, Eligible)");
  }
}

TEST_CASE("load: schema and parse errors") {
  const std::string header = "id,y1,y2,group,eligibility,x\n";
  CHECK(kind_of([&] { parse(header + "1,1,2,A,eligible,0\n", [] {
          Schema s = with_x();
          s.covariates = {"z"};
          return s;
        }()); }) == ErrorKind::Schema);
  CHECK(kind_of([&] { parse("", with_x()); }) == ErrorKind::Schema);
  try {
    parse(header + "1,1,2,A,eligible,0\n2,1,abc,A,never,0\n", with_x());
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(kind_of([&] { parse(header + "1,1,2,A,eligible,0\n2,1,2,C,never,0\n3,1,2,D,never,0\n", with_x()); }) ==
        ErrorKind::Parse);
  CHECK(kind_of([&] { parse(header + "1,1,2,A,eligible,NA\n", with_x(), MissingPolicy::Error); }) ==
        ErrorKind::Parse);
}

TEST_CASE("load: DropRow keeps the order of retained rows and reports the count") {
  std::string text = "id,y1,y2,group,eligibility,x\n";
  std::vector<std::string> kept;
  for (int i = 0; i < 40; ++i) {
    const bool missing = i % 7 == 3;
    const std::string id = "u" + std::to_string(i);
    text += id + ",1," + std::to_string(i) + "," + (i % 2 ? "B" : "A") + "," +
            (i % 4 < 2 ? "eligible" : "never") + "," + (missing ? "" : "0.25") + "\n";
    if (!missing) kept.push_back(id);
  }
  const IngestResult r = parse(text, with_x());
  CHECK(r.rows_dropped == 40 - kept.size());
  REQUIRE(r.dataset.size() == kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(r.dataset.unit(i).id == kept[i]);
}

TEST_CASE("load: round trip through CSV is bit exact") {
  const PanelDataset d = test::simulated(200, 99);
  std::ostringstream out;
  write_csv(d, out);
  std::istringstream in(out.str());
  const IngestResult r = parse_csv(in, native_schema(d));
  REQUIRE(r.dataset.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const PanelUnit& a = d.unit(i);
    const PanelUnit& b = r.dataset.unit(i);
    CHECK(a.id == b.id);
    CHECK(a.y1 == b.y1);
    CHECK(a.y2 == b.y2);
    CHECK(a.cell() == b.cell());
    CHECK(a.covariates == b.covariates);
  }
  CHECK(r.dataset.mechanism() == d.mechanism());
}

TEST_CASE("load: long layout pivots to the same dataset") {
  Schema s;
  s.id_column = "id";
  s.layout = InputLayout::Long;
  s.covariates = {"x"};
  const std::string text =
      "id,period,y,group,eligibility,x\n"
      "1,1,1.0,A,eligible,0.1\n1,2,2.0,A,eligible,0.1\n"
      "2,2,5.0,A,never,0.2\n2,1,3.0,A,never,0.2\n"
      "3,1,1.5,B,eligible,0.3\n3,2,1.0,B,eligible,0.3\n"
      "4,1,0.0,B,never,0.4\n4,2,0.5,B,never,0.4\n"
      "5,1,0.0,A,eligible,0.5\n5,2,0.5,A,eligible,0.5\n"
      "6,1,0.0,A,never,0.6\n6,2,0.5,A,never,0.6\n"
      "7,1,0.0,B,eligible,0.7\n7,2,0.5,B,eligible,0.7\n"
      "8,1,0.0,B,never,0.8\n8,2,0.5,B,never,0.8\n";
  const IngestResult r = parse(text, s);
  REQUIRE(r.dataset.size() == 8);
  CHECK(r.dataset.unit(1).id == "2");
  CHECK(r.dataset.unit(1).y1 == 3.0);
  CHECK(r.dataset.unit(1).y2 == 5.0);
  CHECK(r.dataset.unit(2).covariates[0] == 0.3);
}

TEST_CASE("load: median split sends ties to group A") {
  Schema s = with_x();
  s.group_split = GroupSplit{"wage", std::nullopt};
  // wages 4.25 4.25 4.50 4.50 4.50 4.75 4.75 5.00: median 4.5, five rows <= median.
  const std::string text =
      "id,y1,y2,wage,eligibility,x\n"
      "1,0,1,4.25,eligible,0.1\n2,0,1,4.25,never,0.2\n3,0,1,4.50,eligible,0.3\n"
      "4,0,1,4.50,never,0.4\n5,0,1,4.50,eligible,0.5\n6,0,1,4.75,never,0.6\n"
      "7,0,1,4.75,eligible,0.7\n8,0,1,5.00,never,0.8\n"
      "9,0,1,5.50,eligible,0.9\n10,0,1,4.00,never,1.0\n";
  const IngestResult r = parse(text, s);
  std::size_t in_a = 0;
  for (const PanelUnit& u : r.dataset.units()) in_a += u.group == Group::A;
  CHECK(in_a == 6);  // 4.00, 4.25 x2, 4.50 x3; median of 10 values is 4.5
  CHECK(r.dataset.unit(5).group == Group::B);
  CHECK(r.dataset.unit(4).group == Group::A);
}
