#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tdid/error.hpp"
#include "tdid/panel.hpp"

namespace tdid {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// RFC 4180-style field splitting for a single physical line.
std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool is_missing(const std::string& v) {
  return v.empty() || v == "NA" || v == "NaN" || v == "nan" || v == "." || v == "NULL" ||
         v == "null";
}

std::optional<double> to_number(const std::string& v) {
  double out = 0.0;
  const char* first = v.data();
  const char* last = v.data() + v.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) return std::nullopt;
  return out;
}

bool same_level(const std::string& value, const std::string& level) {
  if (value == level) return true;
  const auto a = to_number(value);
  const auto b = to_number(level);
  return a && b && *a == *b;
}

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

class Table {
 public:
  Table(std::istream& in, char delim) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
      if (trim(line).empty()) continue;
      auto fields = split_line(line, delim);
      if (header_.empty()) {
        header_ = std::move(fields);
        for (std::size_t j = 0; j < header_.size(); ++j) index_[header_[j]] = j;
        continue;
      }
      if (fields.size() != header_.size()) {
        std::ostringstream msg;
        msg << "line " << lineno << ": expected " << header_.size() << " fields, found "
            << fields.size();
        throw Error(ErrorKind::Parse, msg.str());
      }
      rows_.push_back({lineno, std::move(fields)});
    }
    if (header_.empty()) throw Error(ErrorKind::Schema, "empty input: no header row");
  }

  std::size_t column(const std::string& name, std::string_view role) const {
    const auto it = index_.find(name);
    if (it == index_.end()) {
      throw Error(ErrorKind::Schema, "column '" + name + "' (" + std::string(role) +
                                         ") is not present in the header");
    }
    return it->second;
  }

  const std::vector<Row>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Row> rows_;
};

double parse_number(const Row& row, std::size_t col, const std::string& name) {
  const auto v = to_number(row.fields[col]);
  if (!v) {
    std::ostringstream msg;
    msg << "line " << row.line << ", column '" << name << "': non-numeric value '"
        << row.fields[col] << "'";
    throw Error(ErrorKind::Parse, msg.str());
  }
  return *v;
}

// Tracks the distinct levels of a categorical column so a third level is an error.
class BinaryColumn {
 public:
  BinaryColumn(std::string name, std::string positive)
      : name_(std::move(name)), positive_(std::move(positive)) {}

  bool positive(const Row& row, std::size_t col) {
    const std::string& v = row.fields[col];
    const bool pos = same_level(v, positive_);
    if (!pos) {
      if (!other_) {
        other_ = v;
      } else if (!same_level(v, *other_)) {
        std::ostringstream msg;
        msg << "line " << row.line << ", column '" << name_ << "': third level '" << v
            << "' (column must be two-level; levels seen: '" << positive_ << "', '" << *other_
            << "')";
        throw Error(ErrorKind::Parse, msg.str());
      }
    }
    return pos;
  }

 private:
  std::string name_;
  std::string positive_;
  std::optional<std::string> other_;
};

struct Draft {
  std::string id;
  std::optional<double> y1, y2;
  bool group_a = false;
  double split_value = 0.0;
  bool eligible = false;
  std::optional<double> treated;
  std::vector<double> covariates;
  std::size_t source_rows = 0;
};

struct ColumnMap {
  std::optional<std::size_t> id;
  std::size_t group = 0;
  std::size_t eligibility = 0;
  std::optional<std::size_t> treatment;
  std::vector<std::size_t> covariates;
  std::vector<std::size_t> required;  // every mapped column, for missingness checks
  std::vector<std::string> required_names;
};

ColumnMap map_common(const Table& table, const Schema& schema) {
  ColumnMap m;
  auto need = [&](const std::string& name, std::string_view role) {
    const std::size_t c = table.column(name, role);
    m.required.push_back(c);
    m.required_names.push_back(name);
    return c;
  };
  if (!schema.id_column.empty()) m.id = table.column(schema.id_column, "id");
  if (schema.group_split) {
    m.group = need(schema.group_split->column, "group split");
  } else {
    m.group = need(schema.group_column, "group");
  }
  m.eligibility = need(schema.eligibility_column, "eligibility");
  for (const std::string& c : schema.covariates) m.covariates.push_back(need(c, "covariate"));
  if (!schema.treatment_column.empty()) m.treatment = need(schema.treatment_column, "treatment");
  return m;
}

bool row_missing(const Row& row, const std::vector<std::size_t>& cols) {
  return std::any_of(cols.begin(), cols.end(),
                     [&](std::size_t c) { return is_missing(row.fields[c]); });
}

[[noreturn]] void missing_error(const Row& row, const ColumnMap& m) {
  for (std::size_t k = 0; k < m.required.size(); ++k) {
    if (is_missing(row.fields[m.required[k]])) {
      std::ostringstream msg;
      msg << "line " << row.line << ", column '" << m.required_names[k] << "': missing value";
      throw Error(ErrorKind::Parse, msg.str());
    }
  }
  throw Error(ErrorKind::Parse, "missing value at line " + std::to_string(row.line));
}

void fill_unit_attributes(Draft& d, const Row& row, const ColumnMap& m, const Schema& schema,
                          BinaryColumn& group_col, BinaryColumn& elig_col) {
  if (schema.group_split) {
    d.split_value = parse_number(row, m.group, schema.group_split->column);
  } else {
    d.group_a = group_col.positive(row, m.group);
  }
  d.eligible = elig_col.positive(row, m.eligibility);
  d.covariates.clear();
  for (std::size_t k = 0; k < m.covariates.size(); ++k)
    d.covariates.push_back(parse_number(row, m.covariates[k], schema.covariates[k]));
  if (m.treatment) d.treated = parse_number(row, *m.treatment, schema.treatment_column);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<Draft> read_wide(const Table& table, const Schema& schema, MissingPolicy policy,
                             std::size_t& dropped) {
  ColumnMap m = map_common(table, schema);
  const std::size_t c1 = table.column(schema.y1_column, "period-1 outcome");
  const std::size_t c2 = table.column(schema.y2_column, "period-2 outcome");
  m.required.insert(m.required.end(), {c1, c2});
  m.required_names.insert(m.required_names.end(), {schema.y1_column, schema.y2_column});

  BinaryColumn group_col(schema.group_column, schema.group_a_level);
  BinaryColumn elig_col(schema.eligibility_column, schema.eligible_level);
  std::vector<Draft> drafts;
  std::size_t rowno = 0;
  for (const Row& row : table.rows()) {
    ++rowno;
    if (row_missing(row, m.required)) {
      if (policy == MissingPolicy::Error) missing_error(row, m);
      ++dropped;
      continue;
    }
    Draft d;
    d.id = m.id ? row.fields[*m.id] : std::to_string(rowno);
    d.y1 = parse_number(row, c1, schema.y1_column);
    d.y2 = parse_number(row, c2, schema.y2_column);
    fill_unit_attributes(d, row, m, schema, group_col, elig_col);
    d.source_rows = 1;
    drafts.push_back(std::move(d));
  }
  return drafts;
}

std::vector<Draft> read_long(const Table& table, const Schema& schema, MissingPolicy policy,
                             std::size_t& dropped) {
  if (schema.id_column.empty())
    throw Error(ErrorKind::Schema, "long layout requires an id column");
  ColumnMap m = map_common(table, schema);
  const std::size_t cp = table.column(schema.period_column, "period");
  const std::size_t cy = table.column(schema.outcome_column, "outcome");
  m.required.insert(m.required.end(), {cp, cy});
  m.required_names.insert(m.required_names.end(), {schema.period_column, schema.outcome_column});

  BinaryColumn group_col(schema.group_column, schema.group_a_level);
  BinaryColumn elig_col(schema.eligibility_column, schema.eligible_level);
  std::vector<Draft> drafts;
  std::unordered_map<std::string, std::size_t> slot;
  for (const Row& row : table.rows()) {
    if (row_missing(row, m.required)) {
      if (policy == MissingPolicy::Error) missing_error(row, m);
      ++dropped;
      continue;
    }
    const std::string& id = row.fields[*m.id];
    Draft incoming;
    incoming.id = id;
    fill_unit_attributes(incoming, row, m, schema, group_col, elig_col);
    const double y = parse_number(row, cy, schema.outcome_column);
    const std::string& period = row.fields[cp];
    const bool pre = same_level(period, schema.pre_level);
    const bool post = same_level(period, schema.post_level);
    if (!pre && !post) {
      std::ostringstream msg;
      msg << "line " << row.line << ", column '" << schema.period_column << "': period '"
          << period << "' is neither '" << schema.pre_level << "' nor '" << schema.post_level
          << "'";
      throw Error(ErrorKind::Parse, msg.str());
    }

    auto [it, inserted] = slot.try_emplace(id, drafts.size());
    if (inserted) drafts.push_back(incoming);
    Draft& d = drafts[it->second];
    const bool consistent = d.group_a == incoming.group_a &&
                            d.split_value == incoming.split_value &&
                            d.eligible == incoming.eligible && d.covariates == incoming.covariates;
    if (!consistent) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(row.line) + ": unit '" + id +
                                        "' has time-varying group, eligibility or covariates");
    }
    std::optional<double>& target = pre ? d.y1 : d.y2;
    if (target) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(row.line) + ": unit '" + id +
                                        "' has a duplicate row for period '" + period + "'");
    }
    target = y;
    ++d.source_rows;
  }

  std::vector<Draft> complete;
  complete.reserve(drafts.size());
  for (Draft& d : drafts) {
    if (d.y1 && d.y2) {
      complete.push_back(std::move(d));
    } else if (policy == MissingPolicy::Error) {
      throw Error(ErrorKind::Parse, "unit '" + d.id + "' is missing one of the two periods");
    } else {
      dropped += d.source_rows;
    }
  }
  return complete;
}

}  // namespace

IngestResult parse_csv(std::istream& in, const Schema& schema, MissingPolicy policy) {
  const Table table(in, schema.delimiter);
  std::size_t dropped = 0;
  std::vector<Draft> drafts = schema.layout == InputLayout::Wide
                                  ? read_wide(table, schema, policy, dropped)
                                  : read_long(table, schema, policy, dropped);

  if (schema.group_split) {
    double cut = 0.0;
    if (schema.group_split->threshold) {
      cut = *schema.group_split->threshold;
    } else {
      std::vector<double> values;
      values.reserve(drafts.size());
      for (const Draft& d : drafts) values.push_back(d.split_value);
      cut = median(std::move(values));
    }
    for (Draft& d : drafts) d.group_a = d.split_value <= cut;
  }

  std::vector<PanelUnit> units;
  units.reserve(drafts.size());
  std::size_t conflicts = 0;
  for (Draft& d : drafts) {
    PanelUnit u;
    u.id = std::move(d.id);
    u.y1 = *d.y1;
    u.y2 = *d.y2;
    u.group = d.group_a ? Group::A : Group::B;
    u.eligibility = d.eligible ? Eligibility::Eligible : Eligibility::Never;
    u.covariates = std::move(d.covariates);
    if (d.treated && ((*d.treated != 0.0) != treated_in_period2(u, schema.mechanism))) ++conflicts;
    units.push_back(std::move(u));
  }

  IngestResult result{PanelDataset(std::move(units), schema.covariates, schema.mechanism),
                      table.rows().size(), dropped, {}};
  if (conflicts > 0) {
    result.warnings.push_back(std::to_string(conflicts) +
                              " units have an observed treatment status that conflicts with the "
                              "declared mechanism '" +
                              std::string(mechanism_name(schema.mechanism)) +
                              "'; no units were excluded");
  }
  const ValidationReport report = validate(result.dataset);
  if (!report.passed) throw Error(ErrorKind::Validation, report.failures.front());
  result.warnings.insert(result.warnings.end(), report.warnings.begin(), report.warnings.end());
  return result;
}

IngestResult load_csv(const std::filesystem::path& path, const Schema& schema,
                      MissingPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open input file '" + path.string() + "'");
  return parse_csv(in, schema, policy);
}

Schema native_schema(const PanelDataset& dataset) {
  Schema s;
  s.id_column = "id";
  s.covariates = dataset.covariate_names();
  s.mechanism = dataset.mechanism();
  return s;
}

void write_csv(const PanelDataset& dataset, std::ostream& out) {
  const Schema s = native_schema(dataset);
  out << s.id_column << ',' << s.y1_column << ',' << s.y2_column << ',' << s.group_column << ','
      << s.eligibility_column;
  for (const std::string& name : s.covariates) out << ',' << name;
  out << '\n';
  out << std::setprecision(17);
  for (const PanelUnit& u : dataset.units()) {
    out << u.id << ',' << u.y1 << ',' << u.y2 << ',' << (u.group == Group::A ? "A" : "B") << ','
        << (u.eligibility == Eligibility::Eligible ? "eligible" : "never");
    for (double x : u.covariates) out << ',' << x;
    out << '\n';
  }
}

void write_csv(const PanelDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  write_csv(dataset, out);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace tdid
