#include "tdid/json_io.hpp"

#include <fstream>
#include <set>

#include "tdid/error.hpp"

namespace tdid {
namespace {

std::string as_string(const Json& doc, const char* key) {
  const Json& v = doc.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return v.dump();
  throw Error(ErrorKind::Schema, std::string("schema key '") + key + "' must be a string");
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

Schema schema_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::Schema, "schema document must be a JSON object");
  static const std::set<std::string> known{
      "id",       "y1",      "y2",       "group",      "group_a_level", "group_split",
      "eligibility", "eligible_level", "covariates", "treatment", "delimiter", "mechanism",
      "layout",   "period",  "outcome",  "pre_level",  "post_level"};
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!known.count(key)) throw Error(ErrorKind::Schema, "unknown schema key '" + key + "'");
  }
  try {
    Schema s;
    if (doc.contains("id")) s.id_column = as_string(doc, "id");
    if (doc.contains("y1")) s.y1_column = as_string(doc, "y1");
    if (doc.contains("y2")) s.y2_column = as_string(doc, "y2");
    if (doc.contains("group")) s.group_column = as_string(doc, "group");
    if (doc.contains("group_a_level")) s.group_a_level = as_string(doc, "group_a_level");
    if (doc.contains("group_split") && !doc.at("group_split").is_null()) {
      const Json& g = doc.at("group_split");
      GroupSplit split;
      split.column = g.at("column").get<std::string>();
      if (g.contains("threshold") && !g.at("threshold").is_null())
        split.threshold = g.at("threshold").get<double>();
      s.group_split = split;
    }
    if (doc.contains("eligibility")) s.eligibility_column = as_string(doc, "eligibility");
    if (doc.contains("eligible_level")) s.eligible_level = as_string(doc, "eligible_level");
    if (doc.contains("covariates")) s.covariates = doc.at("covariates").get<std::vector<std::string>>();
    if (doc.contains("treatment")) s.treatment_column = as_string(doc, "treatment");
    if (doc.contains("delimiter")) {
      const std::string d = as_string(doc, "delimiter");
      if (d.size() != 1) throw Error(ErrorKind::Schema, "schema delimiter must be one character");
      s.delimiter = d[0];
    }
    if (doc.contains("mechanism")) s.mechanism = parse_mechanism(as_string(doc, "mechanism"));
    if (doc.contains("layout")) {
      const std::string layout = as_string(doc, "layout");
      if (layout == "wide") s.layout = InputLayout::Wide;
      else if (layout == "long") s.layout = InputLayout::Long;
      else throw Error(ErrorKind::Schema, "schema layout must be 'wide' or 'long'");
    }
    if (doc.contains("period")) s.period_column = as_string(doc, "period");
    if (doc.contains("outcome")) s.outcome_column = as_string(doc, "outcome");
    if (doc.contains("pre_level")) s.pre_level = as_string(doc, "pre_level");
    if (doc.contains("post_level")) s.post_level = as_string(doc, "post_level");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("malformed schema: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Configuration) throw Error(ErrorKind::Schema, e.what());
    throw;
  }
}

Json schema_to_json(const Schema& s) {
  Json doc;
  doc["id"] = s.id_column;
  doc["y1"] = s.y1_column;
  doc["y2"] = s.y2_column;
  doc["group"] = s.group_column;
  doc["group_a_level"] = s.group_a_level;
  if (s.group_split) {
    Json g;
    g["column"] = s.group_split->column;
    g["threshold"] = s.group_split->threshold ? Json(*s.group_split->threshold) : Json(nullptr);
    doc["group_split"] = g;
  }
  doc["eligibility"] = s.eligibility_column;
  doc["eligible_level"] = s.eligible_level;
  doc["covariates"] = s.covariates;
  doc["treatment"] = s.treatment_column;
  doc["delimiter"] = std::string(1, s.delimiter);
  doc["mechanism"] = std::string(mechanism_name(s.mechanism));
  doc["layout"] = s.layout == InputLayout::Wide ? "wide" : "long";
  if (s.layout == InputLayout::Long) {
    doc["period"] = s.period_column;
    doc["outcome"] = s.outcome_column;
    doc["pre_level"] = s.pre_level;
    doc["post_level"] = s.post_level;
  }
  return doc;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "invalid JSON in '" + path.string() + "': " + e.what());
  }
}

Schema load_schema(const std::filesystem::path& path) {
  const Json doc = read_json(path);
  return schema_from_json(doc);
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Json to_json(const LinearModel& m) {
  Json doc;
  doc["fitted_on"] = m.fitted_on;
  doc["coefficients"] = to_vector(m.coefficients);
  doc["residual_variance"] = m.residual_variance;
  doc["n_obs"] = m.n_obs;
  return doc;
}

Json to_json(const PropensityModel& p) {
  Json doc;
  doc["kind"] = p.kind == PropensityKind::Multinomial4 ? "multinomial4" : "separate_binary";
  doc["reference_cell"] = p.kind == PropensityKind::Multinomial4 ? "(b,inf)" : "";
  doc["intercept_only"] = p.intercept_only;
  doc["basis"] = p.basis.name;
  doc["trim_epsilon"] = p.trim_epsilon;
  Json coef = Json::object();
  for (Cell c : kCells) {
    const Eigen::VectorXd row = p.coefficients.row(static_cast<Eigen::Index>(index(c))).transpose();
    coef[std::string(cell_label(c))] = to_vector(row);
  }
  doc["coefficients"] = coef;
  doc["iterations"] = p.iterations;
  doc["loglik_trace"] = p.loglik_trace;
  return doc;
}

Json to_json(const NuisanceSet& theta) {
  Json doc;
  doc["mode"] = theta.mode == FitMode::ScoreSet ? "score_set" : "eight_model_or";
  doc["basis"] = theta.basis.name;
  doc["propensity"] = theta.propensity ? to_json(*theta.propensity) : Json(nullptr);
  Json outcome = Json::object();
  for (const auto& [cell, model] : theta.outcome_models) outcome[std::string(cell_label(cell))] = to_json(model);
  doc["outcome_models"] = outcome;
  Json eight = Json::object();
  for (const auto& [key, model] : theta.eight_model_or) eight[model.fitted_on] = to_json(model);
  doc["eight_model_or"] = eight;
  return doc;
}

Json to_json(const EstimateResult& r, bool with_influence) {
  Json doc;
  doc["method"] = std::string(method_name(r.method));
  doc["estimand_label"] = std::string(estimand_name(r.estimand_label));
  doc["estimate"] = r.tau_hat;
  doc["se"] = r.se;
  doc["se_kind"] = std::string(se_kind_name(r.se_kind));
  doc["n"] = r.n;
  if (with_influence && r.influence_values) doc["influence_values"] = *r.influence_values;
  return doc;
}

Json to_json(const BiasEstimate& b) {
  Json doc;
  doc["method"] = "bias_diagnostic";
  doc["estimate"] = b.bias_hat;
  doc["se"] = b.se;
  doc["se_kind"] = "influence_function";
  return doc;
}

Json to_json(const ValidationReport& r) {
  Json doc;
  doc["passed"] = r.passed;
  doc["n"] = r.n;
  Json cells = Json::array();
  for (const CellSummary& c : r.cells) {
    Json cj;
    cj["cell"] = std::string(cell_label(c.cell));
    cj["count"] = c.count;
    cj["mean_delta_y"] = c.mean_delta_y;
    cj["covariate_means"] = c.covariate_means;
    cj["covariate_sds"] = c.covariate_sds;
    cells.push_back(cj);
  }
  doc["cells"] = cells;
  doc["failures"] = r.failures;
  doc["warnings"] = r.warnings;
  return doc;
}

Json to_json(const OracleValues& o) {
  Json doc;
  doc["att_a"] = o.att_a;
  doc["att_b"] = o.att_b;
  doc["mean_D_a_onA"] = o.mean_D_a_onA;
  doc["mean_D_b_onB"] = o.mean_D_b_onB;
  doc["mean_D_b_onA"] = o.mean_D_b_onA;
  doc["naive_diff"] = o.naive_diff;
  doc["reweighted_diff"] = o.reweighted_diff;
  doc["target_tau_t2"] = o.target_tau_t2;
  doc["bias_naive"] = o.bias_naive;
  doc["target_label"] = std::string(estimand_name(o.target_label));
  return doc;
}

Json to_json(const DgpSpec& s) {
  Json doc;
  doc["mu_a"] = s.mu_a;
  doc["mu_b"] = s.mu_b;
  doc["effect_case"] = std::string(effect_case_name(s.effect_case));
  doc["mechanism"] = std::string(mechanism_name(s.mechanism));
  doc["n"] = s.n;
  doc["seed"] = s.seed;
  doc["cpt_bias_slope"] = s.cpt_bias_slope;
  return doc;
}

namespace {

Json summary_json(const EstimatorSummary& s) {
  Json doc;
  doc["mean"] = s.mean;
  doc["sd"] = s.sd;
  doc["mean_se"] = s.mean_se;
  doc["successful_replications"] = s.ok;
  return doc;
}

}  // namespace

Json to_json(const MonteCarloSummary& s) {
  Json doc;
  doc["replications"] = s.replications;
  doc["failures"] = s.failures;
  doc["degenerate"] = s.degenerate;
  doc["naive_DR_A_minus_DR_B"] = summary_json(s.naive);
  doc["reweighted_DR_A_minus_WDR_B"] = summary_json(s.reweighted);
  return doc;
}

Json to_json(const ApplicationTable& t) {
  Json doc;
  doc["n"] = t.n;
  Json cells = Json::array();
  for (const TableCell& c : t.cells) {
    if (!c.computed) continue;
    Json cj;
    cj["row"] = std::string(row_name(c.row));
    cj["column"] = std::string(column_name(c.column));
    cj["estimate"] = c.estimate;
    cj["se"] = c.se;
    cj["se_kind"] = std::string(se_kind_name(c.se_kind));
    if (c.reference) {
      cj["reference_estimate"] = c.reference->estimate;
      cj["reference_se"] = c.reference->se;
      cj["point_pass"] = c.point_pass;
      cj["se_pass"] = c.se_pass;
    } else {
      cj["note"] = "not reported in reference table";
    }
    cells.push_back(cj);
  }
  doc["cells"] = cells;
  doc["comparisons"] = t.comparisons();
  doc["point_passes"] = t.point_passes();
  doc["se_passes"] = t.se_passes();
  return doc;
}

}  // namespace tdid
