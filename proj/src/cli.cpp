#include "tdid/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tdid/application_table.hpp"
#include "tdid/bootstrap.hpp"
#include "tdid/dgp.hpp"
#include "tdid/error.hpp"
#include "tdid/estimators.hpp"
#include "tdid/json_io.hpp"
#include "tdid/monte_carlo.hpp"
#include "tdid/regression.hpp"
#include "tdid/rng.hpp"
#include "tdid/scores.hpp"

namespace tdid {
namespace {

namespace fs = std::filesystem;

// Flat JSON object whose keys are long flag names without the dashes; the
// keys go to whichever subcommand was selected on the command line. A nested
// object {"estimate": {...}} targets that subcommand explicitly.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    Json doc;
    try {
      doc = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Configuration, std::string("config file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::Configuration, "config file must hold a JSON object");
    std::vector<std::string> parents;
    for (const CLI::App* sub : root_->get_subcommands()) parents.push_back(sub->get_name());
    std::vector<CLI::ConfigItem> items;
    collect(doc, parents, items);
    return items;
  }

 private:
  const CLI::App* root_;

  static void collect(const Json& doc, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : doc.items()) {
      if (value.is_null()) continue;
      if (value.is_object()) {
        collect(value, {key}, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      auto scalar = [&key](const Json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw Error(ErrorKind::Configuration, "config key '" + key + "' has an unsupported value");
      };
      if (value.is_array()) {
        for (const Json& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// ---------------------------------------------------------------------------
// Options

struct InputArgs {
  std::string input;
  std::string schema;
  std::string mechanism;  // empty: as declared by the schema
  std::vector<std::string> covariates;
  std::string missing = "drop";
};

struct EstimateArgs {
  InputArgs in;
  std::vector<std::string> methods{"DR_reweighted", "DR_naive_difference"};
  double trim = 0.01;
  bool normalize_weights = false;
  int bootstrap_reps = 999;
  std::uint64_t seed = 0;
  bool no_controls = false;
  std::string covariance = "hc1";
  std::string transform = "linear";
  std::string propensity = "multinomial";
  bool scores_csv = false;
  std::string out = "tdid_out";
};

struct SimulateArgs {
  double mu_a = 1.0;
  double mu_b = 3.0;
  std::string effect_case = "heterogeneous";
  std::string mechanism = "both";
  std::size_t n = 2000;
  int replications = 2000;
  int bins = 50;
  std::uint64_t seed = 0;
  double trim = 1e-6;
  bool normalize_weights = false;
  double cpt_slope = 1.0;
  bool serial = false;
  std::string out = "tdid_out";
};

struct ReplicateArgs {
  InputArgs in;
  int bootstrap_reps = 999;
  std::uint64_t seed = 0;
  std::string covariance = "hc1";
  std::string out = "tdid_out";
};

struct ValidateArgs {
  InputArgs in;
  std::string out = "tdid_out";
};

void add_input_options(CLI::App* sub, InputArgs& a) {
  sub->add_option("--input", a.input, "Input CSV file");
  sub->add_option("--schema", a.schema, "Column-mapping JSON file");
  sub->add_option("--mechanism", a.mechanism, "Treatment mechanism: only-a or both (overrides the schema)")
      ->check(CLI::IsMember({"only-a", "both"}));
  sub->add_option("--covariates", a.covariates, "Covariate columns (overrides the schema)")->delimiter(',');
  sub->add_option("--missing", a.missing, "Rows with missing values: drop or error")
      ->capture_default_str()
      ->check(CLI::IsMember({"drop", "error"}));
}

Json input_echo(const InputArgs& a) {
  // Unset overrides are left out so the echo can be fed back through --config.
  Json doc;
  if (!a.input.empty()) doc["input"] = a.input;
  if (!a.schema.empty()) doc["schema"] = a.schema;
  if (!a.mechanism.empty()) doc["mechanism"] = a.mechanism;
  if (!a.covariates.empty()) doc["covariates"] = a.covariates;
  doc["missing"] = a.missing;
  return doc;
}

CovarianceKind parse_covariance(const std::string& name) {
  if (name == "hc1") return CovarianceKind::HC1;
  if (name == "classical") return CovarianceKind::Classical;
  if (name == "cluster") return CovarianceKind::ClusterCR1;
  throw Error(ErrorKind::Configuration, "unknown covariance '" + name + "'");
}

// ---------------------------------------------------------------------------
// Ingestion

Schema card_krueger_schema() {
  Schema s;
  s.id_column = "sheet";
  s.y1_column = "empft";
  s.y2_column = "empft2";
  s.eligibility_column = "state";
  s.eligible_level = "1";
  s.group_split = GroupSplit{"wage_st", std::nullopt};
  s.covariates = {"psoda", "nmgrs", "open"};
  s.mechanism = Mechanism::BothGroups;
  return s;
}

constexpr const char* kReplicationHint =
    "expected the minimum-wage replication file as a comma-separated wide table with columns "
    "sheet, state (1 = eligible), wage_st, empft, empft2, psoda, nmgrs, open; "
    "pass another layout with --schema";

Schema resolve_schema(const InputArgs& a, const Schema& fallback) {
  Schema s = a.schema.empty() ? fallback : load_schema(a.schema);
  if (!a.mechanism.empty()) s.mechanism = parse_mechanism(a.mechanism);
  if (!a.covariates.empty()) s.covariates = a.covariates;
  return s;
}

IngestResult ingest(const InputArgs& a, const Schema& schema) {
  if (a.input.empty()) throw Error(ErrorKind::Io, "missing --input: no data file given");
  const MissingPolicy policy = a.missing == "error" ? MissingPolicy::Error : MissingPolicy::DropRow;
  return load_csv(a.input, schema, policy);
}

Json ingestion_json(const IngestResult& r) {
  Json doc;
  doc["rows_read"] = r.rows_read;
  doc["rows_dropped"] = r.rows_dropped;
  doc["n"] = r.dataset.size();
  doc["warnings"] = r.warnings;
  return doc;
}

// ---------------------------------------------------------------------------
// Output helpers

void prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + out + "': " + ec.message());
  fs::remove(fs::path(out) / "error.json", ec);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------------------
// estimate

struct MethodSelection {
  std::vector<Method> methods;
  bool bias_diagnostic = false;
};

MethodSelection select_methods(const std::vector<std::string>& tokens) {
  MethodSelection sel;
  auto add = [&](Method m) {
    if (std::find(sel.methods.begin(), sel.methods.end(), m) == sel.methods.end()) sel.methods.push_back(m);
  };
  for (const std::string& raw : tokens) {
    const std::string t = lower(raw);
    if (t.empty()) continue;
    if (t == "bias_diagnostic") {
      sel.bias_diagnostic = true;
      continue;
    }
    bool matched = false;
    for (Method m : kMethods) {
      const std::string name = lower(std::string(method_name(m)));
      const bool hit = t == "all" || name == t ||
                       (t.back() == '*' && name.compare(0, t.size() - 1, t, 0, t.size() - 1) == 0);
      if (hit) {
        add(m);
        matched = true;
      }
    }
    if (!matched) {
      std::string known;
      for (Method m : kMethods) known += std::string(method_name(m)) + ", ";
      throw Error(ErrorKind::Configuration,
                  "unknown method '" + raw + "' (known: " + known + "bias_diagnostic, all, PREFIX*)");
    }
  }
  if (sel.methods.empty() && !sel.bias_diagnostic)
    throw Error(ErrorKind::Configuration, "no estimation methods selected");
  return sel;
}

bool is_dr(Method m) { return m == Method::DR_reweighted || m == Method::DR_naive_difference; }
bool is_ols(Method m) {
  return m == Method::OLS_TDID || m == Method::OLS_DID_A || m == Method::OLS_DID_B;
}
bool is_or(Method m) { return !is_dr(m) && !is_ols(m); }

std::optional<TableColumn> table_column(Method m) {
  switch (m) {
    case Method::OLS_DID_A:
    case Method::OR_DID_A: return TableColumn::DidA;
    case Method::OLS_DID_B:
    case Method::OR_DID_B: return TableColumn::DidB;
    case Method::OR_WDID_B: return TableColumn::WDidB;
    case Method::OLS_TDID:
    case Method::OR_difference: return TableColumn::AMinusB;
    case Method::OR_reweighted_difference: return TableColumn::AMinusWB;
    default: return std::nullopt;
  }
}

void write_method_table(const fs::path& path, const std::vector<EstimateResult>& results, bool controls) {
  const std::string suffix = controls ? " w/ Controls" : " no Controls";
  std::map<std::string, std::map<TableColumn, const EstimateResult*>> rows;
  for (const EstimateResult& r : results) {
    const auto col = table_column(r.method);
    if (!col) continue;
    rows[(is_ols(r.method) ? "OLS" : "OR") + suffix][*col] = &r;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  f << "Method";
  for (TableColumn c : kTableColumns) f << ',' << column_name(c);
  f << '\n' << std::setprecision(17);
  for (const auto& [label, cols] : rows) {
    f << label;
    for (TableColumn c : kTableColumns) {
      f << ',';
      if (auto it = cols.find(c); it != cols.end()) f << it->second->tau_hat;
    }
    f << "\nse";
    for (TableColumn c : kTableColumns) {
      f << ',';
      if (auto it = cols.find(c); it != cols.end() && it->second->se_kind != SeKind::None)
        f << it->second->se;
    }
    f << '\n';
  }
  if (!f) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

Json estimate_echo(const EstimateArgs& a) {
  Json doc = input_echo(a.in);
  doc["methods"] = a.methods;
  doc["trim"] = a.trim;
  doc["normalize-weights"] = a.normalize_weights;
  doc["bootstrap-reps"] = a.bootstrap_reps;
  doc["seed"] = a.seed;
  doc["no-controls"] = a.no_controls;
  doc["covariance"] = a.covariance;
  doc["transform"] = a.transform;
  doc["propensity"] = a.propensity;
  doc["scores-csv"] = a.scores_csv;
  doc["out"] = a.out;
  return doc;
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const MethodSelection sel = select_methods(a.methods);
  if (!(a.trim >= 0.0 && a.trim < 0.5)) throw Error(ErrorKind::Configuration, "--trim must lie in [0, 0.5)");
  if (a.bootstrap_reps < 0) throw Error(ErrorKind::Configuration, "--bootstrap-reps must be >= 0");
  prepare_out(a.out);
  write_json(fs::path(a.out) / "config.json", estimate_echo(a));

  const IngestResult ing = ingest(a.in, resolve_schema(a.in, Schema{}));
  const PanelDataset& data = ing.dataset;
  const bool controls = !a.no_controls;

  NuisanceOptions nopts;
  nopts.trim_epsilon = a.trim;
  nopts.basis = basis_by_name(a.transform);
  if (a.propensity == "separate") nopts.propensity_kind = PropensityKind::SeparateBinary;
  else if (a.propensity != "multinomial")
    throw Error(ErrorKind::Configuration, "--propensity must be multinomial or separate");
  if (!controls) {
    nopts.propensity_spec = ModelSpec::InterceptOnly;
    nopts.outcome_spec = ModelSpec::InterceptOnly;
  }
  EstimatorOptions eopts;
  eopts.scores.normalize_weights = a.normalize_weights;
  eopts.keep_influence = false;
  RegressionOptions ropts;
  ropts.covariance = parse_covariance(a.covariance);

  Json doc;
  doc["ingestion"] = ingestion_json(ing);
  Json results = Json::array();
  std::vector<EstimateResult> computed;

  const bool need_scores =
      sel.bias_diagnostic || std::any_of(sel.methods.begin(), sel.methods.end(), is_dr);
  std::optional<NuisanceSet> theta;
  if (need_scores) theta = fit_nuisances(data, FitMode::ScoreSet, nopts);

  std::optional<std::vector<double>> or_point;
  std::optional<std::vector<double>> or_se;
  const bool need_or = std::any_of(sel.methods.begin(), sel.methods.end(), is_or);
  if (need_or) {
    const ModelSpec spec = controls ? ModelSpec::Full : ModelSpec::InterceptOnly;
    auto columns = [spec, &nopts](const PanelDataset& d) {
      NuisanceOptions o = nopts;
      o.outcome_spec = spec;
      const NuisanceSet m = fit_nuisances(d, FitMode::EightModelOR, o);
      const double da = or_did(d, m, Group::A).tau_hat;
      const double db = or_did(d, m, Group::B).tau_hat;
      const double wb = or_wdid_b(d, m).tau_hat;
      return std::vector<double>{da, db, wb, da - db, da - wb};
    };
    or_point = columns(data);
    if (a.bootstrap_reps > 0) {
      BootstrapConfig bc;
      bc.replications = a.bootstrap_reps;
      bc.seed = a.seed;
      or_se = bootstrap(data, columns, bc).se;
    }
  }

  for (Method m : sel.methods) {
    EstimateResult r;
    switch (m) {
      case Method::DR_reweighted: r = estimate_tau_t2(data, *theta, eopts); break;
      case Method::DR_naive_difference: r = estimate_naive_difference(data, *theta, eopts); break;
      case Method::OLS_TDID: r = ols_tdid(data, controls, ropts); break;
      case Method::OLS_DID_A: r = ols_did(data, Group::A, controls, ropts); break;
      case Method::OLS_DID_B: r = ols_did(data, Group::B, controls, ropts); break;
      default: {
        const std::size_t col = static_cast<std::size_t>(*table_column(m));
        r.method = m;
        r.n = data.size();
        r.tau_hat = (*or_point)[col];
        r.estimand_label = EstimandLabel::Descriptive;
        if (m == Method::OR_reweighted_difference) r.estimand_label = reweighted_estimand(data.mechanism());
        if (m == Method::OR_difference && !controls)
          r.estimand_label = data.mechanism() == Mechanism::OnlyGroupA ? EstimandLabel::ATT_A
                                                                       : EstimandLabel::ATT_A_minus_ATT_B;
        if (or_se) {
          r.se = (*or_se)[col];
          r.se_kind = SeKind::Bootstrap;
        }
      }
    }
    computed.push_back(r);
    results.push_back(to_json(r));
  }

  std::optional<BiasEstimate> bias;
  if (sel.bias_diagnostic) {
    bias = bias_diagnostic(data, *theta, eopts);
    results.push_back(to_json(*bias));
  }
  doc["results"] = results;

  std::ostringstream text;
  text << "n = " << data.size() << " (" << ing.rows_dropped << " rows dropped), mechanism "
       << mechanism_name(data.mechanism()) << ", " << (controls ? "with" : "without") << " controls\n";
  text << std::left << std::setw(26) << "method" << std::setw(20) << "estimand" << std::right
       << std::setw(12) << "estimate" << std::setw(12) << "se" << "  se_kind\n";
  for (const EstimateResult& r : computed) {
    text << std::left << std::setw(26) << method_name(r.method) << std::setw(20)
         << estimand_name(r.estimand_label) << std::right << std::setw(12) << fixed(r.tau_hat)
         << std::setw(12) << (r.se_kind == SeKind::None ? std::string("-") : fixed(r.se)) << "  "
         << se_kind_name(r.se_kind) << '\n';
  }
  if (bias) {
    text << std::left << std::setw(26) << "bias_diagnostic" << std::setw(20) << "-" << std::right
         << std::setw(12) << fixed(bias->bias_hat) << std::setw(12) << fixed(bias->se)
         << "  influence_function\n";
  }
  for (const std::string& w : ing.warnings) text << "warning: " << w << '\n';

  const fs::path dir(a.out);
  write_json(dir / "estimates.json", doc);
  write_text(dir / "estimates.txt", text.str());
  {
    std::ofstream f(dir / "estimates.csv");
    if (!f) throw Error(ErrorKind::Io, "cannot write estimates.csv");
    f << "method,estimand_label,estimate,se,se_kind,n\n" << std::setprecision(17);
    for (const EstimateResult& r : computed) {
      f << method_name(r.method) << ',' << estimand_name(r.estimand_label) << ',' << r.tau_hat << ','
        << r.se << ',' << se_kind_name(r.se_kind) << ',' << r.n << '\n';
    }
    if (bias) f << "bias_diagnostic,Descriptive," << bias->bias_hat << ',' << bias->se << ",influence_function," << data.size() << '\n';
  }
  if (std::any_of(sel.methods.begin(), sel.methods.end(), [](Method m) { return !is_dr(m); }))
    write_method_table(dir / "table.csv", computed, controls);
  if (theta) write_json(dir / "nuisances.json", to_json(*theta));
  if (a.scores_csv && theta) {
    const CellTable cells = cell_table(data);
    std::vector<ScoreVector> s = score_vectors(kScoreKinds, data, cells, *theta, eopts.scores);
    write_scores_csv(data, s, dir / "scores.csv");
  }
  out << text.str();
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

Json simulate_echo(const SimulateArgs& a) {
  Json doc;
  doc["mu-a"] = a.mu_a;
  doc["mu-b"] = a.mu_b;
  doc["case"] = a.effect_case;
  doc["mechanism"] = a.mechanism;
  doc["n"] = a.n;
  doc["replications"] = a.replications;
  doc["bins"] = a.bins;
  doc["seed"] = a.seed;
  doc["trim"] = a.trim;
  doc["normalize-weights"] = a.normalize_weights;
  doc["cpt-slope"] = a.cpt_slope;
  doc["serial"] = a.serial;
  doc["out"] = a.out;
  return doc;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  DgpSpec spec;
  spec.mu_a = a.mu_a;
  spec.mu_b = a.mu_b;
  spec.effect_case = parse_effect_case(a.effect_case);
  spec.mechanism = parse_mechanism(a.mechanism);
  spec.n = a.n;
  spec.seed = a.seed;
  spec.cpt_bias_slope = a.cpt_slope;
  check_spec(spec);
  if (!(a.trim >= 0.0 && a.trim < 0.5)) throw Error(ErrorKind::Configuration, "--trim must lie in [0, 0.5)");
  prepare_out(a.out);
  const Json echo = simulate_echo(a);
  write_json(fs::path(a.out) / "config.json", echo);

  EstimatorConfig cfg;
  cfg.nuisance.trim_epsilon = a.trim;
  cfg.scores.normalize_weights = a.normalize_weights;
  const MonteCarloResult mc = a.serial ? run_monte_carlo_serial(spec, a.replications, cfg)
                                       : run_monte_carlo(spec, a.replications, cfg);
  const MonteCarloSummary summary = summarize(mc);
  const OracleValues oracle = closed_form_oracle(spec);

  const fs::path dir(a.out);
  Json doc = to_json(summary);
  doc["oracle"] = to_json(oracle);
  doc["dgp"] = to_json(spec);
  doc["config"] = echo;
  write_json(dir / "summary.json", doc);
  export_histogram(mc, dir / "histogram.csv", a.bins);
  {
    std::ofstream f(dir / "replications.csv");
    if (!f) throw Error(ErrorKind::Io, "cannot write replications.csv");
    f << "replication,seed,naive,reweighted,se_naive,se_reweighted,ok,message\n" << std::setprecision(17);
    for (std::size_t r = 0; r < mc.replications(); ++r) {
      std::string msg = mc.flags[r].message;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      f << r << ',' << derive_seed(spec.seed, r) << ',' << mc.estimates_naive[r] << ','
        << mc.estimates_reweighted[r] << ',' << mc.se_naive[r] << ',' << mc.se_reweighted[r] << ','
        << (mc.flags[r].ok ? "true" : "false") << ",\"" << msg << "\"\n";
    }
  }

  std::ostringstream text;
  text << "replications " << summary.replications << ", failures " << summary.failures << ", n "
       << spec.n << ", case " << effect_case_name(spec.effect_case) << ", mechanism "
       << mechanism_name(spec.mechanism) << '\n';
  text << std::left << std::setw(30) << "estimator" << std::right << std::setw(10) << "mean"
       << std::setw(10) << "sd" << std::setw(10) << "mean se" << std::setw(10) << "oracle" << '\n';
  text << std::left << std::setw(30) << "naive (DR A - DR B)" << std::right << std::setw(10)
       << fixed(summary.naive.mean) << std::setw(10) << fixed(summary.naive.sd) << std::setw(10)
       << fixed(summary.naive.mean_se) << std::setw(10) << fixed(oracle.naive_diff) << '\n';
  text << std::left << std::setw(30) << "reweighted (DR A - WDR B)" << std::right << std::setw(10)
       << fixed(summary.reweighted.mean) << std::setw(10) << fixed(summary.reweighted.sd)
       << std::setw(10) << fixed(summary.reweighted.mean_se) << std::setw(10)
       << fixed(oracle.reweighted_diff) << '\n';
  if (summary.degenerate) text << "degenerate: fewer than two successful replications, sd reported as 0\n";
  write_text(dir / "summary.txt", text.str());
  out << text.str();
  return 0;
}

// ---------------------------------------------------------------------------
// replicate

Json replicate_echo(const ReplicateArgs& a) {
  Json doc = input_echo(a.in);
  doc["bootstrap-reps"] = a.bootstrap_reps;
  doc["seed"] = a.seed;
  doc["covariance"] = a.covariance;
  doc["out"] = a.out;
  return doc;
}

int cmd_replicate(const ReplicateArgs& a, std::ostream& out) {
  if (a.in.input.empty()) throw Error(ErrorKind::Io, std::string("replicate needs --input: ") + kReplicationHint);
  if (!fs::exists(a.in.input))
    throw Error(ErrorKind::Io, "cannot open '" + a.in.input + "': " + kReplicationHint);
  if (a.bootstrap_reps < 1) throw Error(ErrorKind::Configuration, "--bootstrap-reps must be >= 1");
  prepare_out(a.out);
  write_json(fs::path(a.out) / "config.json", replicate_echo(a));

  const IngestResult ing = ingest(a.in, resolve_schema(a.in, card_krueger_schema()));
  ApplicationOptions opts;
  opts.regression.covariance = parse_covariance(a.covariance);
  opts.bootstrap.replications = a.bootstrap_reps;
  opts.bootstrap.seed = a.seed;
  const ApplicationTable table = application_table(ing.dataset, opts);

  const fs::path dir(a.out);
  Json doc = to_json(table);
  doc["ingestion"] = ingestion_json(ing);
  write_json(dir / "application_table.json", doc);
  write_application_csv(table, dir / "application_table.csv");
  const std::string text = format_application_text(table);
  write_text(dir / "application_table.txt", text);
  out << text;
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  prepare_out(a.out);
  Json echo = input_echo(a.in);
  echo["out"] = a.out;
  write_json(fs::path(a.out) / "config.json", echo);
  const IngestResult ing = ingest(a.in, resolve_schema(a.in, Schema{}));
  const ValidationReport report = validate(ing.dataset);

  Json doc = to_json(report);
  doc["ingestion"] = ingestion_json(ing);
  write_json(fs::path(a.out) / "validation.json", doc);

  std::ostringstream text;
  text << (report.passed ? "PASSED" : "FAILED") << ": n = " << report.n << '\n';
  text << std::left << std::setw(10) << "cell" << std::right << std::setw(8) << "count" << std::setw(14)
       << "mean dY" << '\n';
  for (const CellSummary& c : report.cells) {
    text << std::left << std::setw(10) << cell_label(c.cell) << std::right << std::setw(8) << c.count
         << std::setw(14) << fixed(c.mean_delta_y) << '\n';
  }
  for (const std::string& f : report.failures) text << "failure: " << f << '\n';
  for (const std::string& w : report.warnings) text << "warning: " << w << '\n';
  for (const std::string& w : ing.warnings)
    if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end())
      text << "warning: " << w << '\n';
  write_text(fs::path(a.out) / "validation.txt", text.str());
  out << text.str();
  return report.passed ? 0 : exit_code(ErrorKind::Validation);
}

Json error_json(const Error& e) {
  Json err;
  err["kind"] = std::string(error_kind_name(e.kind()));
  err["message"] = e.what();
  err["exit_code"] = exit_code(e.kind());
  if (const auto* t = dynamic_cast<const TrimmingError*>(&e)) err["unit_ids"] = t->unit_ids();
  if (const auto* s = dynamic_cast<const SingularDesignError*>(&e)) err["dependent_columns"] = s->dependent_columns();
  if (const auto* c = dynamic_cast<const ConvergenceError*>(&e)) err["loglik_trace"] = c->loglik_trace();
  Json doc;
  doc["error"] = err;
  return doc;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Triple difference-in-differences estimation and simulation", "tdid"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON file with the same keys as the long flags; command-line values win");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate treatment-effect contrasts from a CSV panel");
  add_input_options(estimate, est.in);
  estimate->add_option("--methods", est.methods, "Comma-separated methods, PREFIX* or all")
      ->delimiter(',')
      ->capture_default_str();
  estimate->add_option("--trim", est.trim, "Propensity trimming threshold")->capture_default_str();
  estimate->add_flag("--normalize-weights", est.normalize_weights, "Normalise comparison weights to mean one");
  estimate->add_option("--bootstrap-reps", est.bootstrap_reps, "Bootstrap replications for OR methods (0: none)")
      ->capture_default_str();
  estimate->add_option("--seed", est.seed, "Bootstrap seed")->capture_default_str();
  estimate->add_flag("--no-controls", est.no_controls, "Drop covariates from all models");
  estimate->add_option("--covariance", est.covariance, "Regression covariance: hc1, classical or cluster")
      ->capture_default_str()
      ->check(CLI::IsMember({"hc1", "classical", "cluster"}));
  estimate->add_option("--transform", est.transform, "Covariate basis: linear or quadratic")->capture_default_str();
  estimate->add_option("--propensity", est.propensity, "Propensity model: multinomial or separate")
      ->capture_default_str();
  estimate->add_flag("--scores-csv", est.scores_csv, "Write per-unit scores");
  estimate->add_option("--out", est.out, "Output directory")->capture_default_str();

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo study on the analytical design");
  simulate->add_option("--mu-a", sim.mu_a, "Covariate mean, group A")->capture_default_str();
  simulate->add_option("--mu-b", sim.mu_b, "Covariate mean, group B")->capture_default_str();
  simulate->add_option("--case", sim.effect_case, "Effects: constant or heterogeneous")
      ->capture_default_str()
      ->check(CLI::IsMember({"constant", "heterogeneous"}));
  simulate->add_option("--mechanism", sim.mechanism, "Treatment mechanism: only-a or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"only-a", "both"}));
  simulate->add_option("--n", sim.n, "Sample size per replication")->capture_default_str();
  simulate->add_option("--replications", sim.replications, "Number of replications")->capture_default_str();
  simulate->add_option("--bins", sim.bins, "Histogram bins")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--trim", sim.trim, "Propensity trimming threshold")->capture_default_str();
  simulate->add_flag("--normalize-weights", sim.normalize_weights, "Normalise comparison weights to mean one");
  simulate->add_option("--cpt-slope", sim.cpt_slope, "Slope of the parallel-trends bias in x")->capture_default_str();
  simulate->add_flag("--serial", sim.serial, "Run replications on one thread");
  simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();

  ReplicateArgs rep;
  CLI::App* replicate = app.add_subcommand("replicate", "Minimum-wage application table with reference values");
  add_input_options(replicate, rep.in);
  replicate->add_option("--bootstrap-reps", rep.bootstrap_reps, "Bootstrap replications")->capture_default_str();
  replicate->add_option("--seed", rep.seed, "Bootstrap seed")->capture_default_str();
  replicate->add_option("--covariance", rep.covariance, "Regression covariance: hc1, classical or cluster")
      ->capture_default_str()
      ->check(CLI::IsMember({"hc1", "classical", "cluster"}));
  replicate->add_option("--out", rep.out, "Output directory")->capture_default_str();

  ValidateArgs val;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Ingest a CSV and report cell diagnostics");
  add_input_options(validate_cmd, val.in);
  validate_cmd->add_option("--out", val.out, "Output directory")->capture_default_str();

  std::string out_dir;
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 1;
    }
    if (estimate->parsed()) {
      out_dir = est.out;
      return cmd_estimate(est, out);
    }
    if (simulate->parsed()) {
      out_dir = sim.out;
      return cmd_simulate(sim, out);
    }
    if (replicate->parsed()) {
      out_dir = rep.out;
      return cmd_replicate(rep, out);
    }
    out_dir = val.out;
    return cmd_validate(val, out);
  } catch (const Error& e) {
    const Json doc = error_json(e);
    err << doc.dump() << '\n';
    if (!out_dir.empty()) {
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (!ec) {
        std::ofstream f(fs::path(out_dir) / "error.json");
        f << doc.dump(2) << '\n';
      }
    }
    return exit_code(e.kind());
  }
}

}  // namespace tdid
