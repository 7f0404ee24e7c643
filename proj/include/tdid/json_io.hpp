#pragma once

// JSON documents: ingestion schemas, fitted nuisances, results, summaries.

#include <filesystem>

#include <json.hpp>

#include "tdid/application_table.hpp"
#include "tdid/dgp.hpp"
#include "tdid/estimators.hpp"
#include "tdid/monte_carlo.hpp"
#include "tdid/nuisance.hpp"
#include "tdid/panel.hpp"

namespace tdid {

using Json = nlohmann::ordered_json;

// Keys: id, y1, y2, group, group_a_level, group_split {column, threshold},
// eligibility, eligible_level, covariates, treatment, delimiter, mechanism,
// layout ("wide"/"long"), period, outcome, pre_level, post_level. Missing keys
// keep their defaults; unknown keys are a Schema error.
Schema schema_from_json(const Json& doc);
Json schema_to_json(const Schema& schema);
Schema load_schema(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline; Io error on failure.
void write_json(const std::filesystem::path& path, const Json& doc);

Json to_json(const LinearModel& model);
Json to_json(const PropensityModel& model);
Json to_json(const NuisanceSet& theta);
Json to_json(const EstimateResult& result, bool with_influence = false);
Json to_json(const BiasEstimate& bias);
Json to_json(const ValidationReport& report);
Json to_json(const OracleValues& oracle);
Json to_json(const DgpSpec& spec);
Json to_json(const MonteCarloSummary& summary);
Json to_json(const ApplicationTable& table);

}  // namespace tdid
