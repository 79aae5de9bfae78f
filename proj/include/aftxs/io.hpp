#pragma once

#include "aftxs/estimators.hpp"
#include "aftxs/information.hpp"
#include "aftxs/model.hpp"
#include "aftxs/study.hpp"

#include <json.hpp>

#include <string>

namespace aftxs::io {

using Json = nlohmann::ordered_json;

// Schema errors throw InvalidArgument naming the offending field.

Json to_json(const BaselineModel& b);
Json to_json(const CovariateModel& c);
Json to_json(const ModelSpec& spec);
Json to_json(const SeedSpec& seed);
Json to_json(const HazardOptions& opts, HazardMethod method);
Json to_json(const EstimationResult& r);
Json to_json(const InformationBound& b);
Json to_json(const ValidationReport& r);
Json to_json(const StudyConfig& c);
Json to_json(const StudyReport& r);
Json to_json(const Dataset& d, const std::optional<ModelSpec>& spec);

BaselineModel baseline_from_json(const Json& j);
CovariateModel covariates_from_json(const Json& j);
ModelSpec model_spec_from_json(const Json& j);
SeedSpec seed_from_json(const Json& j);
HazardOptions hazard_options_from_json(const Json& j);
HazardMethod hazard_method_from_json(const Json& j);
/// A "spec" given as a string is read as a path relative to `base_dir`.
StudyConfig study_config_from_json(const Json& j, const std::string& base_dir = ".");
Dataset dataset_from_json(const Json& j);

Json read_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
ModelSpec read_model_spec(const std::string& path);
StudyConfig read_study_config(const std::string& path);

/// Header `x,z1,...,zk`; values written with 17 significant digits.
std::string dataset_csv(const Dataset& d);
void write_dataset_csv(const Dataset& d, const std::string& path);
/// Errors name the 1-based line number.
Dataset parse_dataset_csv(const std::string& text);
Dataset read_dataset_csv(const std::string& path);

}  // namespace aftxs::io
