#pragma once

#include <json.hpp>

#include "fdspde/convergence.hpp"

namespace fdspde {

nlohmann::json to_json(const ExperimentPlan& plan);
/// Missing keys keep their defaults; type mismatches throw ConfigError.
ExperimentPlan plan_from_json(const nlohmann::json& j, ExperimentPlan base = {});

nlohmann::json to_json(const RateReport& report);
/// Throws ReportVersionError or ReportParseError.
RateReport report_from_json(const nlohmann::json& j);

}  // namespace fdspde
