#include "fdspde/report_json.hpp"

#include "fdspde/errors.hpp"

namespace fdspde {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

template <typename T>
void assign_if(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("plan key '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const ExperimentPlan& plan) {
  return {{"c", plan.c},
          {"levels", plan.levels},
          {"reference_n", plan.reference_n},
          {"horizon", plan.horizon},
          {"p", plan.p},
          {"samples", plan.samples},
          {"seed", plan.seed},
          {"drift", plan.drift},
          {"initial", plan.initial},
          {"workers", plan.workers}};
}

ExperimentPlan plan_from_json(const json& j, ExperimentPlan base) {
  if (!j.is_object()) throw ConfigError("plan must be a JSON object");
  assign_if(j, "c", base.c);
  assign_if(j, "levels", base.levels);
  assign_if(j, "reference_n", base.reference_n);
  assign_if(j, "horizon", base.horizon);
  assign_if(j, "p", base.p);
  assign_if(j, "samples", base.samples);
  assign_if(j, "seed", base.seed);
  assign_if(j, "drift", base.drift);
  assign_if(j, "initial", base.initial);
  assign_if(j, "workers", base.workers);
  return base;
}

json to_json(const RateReport& r) {
  json levels = json::array();
  for (const auto& e : r.per_level) {
    levels.push_back({{"n", e.n},
                      {"error", e.error},
                      {"stderr", e.stderr_},
                      {"sup_argmax_t", e.sup_argmax_t},
                      {"sup_argmax_x", e.sup_argmax_x},
                      {"pointwise_sup_error", e.pointwise_sup_error}});
  }
  return {{"schema_version", r.schema_version},
          {"kind", r.kind},
          {"plan", to_json(r.plan)},
          {"per_level", levels},
          {"slope", optional_number(r.slope)},
          {"intercept", optional_number(r.intercept)},
          {"residuals", r.residuals},
          {"slope_all_levels", optional_number(r.slope_all_levels)},
          {"excluded_levels", r.excluded_levels},
          {"degenerate", r.degenerate},
          {"reference_slope", r.reference_slope},
          {"runtime_seconds", r.runtime_seconds},
          {"build_id", r.build_id}};
}

RateReport report_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw ReportVersionError("report has no schema_version");
  }
  if (!j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != kReportSchemaVersion) {
    throw ReportVersionError("unsupported report schema_version " + j.at("schema_version").dump());
  }
  try {
    RateReport r;
    r.schema_version = j.at("schema_version").get<int>();
    r.kind = j.at("kind").get<std::string>();
    const auto& p = j.at("plan");
    r.plan.c = p.at("c").get<double>();
    r.plan.levels = p.at("levels").get<std::vector<std::int64_t>>();
    r.plan.reference_n = p.at("reference_n").get<std::int64_t>();
    r.plan.horizon = p.at("horizon").get<double>();
    r.plan.p = p.at("p").get<double>();
    r.plan.samples = p.at("samples").get<std::size_t>();
    r.plan.seed = p.at("seed").get<std::uint64_t>();
    r.plan.drift = p.at("drift").get<std::string>();
    r.plan.initial = p.at("initial").get<std::string>();
    r.plan.workers = p.at("workers").get<std::size_t>();
    for (const auto& e : j.at("per_level")) {
      LevelEstimate l;
      l.n = e.at("n").get<std::int64_t>();
      l.error = e.at("error").get<double>();
      l.stderr_ = e.at("stderr").get<double>();
      l.sup_argmax_t = e.at("sup_argmax_t").get<double>();
      l.sup_argmax_x = e.at("sup_argmax_x").get<double>();
      l.pointwise_sup_error = e.at("pointwise_sup_error").get<double>();
      r.per_level.push_back(l);
    }
    r.slope = read_optional(j, "slope");
    r.intercept = read_optional(j, "intercept");
    r.residuals = j.at("residuals").get<std::vector<double>>();
    r.slope_all_levels = read_optional(j, "slope_all_levels");
    r.excluded_levels = j.at("excluded_levels").get<std::vector<std::int64_t>>();
    r.degenerate = j.at("degenerate").get<bool>();
    r.reference_slope = j.at("reference_slope").get<double>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    r.build_id = j.at("build_id").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw ReportParseError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace fdspde
