#include "fdspde/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fdspde/convergence.hpp"
#include "fdspde/errors.hpp"
#include "fdspde/lemma.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/ou.hpp"
#include "fdspde/report_json.hpp"
#include "fdspde/scheme.hpp"

namespace fdspde {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kCliSchemaVersion = 1;

const std::vector<std::string>& verifier_sweep_keys() {
  static const std::vector<std::string> keys = {
      "cfl_c_list", "n_list",    "summation_lambda", "summation_gammas", "summation_t_list",
      "kernel_t",   "kernel_fixed_n", "kernel_t_list", "q_r",  "q_r_list", "hk_t_list"};
  return keys;
}

std::string flag_name(const std::string& section, const std::string& key) {
  std::string s = "--" + section + "-" + key;
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

/// Flag text to JSON, guided by the type of the default value.
json parse_flag_value(const std::string& text, const json& like) {
  json v;
  try {
    v = json::parse(text);
  } catch (const json::exception&) {
    v = text;
  }
  if (like.is_array() && !v.is_array()) {
    json arr = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        arr.push_back(json::parse(item));
      } catch (const json::exception&) {
        arr.push_back(item);
      }
    }
    return arr;
  }
  if (like.is_string() && !v.is_string()) return text;
  return v;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

struct Context {
  json config;
  fs::path out_dir;
  bool assert_band = false;
  std::ostream& out;
  std::ostream& err;

  json provenance() const {
    return {{"schema_version", kCliSchemaVersion},
            {"effective_config", config},
            {"seed", config["plan"]["seed"]},
            {"build_id", build_id()}};
  }

  fs::path path(const std::string& name) const { return out_dir / name; }

  void write_json(const std::string& name, const json& doc) const {
    std::ofstream f(path(name));
    if (!f) throw ReportIoError("cannot write " + path(name).string());
    f << doc.dump(2) << '\n';
  }

  /// CSV provenance lives in a sidecar so the header stays the first line.
  void write_csv_meta(const std::string& csv_name) const {
    json meta = provenance();
    meta["file"] = csv_name;
    write_json(csv_name + ".meta.json", meta);
  }
};

ExperimentPlan plan_from_config(const json& cfg) {
  json p = json::object();
  for (const char* key : {"levels", "reference_n", "horizon", "p", "samples", "seed", "initial",
                          "workers"}) {
    p[key] = cfg["plan"][key];
  }
  p["c"] = cfg["grid"]["c"];
  p["drift"] = cfg["drifts"]["name"];
  return plan_from_json(p);
}

template <typename T>
T get_as(const json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

VerifierConfig verifier_from_config(const json& cfg, const std::vector<std::string>& only) {
  json v = json::object();
  for (const auto& key : verifier_sweep_keys()) v[key] = cfg["plan"][key];
  const json defaults = to_json(VerifierConfig{});
  for (const auto& [key, value] : cfg["tolerances"].items()) {
    if (defaults.contains(key)) v[key] = value;
  }
  v["c"] = cfg["grid"]["c"];
  v["only"] = only;
  return verifier_config_from_json(v);
}

// ---------------------------------------------------------------------------

int cmd_converge(const Context& ctx) {
  const ExperimentPlan plan = plan_from_config(ctx.config);
  RateReport report = estimate_rates(plan);
  for (const auto& e : report.per_level) {
    ctx.out << "level n=" << e.n << " error=" << e.error << " stderr=" << e.stderr_ << '\n';
  }
  json doc = to_json(report);
  const json prov = ctx.provenance();
  for (const auto& [k, v] : prov.items()) {
    if (k != "schema_version") doc[k] = v;
  }
  ctx.write_json("converge_report.json", doc);
  write_rate_csv(report, ctx.path("converge.csv"));
  ctx.write_csv_meta("converge.csv");
  const double lo = get_as<double>(ctx.config["tolerances"]["slope_min"], "tolerances.slope_min");
  const double hi = get_as<double>(ctx.config["tolerances"]["slope_max"], "tolerances.slope_max");
  if (report.degenerate) {
    ctx.out << "degenerate regression: fewer than two levels with positive error\n";
  } else {
    ctx.out << "slope " << *report.slope << " (band [" << lo << ", " << hi << "])\n";
  }
  if (ctx.assert_band && (!report.slope || *report.slope < lo || *report.slope > hi)) {
    ctx.err << "slope outside acceptance band\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_ou_error(const Context& ctx) {
  const auto& plan = ctx.config["plan"];
  const double c = get_as<double>(ctx.config["grid"]["c"], "grid.c");
  const double t = get_as<double>(plan["ou_t"], "plan.ou_t");
  const auto levels = get_as<std::vector<std::int64_t>>(plan["ou_levels"], "plan.ou_levels");
  std::ofstream csv(ctx.path("ou_error.csv"));
  if (!csv) throw ReportIoError("cannot write " + ctx.path("ou_error.csv").string());
  csv.precision(17);
  csv << "n,t,error_sq\n";
  json rows = json::array();
  json skipped = json::array();
  std::vector<double> lx, ly;
  for (auto n : levels) {
    const auto grid = GridConfig::make(n, c);
    if (t < grid.h() || !grid.on_time_grid(t)) {
      const std::string why = t < grid.h() ? "t below h" : "t not a grid time";
      skipped.push_back({{"n", n}, {"t", t}, {"note", why}});
      ctx.err << "skipping n=" << n << ": " << why << '\n';
      continue;
    }
    const double e = ou_coupling_error_sq(grid, t);
    csv << n << ',' << t << ',' << e << '\n';
    rows.push_back({{"n", n}, {"t", t}, {"error_sq", e}});
    if (e > 0.0) {
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(e));
    }
  }
  csv.close();
  ctx.write_csv_meta("ou_error.csv");
  json summary = ctx.provenance();
  summary["rows"] = rows;
  summary["skipped"] = skipped;
  std::optional<double> slope;
  if (lx.size() >= 2) slope = fit_line(lx, ly).slope;
  summary["slope"] = slope ? json(*slope) : json(nullptr);

  const auto mc_samples = get_as<std::size_t>(plan["ou_mc_samples"], "plan.ou_mc_samples");
  if (mc_samples > 0 && !rows.empty()) {
    const auto n = rows.front()["n"].get<std::int64_t>();
    const auto grid = GridConfig::make(n, c);
    const ExactOuSampler sampler(grid, t, 0);
    const auto seed = get_as<std::uint64_t>(plan["seed"], "plan.seed");
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t s = 0; s < mc_samples; ++s) {
      const NoiseKey key{seed, s};
      const auto field = NoiseField::sample(grid, t, key);
      const auto traj = simulate_ou_disc(grid, field, t);
      const double d = sampler.sample(field, key) - traj.back()[0];
      s1 += d * d;
      s2 += d * d * d * d;
    }
    const double m = static_cast<double>(mc_samples);
    const double mean = s1 / m;
    const double se = mc_samples > 1 ? std::sqrt(std::max(0.0, (s2 / m - mean * mean) / (m - 1.0))) : 0.0;
    summary["monte_carlo"] = {{"n", n}, {"samples", mc_samples}, {"mean", mean}, {"stderr", se},
                              {"quadrature", rows.front()["error_sq"]}};
    ctx.out << "monte carlo n=" << n << ": " << mean << " +- " << se << '\n';
  }
  ctx.write_json("ou_error_summary.json", summary);
  const double lo = get_as<double>(ctx.config["tolerances"]["ou_slope_min"], "tolerances.ou_slope_min");
  const double hi = get_as<double>(ctx.config["tolerances"]["ou_slope_max"], "tolerances.ou_slope_max");
  if (slope) ctx.out << "slope " << *slope << " (band [" << lo << ", " << hi << "])\n";
  if (ctx.assert_band && (!slope || *slope < lo || *slope > hi)) {
    ctx.err << "slope outside acceptance band\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_verify(const Context& ctx, const std::vector<std::string>& only) {
  const VerifierConfig cfg = verifier_from_config(ctx.config, only);
  const VerifierReport report = run_all(cfg);
  for (const auto& w : report.warnings) ctx.err << "warning: " << w << '\n';
  for (const auto& c : report.checks) {
    ctx.out << (c.pass ? "PASS " : "FAIL ") << c.id << (c.pass ? "" : ": " + c.narrative) << '\n';
  }
  json doc = to_json(report);
  const json prov = ctx.provenance();
  for (const auto& [k, v] : prov.items()) {
    if (k != "schema_version") doc[k] = v;
  }
  ctx.write_json("verify_report.json", doc);
  return report.all_pass() ? kExitOk : kExitLemma;
}

int cmd_simulate(const Context& ctx) {
  const auto& plan = ctx.config["plan"];
  const auto n = get_as<std::int64_t>(ctx.config["grid"]["n"], "grid.n");
  const double c = get_as<double>(ctx.config["grid"]["c"], "grid.c");
  const auto grid = GridConfig::make(n, c);
  const double horizon = get_as<double>(plan["horizon"], "plan.horizon");
  if (!grid.on_time_grid(horizon) || horizon < 0.0) throw ConfigError("plan.horizon is not a grid time");
  auto times = get_as<std::vector<double>>(plan["snapshot_times"], "plan.snapshot_times");
  if (times.empty()) times = {0.0, horizon};
  std::vector<std::int64_t> steps;
  for (double t : times) {
    if (!grid.on_time_grid(t) || t < 0.0) throw ConfigError("snapshot time " + std::to_string(t) + " is not a grid time");
    const auto k = grid.step_of(t);
    if (grid.time(k) > horizon + 1e-15) throw ConfigError("snapshot time beyond horizon");
    steps.push_back(k);
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  std::vector<double> snap_times;
  for (auto k : steps) snap_times.push_back(grid.time(k));

  const DriftSpec& drift = find_drift(get_as<std::string>(ctx.config["drifts"]["name"], "drifts.name"));
  const InitialCondition& ic = find_initial_condition(get_as<std::string>(plan["initial"], "plan.initial"));
  const NoiseKey key{get_as<std::uint64_t>(plan["seed"], "plan.seed"),
                     get_as<std::uint64_t>(plan["sample_index"], "plan.sample_index")};
  const auto field = NoiseField::sample_steps(grid, static_cast<std::size_t>(grid.step_of(horizon)), key);
  const SchemeRun result = run(grid, drift, ic.sample(grid), field, horizon, snap_times);

  json files = json::array();
  for (const auto& [k, state] : result.snapshots) {
    const std::string name = "snapshot_" + std::to_string(k) + ".csv";
    std::ofstream csv(ctx.path(name));
    if (!csv) throw ReportIoError("cannot write " + ctx.path(name).string());
    csv.precision(17);
    csv << "x,u\n";
    for (std::size_t i = 0; i < state.size(); ++i) csv << grid.point(static_cast<std::int64_t>(i)) << ',' << state[i] << '\n';
    files.push_back({{"file", name}, {"step", k}, {"t", grid.time(k)}});
  }
  json manifest = ctx.provenance();
  manifest["snapshots"] = files;
  manifest["h"] = grid.h();
  ctx.write_json("simulate_manifest.json", manifest);
  ctx.out << "wrote " << files.size() << " snapshots to " << ctx.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_noise(const Context& ctx, const std::string& action, const std::string& file) {
  const auto& plan = ctx.config["plan"];
  const fs::path path = file.empty() ? ctx.path("noise.bin") : fs::path(file);
  if (action == "dump") {
    const auto grid = GridConfig::make(get_as<std::int64_t>(ctx.config["grid"]["n"], "grid.n"),
                                       get_as<double>(ctx.config["grid"]["c"], "grid.c"));
    const NoiseKey key{get_as<std::uint64_t>(plan["seed"], "plan.seed"),
                       get_as<std::uint64_t>(plan["sample_index"], "plan.sample_index")};
    const auto field = NoiseField::sample(grid, get_as<double>(plan["horizon"], "plan.horizon"), key);
    field.dump(path);
    json meta = ctx.provenance();
    meta["file"] = path.string();
    meta["steps"] = field.steps();
    ctx.write_json("noise_manifest.json", meta);
    ctx.out << "wrote " << field.steps() << " steps x " << grid.num_space() << " cells to " << path.string() << '\n';
    return kExitOk;
  }
  NoiseField field = [&] {
    try {
      return NoiseField::load(path);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }();
  const auto cells = field.cells();
  const double var_ref = field.grid().h() * field.grid().spacing();
  double s1 = 0.0, s2 = 0.0;
  for (double v : cells) {
    s1 += v;
    s2 += v * v;
  }
  const double m = static_cast<double>(cells.size());
  json summary = ctx.provenance();
  summary["file"] = path.string();
  summary["n"] = field.grid().n();
  summary["c"] = field.grid().c();
  summary["steps"] = field.steps();
  summary["seed"] = field.key().seed;
  summary["sample_index"] = field.key().sample_index;
  summary["cell_mean"] = m > 0 ? s1 / m : 0.0;
  summary["cell_variance_ratio"] = m > 0 ? (s2 / m) / var_ref : 0.0;
  ctx.write_json("noise_summary.json", summary);
  ctx.out << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

json default_cli_config() {
  json plan = {{"levels", {4, 8, 16, 32}},
               {"reference_n", 64},
               {"horizon", 0.25},
               {"p", 2.0},
               {"samples", 200},
               {"seed", 20240601},
               {"initial", "sine"},
               {"workers", 0},
               {"sample_index", 0},
               {"snapshot_times", json::array()},
               {"ou_levels", {8, 16, 32, 64}},
               {"ou_t", 0.25},
               {"ou_mc_samples", 0}};
  const json sweeps = to_json(VerifierConfig{});
  for (const auto& key : verifier_sweep_keys()) plan[key] = sweeps[key];
  json tolerances = {{"slope_min", -0.65}, {"slope_max", -0.35}, {"ou_slope_min", -1.2}, {"ou_slope_max", -0.8}};
  for (const auto& [key, value] : sweeps.items()) {
    if (key == "c" || key == "only") continue;
    if (std::find(verifier_sweep_keys().begin(), verifier_sweep_keys().end(), key) != verifier_sweep_keys().end()) continue;
    tolerances[key] = value;
  }
  return {{"grid", {{"c", 0.25}, {"n", 16}}},
          {"plan", plan},
          {"drifts", {{"name", "sign"}}},
          {"output", {{"dir", "fdspde-out"}}},
          {"tolerances", tolerances}};
}

json merge_cli_config(const json& base, const json& overlay) {
  if (!overlay.is_object()) throw ConfigError("config must be a JSON object");
  json merged = base;
  for (const auto& [section, body] : overlay.items()) {
    if (!base.contains(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      if (!base[section].contains(key)) {
        throw ConfigError("unknown key '" + section + "." + key + "'");
      }
      merged[section][key] = value;
    }
  }
  return merged;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const json defaults = default_cli_config();
  CLI::App app{"Finite-difference solver and benchmark harness for the stochastic heat equation "
               "with bounded drift on the circle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", build_id());

  std::string config_path;
  std::map<std::string, std::string> flag_values;  // "section.key" -> text
  std::string levels, ref, seed, workers;
  std::vector<std::string> only;
  bool assert_band = false;
  std::string noise_action = "dump";
  std::string noise_file;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    for (const auto& [section, body] : defaults.items()) {
      for (const auto& [key, value] : body.items()) {
        const std::string id = section + "." + key;
        sub->add_option(flag_name(section, key), flag_values[id], "overrides " + id);
      }
    }
    sub->add_option("--levels", levels, "alias of --plan-levels");
    sub->add_option("--ref", ref, "alias of --plan-reference-n");
    sub->add_option("--seed", seed, "alias of --plan-seed");
    sub->add_option("--workers", workers, "alias of --plan-workers");
  };
  auto* converge = app.add_subcommand("converge", "Monte Carlo strong-rate experiment");
  auto* ou_error = app.add_subcommand("ou-error", "exact OU coupling error sweep");
  auto* verify = app.add_subcommand("verify", "numerical lemma checks");
  auto* simulate = app.add_subcommand("simulate", "run the scheme and dump snapshots");
  auto* noise = app.add_subcommand("noise", "dump or load a binary noise field");
  for (auto* sub : {converge, ou_error, verify, simulate, noise}) add_common(sub);
  converge->add_flag("--assert", assert_band, "exit 2 if the slope is outside the band");
  ou_error->add_flag("--assert", assert_band, "exit 2 if the slope is outside the band");
  verify->add_option("--only", only, "run only these check ids")->delimiter(',');
  noise->add_option("action", noise_action, "dump or load")->check(CLI::IsMember({"dump", "load"}));
  noise->add_option("--file", noise_file, "binary noise file (default <output dir>/noise.bin)");

  std::vector<const char*> argv{"fdspde"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << build_id() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  try {
    json config = defaults;
    if (!config_path.empty()) config = merge_cli_config(config, read_json_file(config_path));
    json overlay = json::object();
    auto set_flag = [&](const std::string& section, const std::string& key, const std::string& text) {
      overlay[section][key] = parse_flag_value(text, defaults[section][key]);
    };
    for (const auto& [id, text] : flag_values) {
      if (text.empty()) continue;
      const auto dot = id.find('.');
      set_flag(id.substr(0, dot), id.substr(dot + 1), text);
    }
    if (!levels.empty()) set_flag("plan", "levels", levels);
    if (!ref.empty()) set_flag("plan", "reference_n", ref);
    if (!seed.empty()) set_flag("plan", "seed", seed);
    if (!workers.empty()) set_flag("plan", "workers", workers);
    if (!overlay.empty()) config = merge_cli_config(config, overlay);

    const fs::path out_dir = get_as<std::string>(config["output"]["dir"], "output.dir");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ReportIoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    Context ctx{config, out_dir, assert_band, out, err};

    if (converge->parsed()) return cmd_converge(ctx);
    if (ou_error->parsed()) return cmd_ou_error(ctx);
    if (verify->parsed()) return cmd_verify(ctx, only);
    if (simulate->parsed()) return cmd_simulate(ctx);
    return cmd_noise(ctx, noise_action, noise_file);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace fdspde
