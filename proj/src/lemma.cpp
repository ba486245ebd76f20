#include "fdspde/lemma.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "fdspde/convergence.hpp"
#include "fdspde/errors.hpp"
#include "fdspde/grid.hpp"
#include "fdspde/ou.hpp"
#include "fdspde/spectral.hpp"

namespace fdspde {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly).slope;
}

std::vector<double> as_doubles(const std::vector<std::int64_t>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

std::vector<double> dyadic_times(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

double summation_sum(double lambda, double gamma, double t) {
  if (!(lambda > 0.0) || !(t > 0.0) || gamma < 0.0) throw Error("summation_sum: need lambda, t > 0, gamma >= 0");
  double sum = gamma == 0.0 ? 1.0 : 0.0;
  const double peak = std::sqrt(gamma / (2.0 * lambda * t));
  for (std::int64_t j = 1;; ++j) {
    const double jj = static_cast<double>(j);
    const double term = 2.0 * std::pow(jj, gamma) * std::exp(-lambda * jj * jj * t);
    sum += term;
    if (jj > peak && term <= 1e-16 * sum) break;
  }
  return sum;
}

// ---------------------------------------------------------------------------

LemmaCheck check_cfl_decay(double c, const std::vector<std::int64_t>& n_list, double tol) {
  LemmaCheck check;
  check.id = "cfl";
  check.params = {{"c", c}, {"n_list", n_list}};
  check.threshold = {{"relative_slack", tol}};
  const double d0 = cfl_delta0(c);
  const double d = cfl_delta(c);
  double worst_first = -std::numeric_limits<double>::infinity();
  double worst_second = -std::numeric_limits<double>::infinity();
  double worst_zero_mode = 0.0;
  for (auto n : n_list) {
    const auto grid = GridConfig::make(n, c);
    const std::int64_t steps = grid.kappa_index(1.0);
    for (std::int64_t j = -n; j <= n - 1; ++j) {
      const double lam = lambda_disc(n, j);
      const double log_g = std::log(std::abs(1.0 + grid.h() * lam));
      const double jj = static_cast<double>(j * j);
      for (std::int64_t k = 0; k <= steps; ++k) {
        const double t = grid.time(k);
        // compare logarithms; -inf on the left (g = 0) always passes
        const double lhs = k == 0 ? 0.0 : static_cast<double>(k) * log_g;
        const double mid = d0 * t * lam;
        const double rhs = -t * d * jj;
        worst_first = std::max(worst_first, lhs - mid);
        worst_second = std::max(worst_second, mid - rhs);
        if (j == 0) worst_zero_mode = std::max({worst_zero_mode, std::abs(lhs), std::abs(mid), std::abs(rhs)});
      }
    }
  }
  // exp(a) <= exp(b) (1 + tol)  <=>  a - b <= log1p(tol)
  const double slack = std::log1p(tol);
  check.measured = {{"delta0", d0},
                    {"delta", d},
                    {"max_log_excess_first", worst_first},
                    {"max_log_excess_second", worst_second},
                    {"zero_mode_deviation", worst_zero_mode}};
  check.pass = worst_first <= slack && worst_second <= slack && worst_zero_mode == 0.0;
  check.narrative = "|1+h lambda_j|^{t/h} <= exp(delta0 t lambda_j) <= exp(-delta t j^2) for all j and grid t <= 1";
  return check;
}

LemmaCheck check_summation_bound(double lambda, double gamma, const std::vector<double>& t_list,
                                 double slope_tol, double compensated_max) {
  LemmaCheck check;
  check.id = "summation";
  const double expected = -(gamma + 1.0) / 2.0;
  check.params = {{"lambda", lambda}, {"gamma", gamma}, {"t_list", t_list}};
  std::vector<double> sums, comp, fit_t, fit_s;
  for (double t : t_list) {
    const double s = summation_sum(lambda, gamma, t);
    sums.push_back(s);
    comp.push_back(s * std::pow(t, -expected));
    // the power law is the small-time regime
    if (lambda * t <= 1.0) {
      fit_t.push_back(t);
      fit_s.push_back(s);
    }
  }
  const double comp_max = comp.empty() ? 0.0 : *std::max_element(comp.begin(), comp.end());
  json exponent = nullptr;
  bool slope_ok = true;
  if (fit_t.size() >= 2) {
    const double e = fitted_slope(fit_t, fit_s);
    exponent = e;
    slope_ok = e >= expected - slope_tol;
  }
  check.measured = {{"sums", sums},
                    {"compensated", comp},
                    {"compensated_max", comp_max},
                    {"fitted_exponent", exponent},
                    {"fit_t", fit_t}};
  check.threshold = {{"exponent_min", expected - slope_tol}, {"compensated_max", compensated_max}};
  check.pass = slope_ok && comp_max <= compensated_max;
  check.narrative = "sum_j |j|^gamma exp(-lambda j^2 t) <= N t^{-(gamma+1)/2}; exponent fitted where lambda t <= 1";
  return check;
}

LemmaCheck check_kernel_distance(double c, const std::vector<std::int64_t>& n_list,
                                 const std::vector<double>& t_list, const VerifierConfig& cfg) {
  LemmaCheck check;
  check.id = "kernel_distance";
  check.params = {{"c", c}, {"n_list", n_list}, {"t_list", t_list}, {"t", cfg.kernel_t},
                  {"fixed_n", cfg.kernel_fixed_n}};
  std::vector<double> at_t;
  std::vector<std::int64_t> ns_used;
  json skipped = json::array();
  json rows = json::array();
  double comp_max = 0.0;
  for (auto n : n_list) {
    const auto grid = GridConfig::make(n, c);
    const SpectralTable table(grid);
    if (cfg.kernel_t >= grid.h()) {
      at_t.push_back(kernel_l2_distance_sq(table, cfg.kernel_t));
      ns_used.push_back(n);
    }
    for (double t : t_list) {
      if (t < grid.h()) {
        skipped.push_back({{"n", n}, {"t", t}});
        continue;
      }
      const double d = kernel_l2_distance_sq(table, t);
      const double comp = d * static_cast<double>(n * n) * std::pow(t, 1.5);
      comp_max = std::max(comp_max, comp);
      rows.push_back({{"n", n}, {"t", t}, {"distance_sq", d}, {"compensated", comp}});
    }
  }
  json slope = nullptr;
  bool slope_ok = true;
  if (ns_used.size() >= 2) {
    const double s = fitted_slope(as_doubles(ns_used), at_t);
    slope = s;
    slope_ok = s <= cfg.kernel_slope_max;
  }
  // two gridpoints must give the same distance
  double x_dev = 0.0;
  {
    const auto grid = GridConfig::make(cfg.kernel_fixed_n, c);
    const SpectralTable table(grid);
    const double t = std::max(cfg.kernel_t, grid.h());
    x_dev = std::abs(kernel_l2_distance_sq_at(table, t, 0.0) -
                     kernel_l2_distance_sq_at(table, t, grid.point(3 % grid.num_space())));
  }
  check.measured = {{"distance_sq_at_t", at_t}, {"n_used", ns_used}, {"slope", slope},
                    {"sweep", rows}, {"compensated_max", comp_max},
                    {"x_independence_deviation", x_dev}, {"skipped", skipped}};
  check.threshold = {{"slope_max", cfg.kernel_slope_max},
                     {"compensated_max", cfg.kernel_compensated_max},
                     {"x_independence_tol", cfg.x_independence_tol}};
  check.pass = slope_ok && comp_max <= cfg.kernel_compensated_max && x_dev <= cfg.x_independence_tol;
  check.narrative = "||p_t - p^n_{kappa(t)}||^2 decays like n^{-2}; distance^2 n^2 t^{3/2} stays bounded";
  return check;
}

LemmaCheck check_q_lemmas(double c, const std::vector<std::int64_t>& n_list,
                          const std::vector<double>& r_list, const VerifierConfig& cfg) {
  LemmaCheck check;
  check.id = "q_lemmas";
  check.params = {{"c", c}, {"n_list", n_list}, {"r_list", r_list}, {"r", cfg.q_r}};
  double small_time_dev = 0.0;
  double lower_const = std::numeric_limits<double>::infinity();
  std::vector<double> diffs;
  std::vector<std::int64_t> ns;
  const double q_ref = q_cont(cfg.q_r);
  for (auto n : n_list) {
    const auto grid = GridConfig::make(n, c);
    const double two_n = static_cast<double>(2 * n);
    for (double r : {0.0, grid.h() / 4.0, grid.h() / 2.0, grid.h()}) {
      small_time_dev = std::max(small_time_dev, std::abs(q_disc(grid, r) - two_n * r));
    }
    for (double r : r_list) {
      if (r < grid.h() || r > 1.0) continue;
      lower_const = std::min(lower_const, q_disc(grid, r) / std::sqrt(r));
    }
    diffs.push_back(std::abs(q_disc(grid, cfg.q_r) - q_ref));
    ns.push_back(n);
  }
  json slope = nullptr;
  bool slope_ok = true;
  if (ns.size() >= 2) {
    const double s = fitted_slope(as_doubles(ns), diffs);
    slope = s;
    slope_ok = s <= cfg.q_slope_max;
  }
  const json lower = std::isfinite(lower_const) ? json(lower_const) : json(nullptr);
  check.measured = {{"small_time_max_deviation", small_time_dev},
                    {"lower_bound_constant", lower},
                    {"q_difference", diffs},
                    {"q_difference_slope", slope}};
  check.threshold = {{"small_time_deviation", 0.0},
                     {"lower_bound_floor", cfg.q_lower_floor},
                     {"slope_max", cfg.q_slope_max}};
  check.pass = small_time_dev == 0.0 && slope_ok &&
               (!std::isfinite(lower_const) || lower_const >= cfg.q_lower_floor);
  check.narrative = "Q^n(r) = 2nr for r <= h; Q^n(r) >= N^{-1} sqrt(r) on [h, 1]; |Q^n - Q| decays in n";
  return check;
}

LemmaCheck check_discrete_hk_bound(double c, const std::vector<std::int64_t>& n_list,
                                   const std::vector<double>& t_list, const VerifierConfig& cfg) {
  LemmaCheck check;
  check.id = "discrete_hk";
  check.params = {{"c", c}, {"n_list", n_list}, {"t_list", t_list}};
  double comp_max = 0.0;
  std::vector<double> per_n_raw;  // without the log factor, for the trend
  std::vector<std::int64_t> ns;
  for (auto n : n_list) {
    const auto grid = GridConfig::make(n, c);
    const SpectralTable table(grid);
    const std::size_t m = grid.num_space();
    const double log_factor = std::sqrt(std::log(static_cast<double>(2 * n)));
    double raw_max = 0.0;
    for (double t : t_list) {
      const double tk = grid.kappa(t);
      if (tk <= 0.0) continue;
      const auto kernel = discrete_kernel_matrix(table, tk);
      // sup_{|f| <= 1} |P f(x) - P f(z)| = (1/2n) sum_y |K(x, y) - K(z, y)|, x = 0 by translation
      for (std::size_t z = 1; z <= m / 2; ++z) {
        double acc = 0.0;
        for (std::size_t y = 0; y < m; ++y) acc += std::abs(kernel[y] - kernel[z * m + y]);
        acc /= static_cast<double>(m);
        const double dist = static_cast<double>(z) / static_cast<double>(m);
        const double raw = acc * std::sqrt(tk) / dist;
        raw_max = std::max(raw_max, raw);
        comp_max = std::max(comp_max, raw / log_factor);
      }
    }
    per_n_raw.push_back(raw_max);
    ns.push_back(n);
  }
  json trend = nullptr;
  if (ns.size() >= 2) trend = fitted_slope(as_doubles(ns), per_n_raw);
  check.measured = {{"compensated_max", comp_max},
                    {"uncompensated_per_n", per_n_raw},
                    {"uncompensated_trend_exponent", trend}};
  check.threshold = {{"compensated_max", cfg.hk_compensated_max}};
  check.pass = comp_max <= cfg.hk_compensated_max;
  check.narrative =
      "|P^n_t f(x) - P^n_t f(z)| <= N sqrt(log 2n) t^{-1/2} |x - z| ||f||_inf; trend recorded, not asserted";
  return check;
}

// ---------------------------------------------------------------------------

bool VerifierReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const LemmaCheck& c) { return c.pass; });
}

const std::vector<std::string>& check_ids() {
  static const std::vector<std::string> ids = {"cfl", "summation", "kernel_distance", "q_lemmas",
                                               "discrete_hk"};
  return ids;
}

VerifierReport run_all(const VerifierConfig& cfg) {
  VerifierReport report;
  for (const auto& id : cfg.only) {
    if (std::find(check_ids().begin(), check_ids().end(), id) == check_ids().end()) {
      throw ConfigError("unknown check id '" + id + "'");
    }
  }
  auto selected = [&](const std::string& id) {
    return cfg.only.empty() || std::find(cfg.only.begin(), cfg.only.end(), id) != cfg.only.end();
  };
  auto guarded = [&](const std::string& id, json params, auto&& body) {
    try {
      report.checks.push_back(body());
    } catch (const std::exception& e) {
      LemmaCheck failed;
      failed.id = id;
      failed.params = std::move(params);
      failed.measured = json::object();
      failed.threshold = json::object();
      failed.pass = false;
      failed.narrative = e.what();
      report.checks.push_back(std::move(failed));
    }
  };
  auto skip = [&](const std::string& id) { report.warnings.push_back(id + ": empty sweep, skipped"); };
  const double lambda = cfg.summation_lambda > 0.0 ? cfg.summation_lambda : 4.0 * kPi * kPi;

  if (selected("cfl")) {
    if (cfg.cfl_c_list.empty() || cfg.n_list.empty()) {
      skip("cfl");
    } else {
      for (double c : cfg.cfl_c_list) {
        guarded("cfl", {{"c", c}}, [&] { return check_cfl_decay(c, cfg.n_list); });
      }
    }
  }
  if (selected("summation")) {
    if (cfg.summation_gammas.empty() || cfg.summation_t_list.empty()) {
      skip("summation");
    } else {
      for (double g : cfg.summation_gammas) {
        guarded("summation", {{"gamma", g}}, [&] {
          return check_summation_bound(lambda, g, cfg.summation_t_list,
                                       cfg.slope_tolerance_deterministic,
                                       cfg.summation_compensated_max);
        });
      }
    }
  }
  if (selected("kernel_distance")) {
    if (cfg.n_list.empty()) {
      skip("kernel_distance");
    } else {
      guarded("kernel_distance", {{"c", cfg.c}},
              [&] { return check_kernel_distance(cfg.c, cfg.n_list, cfg.kernel_t_list, cfg); });
    }
  }
  if (selected("q_lemmas")) {
    if (cfg.n_list.empty()) {
      skip("q_lemmas");
    } else {
      guarded("q_lemmas", {{"c", cfg.c}},
              [&] { return check_q_lemmas(cfg.c, cfg.n_list, cfg.q_r_list, cfg); });
    }
  }
  if (selected("discrete_hk")) {
    if (cfg.n_list.empty() || cfg.hk_t_list.empty()) {
      skip("discrete_hk");
    } else {
      guarded("discrete_hk", {{"c", cfg.c}},
              [&] { return check_discrete_hk_bound(cfg.c, cfg.n_list, cfg.hk_t_list, cfg); });
    }
  }
  return report;
}

json to_json(const VerifierReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"id", c.id},
                      {"params", c.params},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"pass", c.pass},
                      {"narrative", c.narrative}});
  }
  return {{"schema_version", kVerifierSchemaVersion},
          {"checks", checks},
          {"warnings", report.warnings},
          {"pass", report.all_pass()}};
}

// ---------------------------------------------------------------------------

#define FDSPDE_VERIFIER_FIELDS(X)                                                            \
  X(c) X(cfl_c_list) X(n_list) X(summation_lambda) X(summation_gammas) X(summation_t_list)    \
  X(kernel_t) X(kernel_fixed_n) X(kernel_t_list) X(q_r) X(q_r_list) X(hk_t_list)              \
  X(slope_tolerance_deterministic) X(slope_tolerance_quadrature) X(slope_tolerance_monte_carlo) \
  X(kernel_slope_max) X(kernel_compensated_max) X(summation_compensated_max) X(q_slope_max)   \
  X(q_lower_floor) X(hk_compensated_max) X(x_independence_tol) X(only)

json to_json(const VerifierConfig& cfg) {
  json j = json::object();
#define X(name) j[#name] = cfg.name;
  FDSPDE_VERIFIER_FIELDS(X)
#undef X
  return j;
}

VerifierConfig verifier_config_from_json(const json& j, VerifierConfig base) {
  if (!j.is_object()) throw ConfigError("verifier config must be a JSON object");
  std::set<std::string> known;
#define X(name) known.insert(#name);
  FDSPDE_VERIFIER_FIELDS(X)
#undef X
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown verifier key '" + key + "'");
  }
  try {
#define X(name) \
  if (j.contains(#name)) j.at(#name).get_to(base.name);
    FDSPDE_VERIFIER_FIELDS(X)
#undef X
  } catch (const json::exception& e) {
    throw ConfigError(std::string("verifier config: ") + e.what());
  }
  return base;
}

}  // namespace fdspde
