#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace fdspde {

inline constexpr int kVerifierSchemaVersion = 1;

struct LemmaCheck {
  std::string id;
  nlohmann::json params;
  nlohmann::json measured;
  nlohmann::json threshold;
  bool pass = false;
  std::string narrative;
};

/// 2^lo, 2^(lo+1), ..., 2^hi.
std::vector<double> dyadic_times(int lo, int hi);

/// Sweeps and tolerances for run_all. Every field maps to a JSON key of the
/// same name.
struct VerifierConfig {
  double c = 0.25;
  std::vector<double> cfl_c_list{0.25, 0.49};
  std::vector<std::int64_t> n_list{8, 16, 32, 64};

  double summation_lambda = 0.0;  // 0 selects 4 pi^2
  std::vector<double> summation_gammas{0.0, 1.0};
  std::vector<double> summation_t_list = dyadic_times(-12, -2);

  double kernel_t = 0.1;
  std::int64_t kernel_fixed_n = 16;
  std::vector<double> kernel_t_list{0.05, 0.1, 0.2, 0.4};

  double q_r = 0.25;
  std::vector<double> q_r_list = dyadic_times(-12, 0);

  std::vector<double> hk_t_list{0.01, 0.05, 0.1, 0.4};

  // tolerances
  double slope_tolerance_deterministic = 0.05;
  double slope_tolerance_quadrature = 0.15;
  double slope_tolerance_monte_carlo = 0.2;
  double kernel_slope_max = -1.5;
  double kernel_compensated_max = 0.01;
  double summation_compensated_max = 1.0;
  double q_slope_max = -0.45;
  double q_lower_floor = 0.1;
  double hk_compensated_max = 1.0;
  double x_independence_tol = 1e-10;

  std::vector<std::string> only;  // empty runs every check
};

nlohmann::json to_json(const VerifierConfig& cfg);
/// Unknown keys are rejected with ConfigError; missing keys keep `base` values.
VerifierConfig verifier_config_from_json(const nlohmann::json& j, VerifierConfig base = {});

/// Sum over j in Z of |j|^gamma exp(-lambda j^2 t), tail below 1e-16 relative.
double summation_sum(double lambda, double gamma, double t);

LemmaCheck check_cfl_decay(double c, const std::vector<std::int64_t>& n_list,
                           double tol = 1e-12);
LemmaCheck check_summation_bound(double lambda, double gamma, const std::vector<double>& t_list,
                                 double slope_tol = 0.05, double compensated_max = 2.0);
LemmaCheck check_kernel_distance(double c, const std::vector<std::int64_t>& n_list,
                                 const std::vector<double>& t_list, const VerifierConfig& cfg);
LemmaCheck check_q_lemmas(double c, const std::vector<std::int64_t>& n_list,
                          const std::vector<double>& r_list, const VerifierConfig& cfg);
/// |P^n_t f(x) - P^n_t f(z)| against sqrt(log 2n) t^{-1/2} |x - z| ||f||_inf.
LemmaCheck check_discrete_hk_bound(double c, const std::vector<std::int64_t>& n_list,
                                   const std::vector<double>& t_list, const VerifierConfig& cfg);

struct VerifierReport {
  std::vector<LemmaCheck> checks;
  std::vector<std::string> warnings;

  bool all_pass() const;
};

/// Ids in execution order: cfl, summation, kernel_distance, q_lemmas, discrete_hk.
const std::vector<std::string>& check_ids();

/// Runs every selected check; exceptions become failed checks.
VerifierReport run_all(const VerifierConfig& cfg);

nlohmann::json to_json(const VerifierReport& report);

}  // namespace fdspde
