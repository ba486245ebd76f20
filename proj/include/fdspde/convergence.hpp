#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fdspde/grid.hpp"

namespace fdspde {

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentPlan {
  double c = 0.25;
  std::vector<std::int64_t> levels{4, 8, 16, 32};
  std::int64_t reference_n = 64;
  double horizon = 0.25;
  double p = 2.0;
  std::size_t samples = 200;
  std::uint64_t seed = 20240601;
  std::string drift = "sign";
  std::string initial = "sine";
  /// 0 means hardware concurrency.
  std::size_t workers = 0;

  /// Throws ConfigError (or a GridError subclass) when the plan is inconsistent.
  void validate() const;

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

/// One sample's contribution for one level.
struct LevelSample {
  double sup_pow = 0.0;          // max over coarse gridpoints of |u_ref - u_n|^p
  std::int64_t argmax_step = 0;  // coarse step index of that maximum
  std::int64_t argmax_index = 0; // coarse spatial index
  std::vector<double> pointwise_pow;  // |u_ref - u_n|^p at every coarse (k, i), k-major
};

/// Runs the reference level and every plan level on one noise realisation.
std::vector<LevelSample> coupled_sample_error(const ExperimentPlan& plan,
                                              std::uint64_t sample_index);

struct LevelEstimate {
  std::int64_t n = 0;
  double error = 0.0;   // (mean sup |.|^p)^{1/p}
  double stderr_ = 0.0; // delta method
  double sup_argmax_t = 0.0;  // gridpoint with the largest mean |.|^p
  double sup_argmax_x = 0.0;
  double pointwise_sup_error = 0.0;  // sup over gridpoints of (mean |.|^p)^{1/p}

  friend bool operator==(const LevelEstimate&, const LevelEstimate&) = default;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;

  friend bool operator==(const LinearFit&, const LinearFit&) = default;
};

/// Ordinary least squares of y on x; needs at least two points.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct RateReport {
  int schema_version = kReportSchemaVersion;
  std::string kind = "strong";  // "strong" or "deterministic"
  ExperimentPlan plan;
  std::vector<LevelEstimate> per_level;
  std::optional<double> slope;      // headline fit
  std::optional<double> intercept;
  std::vector<double> residuals;
  std::optional<double> slope_all_levels;  // fit including every positive-error level
  std::vector<std::int64_t> excluded_levels;
  bool degenerate = false;  // fewer than two levels with positive error
  double reference_slope = -0.5;
  double runtime_seconds = 0.0;
  std::string build_id;

  friend bool operator==(const RateReport&, const RateReport&) = default;
};

/// Fits log error against log n and fills slope/intercept/residuals/excluded_levels.
void fit_rates(RateReport& report);

/// Monte Carlo strong-error estimate. Samples are grouped in fixed blocks that
/// are reduced in index order, so the result does not depend on plan.workers.
RateReport estimate_rates(const ExperimentPlan& plan);

/// sup over gridpoints of |P^n_t psi - P_t psi| for each level.
RateReport deterministic_rate_experiment(const std::string& initial,
                                         const std::vector<std::int64_t>& levels, double t,
                                         double c = 0.25);

void persist_report(const RateReport& report, const std::filesystem::path& path);
RateReport load_report(const std::filesystem::path& path);
/// "n,error,stderr" rows.
void write_rate_csv(const RateReport& report, const std::filesystem::path& path);

std::string build_id();

}  // namespace fdspde
