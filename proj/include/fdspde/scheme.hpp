#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdspde/grid.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/spectral.hpp"

namespace fdspde {

/// A bounded measurable reaction term b.
struct DriftSpec {
  std::string name;
  std::function<double(double)> eval;
  double bound = 0.0;  // sup |b|

  double operator()(double u) const { return eval(u); }
};

/// Registry: zero, smooth (sin u), sign (sign(0) = -1), window (1 on [0, 1]).
const std::vector<DriftSpec>& builtin_drifts();
/// Throws ConfigError for unknown names.
const DriftSpec& find_drift(const std::string& name);
DriftSpec constant_drift(double value);
/// b + shift, with the bound adjusted.
DriftSpec shifted_drift(const DriftSpec& base, double shift);

/// Deterministic initial datum psi with a claimed Holder exponent. When the
/// datum is a finite trigonometric sum the series is kept so the continuum
/// semigroup can be applied exactly.
struct InitialCondition {
  std::string name;
  std::function<double(double)> eval;
  double holder_alpha = 1.0;
  std::optional<TrigSeries> series;

  /// psi restricted to the spatial grid.
  FieldState sample(const GridConfig& grid) const;
};

/// Registry: zero, constant, sine (sin 2 pi x), weierstrass (alpha = 1/2).
const std::vector<InitialCondition>& builtin_initial_conditions();
const InitialCondition& find_initial_condition(const std::string& name);

/// Discrete C^alpha seminorm max |f(x) - f(y)| / d(x, y)^alpha over grid pairs,
/// with the periodic distance.
double discrete_holder_seminorm(std::span<const double> f, double alpha);

/// One forward-Euler update u + h Lap_n u + h b(u) + h eta, written into `out`.
void step_into(const GridConfig& grid, std::span<const double> state, const DriftSpec& drift,
               std::span<const double> eta_slice, std::span<double> out);
FieldState step(const GridConfig& grid, std::span<const double> state, const DriftSpec& drift,
                std::span<const double> eta_slice);

/// Called with (step index, state) for k = 0..steps, in order.
using StepObserver = std::function<void(std::size_t, std::span<const double>)>;

/// Advances the recursion `steps` times from `initial`, reading noise slabs
/// from `noise` (which must live on the same grid).
void integrate(const GridConfig& grid, const DriftSpec& drift, std::span<const double> initial,
               const NoiseSource& noise, std::size_t steps, const StepObserver& observer);

struct SchemeRun {
  GridConfig grid;
  std::string drift;
  FieldState initial;
  double horizon = 0.0;
  std::map<std::int64_t, FieldState> snapshots;  // keyed by step index

  const FieldState& at(double t) const;
};

/// Runs up to `horizon` and records the requested grid times.
SchemeRun run(const GridConfig& grid, const DriftSpec& drift, std::span<const double> initial,
              const NoiseSource& noise, double horizon, std::span<const double> snapshot_times);

/// Every state u_0 .. u_steps.
std::vector<FieldState> trajectory(const GridConfig& grid, const DriftSpec& drift,
                                   std::span<const double> initial, const NoiseSource& noise,
                                   std::size_t steps);

/// Evaluates u^n_t(x) through its Duhamel representation with the discrete
/// kernel: P_t psi + sum of kernel-propagated drift steps + kernel-weighted
/// noise cells. Quadratic in the step count; intended for small grids.
double mild_eval(const SpectralTable& table, const DriftSpec& drift,
                 std::span<const double> initial, const NoiseSource& noise, double t, double x);

}  // namespace fdspde
