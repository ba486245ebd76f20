#include "fdspde/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdspde/errors.hpp"

namespace fdspde {

namespace {

constexpr int kWeierstrassTerms = 24;

double sign_convention(double u) { return u > 0.0 ? 1.0 : -1.0; }

double window_indicator(double u) { return (u >= 0.0 && u <= 1.0) ? 1.0 : 0.0; }

void require_width(const GridConfig& grid, std::size_t size, const char* what) {
  if (size != grid.num_space()) {
    throw DimensionError(std::string(what) + " has " + std::to_string(size) +
                         " values, grid expects " + std::to_string(grid.num_space()));
  }
}

TrigSeries weierstrass_series(double alpha) {
  TrigSeries s;
  for (int m = 0; m < kWeierstrassTerms; ++m) {
    s.terms.push_back({std::int64_t{1} << m, std::pow(2.0, -alpha * m), 0.0});
  }
  return s;
}

}  // namespace

const std::vector<DriftSpec>& builtin_drifts() {
  static const std::vector<DriftSpec> drifts = {
      {"zero", [](double) { return 0.0; }, 0.0},
      {"smooth", [](double u) { return std::sin(u); }, 1.0},
      {"sign", sign_convention, 1.0},
      {"window", window_indicator, 1.0},
  };
  return drifts;
}

const DriftSpec& find_drift(const std::string& name) {
  const auto& all = builtin_drifts();
  // "sin" is accepted as an alias of the Lipschitz baseline.
  const std::string key = name == "sin" ? "smooth" : name;
  auto it = std::find_if(all.begin(), all.end(), [&](const DriftSpec& d) { return d.name == key; });
  if (it == all.end()) throw ConfigError("unknown drift '" + name + "'");
  return *it;
}

DriftSpec constant_drift(double value) {
  return {"constant", [value](double) { return value; }, std::abs(value)};
}

DriftSpec shifted_drift(const DriftSpec& base, double shift) {
  auto f = base.eval;
  return {base.name + "+shift", [f, shift](double u) { return f(u) + shift; },
          base.bound + std::abs(shift)};
}

FieldState InitialCondition::sample(const GridConfig& grid) const {
  FieldState out(grid.num_space());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(grid.point(static_cast<std::int64_t>(i)));
  return out;
}

const std::vector<InitialCondition>& builtin_initial_conditions() {
  static const std::vector<InitialCondition> all = [] {
    std::vector<InitialCondition> v;
    v.push_back({"zero", [](double) { return 0.0; }, 1.0, TrigSeries{}});
    v.push_back({"constant", [](double) { return 1.0; }, 1.0, TrigSeries{{{0, 1.0, 0.0}}}});
    const TrigSeries sine{{{1, 0.0, 1.0}}};
    v.push_back({"sine", [sine](double x) { return sine(x); }, 1.0, sine});
    const TrigSeries w = weierstrass_series(0.5);
    v.push_back({"weierstrass", [w](double x) { return w(x); }, 0.5, w});
    return v;
  }();
  return all;
}

const InitialCondition& find_initial_condition(const std::string& name) {
  const auto& all = builtin_initial_conditions();
  const std::string key = name == "sin" ? "sine" : name;
  auto it = std::find_if(all.begin(), all.end(),
                         [&](const InitialCondition& ic) { return ic.name == key; });
  if (it == all.end()) throw ConfigError("unknown initial condition '" + name + "'");
  return *it;
}

double discrete_holder_seminorm(std::span<const double> f, double alpha) {
  const std::size_t m = f.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = i + 1; k < m; ++k) {
      const std::size_t gap = std::min(k - i, m - (k - i));
      const double d = static_cast<double>(gap) / static_cast<double>(m);
      worst = std::max(worst, std::abs(f[i] - f[k]) / std::pow(d, alpha));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Recursion

void step_into(const GridConfig& grid, std::span<const double> state, const DriftSpec& drift,
               std::span<const double> eta_slice, std::span<double> out) {
  require_width(grid, state.size(), "state");
  require_width(grid, eta_slice.size(), "noise slice");
  require_width(grid, out.size(), "output");
  const std::size_t m = state.size();
  const double h = grid.h();
  const double inv_dx2 = static_cast<double>(m) * static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double u = state[i];
    const double left = state[i == 0 ? m - 1 : i - 1];
    const double right = state[i + 1 == m ? 0 : i + 1];
    const double lap = inv_dx2 * (right - 2.0 * u + left);
    out[i] = u + h * lap + h * drift(u) + h * eta_slice[i];
  }
}

FieldState step(const GridConfig& grid, std::span<const double> state, const DriftSpec& drift,
                std::span<const double> eta_slice) {
  FieldState out(state.size());
  step_into(grid, state, drift, eta_slice, out);
  return out;
}

void integrate(const GridConfig& grid, const DriftSpec& drift, std::span<const double> initial,
               const NoiseSource& noise, std::size_t steps, const StepObserver& observer) {
  require_width(grid, initial.size(), "initial condition");
  if (!(noise.grid() == grid)) {
    throw DimensionError("noise lives on n=" + std::to_string(noise.grid().n()) +
                         ", scheme on n=" + std::to_string(grid.n()));
  }
  if (steps > noise.steps()) {
    throw NoiseExhausted("requested " + std::to_string(steps) + " steps but noise covers " +
                         std::to_string(noise.steps()));
  }
  const std::size_t m = grid.num_space();
  const double eta_scale = static_cast<double>(m) / grid.h();
  FieldState current(initial.begin(), initial.end());
  FieldState next(m);
  FieldState slab(m);
  if (observer) observer(0, current);
  for (std::size_t k = 0; k < steps; ++k) {
    noise.slab(k, slab);
    for (double& v : slab) v *= eta_scale;
    step_into(grid, current, drift, slab, next);
    current.swap(next);
    if (observer) observer(k + 1, current);
  }
}

const FieldState& SchemeRun::at(double t) const {
  const auto it = snapshots.find(grid.step_of(t));
  if (it == snapshots.end()) throw GridError("no snapshot recorded at t = " + std::to_string(t));
  return it->second;
}

SchemeRun run(const GridConfig& grid, const DriftSpec& drift, std::span<const double> initial,
              const NoiseSource& noise, double horizon, std::span<const double> snapshot_times) {
  const auto steps = static_cast<std::size_t>(grid.step_of(horizon));
  std::vector<std::int64_t> wanted;
  for (double t : snapshot_times) {
    const std::int64_t k = grid.step_of(t);
    if (static_cast<std::size_t>(k) > steps) {
      throw GridError("snapshot time " + std::to_string(t) + " beyond horizon");
    }
    wanted.push_back(k);
  }
  SchemeRun result{grid, drift.name, FieldState(initial.begin(), initial.end()), horizon, {}};
  integrate(grid, drift, initial, noise, steps, [&](std::size_t k, std::span<const double> u) {
    if (std::find(wanted.begin(), wanted.end(), static_cast<std::int64_t>(k)) != wanted.end()) {
      result.snapshots.emplace(static_cast<std::int64_t>(k), FieldState(u.begin(), u.end()));
    }
  });
  return result;
}

std::vector<FieldState> trajectory(const GridConfig& grid, const DriftSpec& drift,
                                   std::span<const double> initial, const NoiseSource& noise,
                                   std::size_t steps) {
  std::vector<FieldState> states;
  states.reserve(steps + 1);
  integrate(grid, drift, initial, noise, steps, [&](std::size_t, std::span<const double> u) {
    states.emplace_back(u.begin(), u.end());
  });
  return states;
}

double mild_eval(const SpectralTable& table, const DriftSpec& drift,
                 std::span<const double> initial, const NoiseSource& noise, double t, double x) {
  const GridConfig& grid = table.grid();
  const auto steps = static_cast<std::size_t>(grid.step_of(t));
  const double scaled = x * static_cast<double>(grid.num_space());
  if (std::abs(scaled - std::round(scaled)) > 1e-9) {
    throw GridError("mild_eval: x = " + std::to_string(x) + " is not a gridpoint");
  }
  const std::size_t m = grid.num_space();
  const double cell = grid.spacing();
  const auto states = trajectory(grid, drift, initial, noise, steps);

  // kernel rows p^n_{lh}(x, y_i) for l = 0..steps
  std::vector<std::vector<double>> rows(steps + 1, std::vector<double>(m));
  for (std::size_t l = 0; l <= steps; ++l) {
    for (std::size_t i = 0; i < m; ++i) {
      rows[l][i] = discrete_heat_kernel(table, grid.time(static_cast<std::int64_t>(l)), x,
                                        grid.point(static_cast<std::int64_t>(i)));
    }
  }

  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i) value += rows[steps][i] * initial[i] * cell;

  std::vector<double> slab(m);
  for (std::size_t l = 0; l < steps; ++l) {
    // s in [lh, (l+1)h): kappa(s) = lh and kappa(t - s) = (steps - l - 1) h
    const auto& kernel = rows[steps - l - 1];
    noise.slab(l, slab);
    double drift_part = 0.0;
    double noise_part = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      drift_part += kernel[i] * drift(states[l][i]) * cell;
      noise_part += kernel[i] * slab[i];
    }
    value += grid.h() * drift_part + noise_part;
  }
  return value;
}

}  // namespace fdspde
