#include "fdspde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdspde/errors.hpp"

namespace fdspde {

namespace {
constexpr double kGridGuard = 1e-12;
constexpr double kOnGridTol = 1e-9;
}  // namespace

GridConfig::GridConfig(std::int64_t n, double c)
    : n_(n), c_(c), h_(c / static_cast<double>((2 * n) * (2 * n))) {}

GridConfig GridConfig::make(std::int64_t n, double c) {
  if (n <= 0) {
    throw GridError("grid size n must be positive, got " + std::to_string(n));
  }
  if (!(c > 0.0 && c < 0.5)) {
    throw CflViolation("CFL violation: c must lie in (0, 1/2), got " +
                       std::to_string(c));
  }
  return GridConfig(n, c);
}

double GridConfig::point(std::int64_t i) const {
  return static_cast<double>(wrap(i)) / static_cast<double>(2 * n_);
}

std::int64_t GridConfig::wrap(std::int64_t i) const {
  const std::int64_t m = 2 * n_;
  const std::int64_t r = i % m;
  return r < 0 ? r + m : r;
}

std::int64_t GridConfig::kappa_index(double t) const {
  if (t < 0.0) throw GridError("kappa: negative time");
  return static_cast<std::int64_t>(std::floor(t / h_ + kGridGuard));
}

double GridConfig::kappa(double t) const { return time(kappa_index(t)); }

std::int64_t GridConfig::rho_index(double x) const {
  const double scaled = x * static_cast<double>(2 * n_);
  return wrap(static_cast<std::int64_t>(std::floor(scaled + kGridGuard)));
}

double GridConfig::rho(double x) const { return point(rho_index(x)); }

bool GridConfig::on_time_grid(double t) const {
  if (t < 0.0) return false;
  const double steps = t / h_;
  return std::abs(steps - std::round(steps)) <= kOnGridTol * std::max(1.0, steps);
}

std::int64_t GridConfig::step_of(double t) const {
  if (!on_time_grid(t)) {
    throw GridError("time " + std::to_string(t) + " is not a multiple of h = " +
                    std::to_string(h_));
  }
  return static_cast<std::int64_t>(std::llround(t / h_));
}

bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

LevelPair make_level_pair(const GridConfig& coarse, const GridConfig& fine) {
  if (coarse.c() != fine.c()) {
    throw NestingError("level pair: CFL constants differ (" +
                       std::to_string(coarse.c()) + " vs " +
                       std::to_string(fine.c()) + ")");
  }
  if (fine.n() % coarse.n() != 0 || !is_power_of_two(fine.n() / coarse.n())) {
    throw NestingError("level pair: n=" + std::to_string(fine.n()) +
                       " is not a dyadic refinement of n=" +
                       std::to_string(coarse.n()));
  }
  const std::int64_t r = fine.n() / coarse.n();
  return LevelPair{coarse, fine, r, r * r};
}

}  // namespace fdspde
