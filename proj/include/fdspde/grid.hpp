#pragma once

#include <cstddef>
#include <cstdint>

namespace fdspde {

/// Space-time mesh of the scheme on the torus.
///
/// The spatial grid has 2n equispaced points k/(2n), k = 0..2n-1, with
/// periodic index arithmetic. The temporal grid is hZ_{>=0} with
/// h = c (2n)^{-2}, so the explicit step is stable exactly when c < 1/2.
///
/// Points are addressed by integer index everywhere inside the library;
/// real coordinates only appear at the API boundary (point(), time()).
class GridConfig {
 public:
  /// Throws CflViolation unless 0 < c < 1/2 and GridError if n == 0.
  static GridConfig make(std::int64_t n, double c);

  std::int64_t n() const { return n_; }
  double c() const { return c_; }
  double h() const { return h_; }
  std::size_t num_space() const { return static_cast<std::size_t>(2 * n_); }
  double spacing() const { return 1.0 / static_cast<double>(2 * n_); }

  double point(std::int64_t i) const;
  double time(std::int64_t k) const { return static_cast<double>(k) * h_; }

  /// Periodic reduction of an arbitrary index into [0, 2n).
  std::int64_t wrap(std::int64_t i) const;

  /// floor(t/h) with a 1e-12 guard so intended grid times land on their step.
  std::int64_t kappa_index(double t) const;
  /// Largest grid time not exceeding t.
  double kappa(double t) const;

  std::int64_t rho_index(double x) const;
  /// Leftmost spatial gridpoint at or below x.
  double rho(double x) const;

  /// Step index of a time that must lie on the grid; throws GridError otherwise.
  std::int64_t step_of(double t) const;
  bool on_time_grid(double t) const;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;

 private:
  GridConfig(std::int64_t n, double c);

  std::int64_t n_;
  double c_;
  double h_;
};

/// Two levels of a dyadic hierarchy sharing the same CFL constant.
struct LevelPair {
  GridConfig coarse;
  GridConfig fine;
  std::int64_t spatial_ratio;   // fine.n / coarse.n
  std::int64_t temporal_ratio;  // coarse.h / fine.h == spatial_ratio^2
};

/// Throws NestingError for mismatched c or a non power-of-two ratio.
LevelPair make_level_pair(const GridConfig& coarse, const GridConfig& fine);

bool is_power_of_two(std::int64_t v);

}  // namespace fdspde
