#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fdspde/grid.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/spectral.hpp"

namespace fdspde {

/// Q(t) = int_0^t ||p_r||^2 dr, the pointwise variance of the continuum OU process.
double q_cont(double t);

/// Q^n(t) = int_0^t sum_j |1 + h lambda_j|^{2 kappa(r)/h} dr, evaluated exactly.
double q_disc(const GridConfig& grid, double t);

/// t -> Q(t) or t -> Q^n(t).
class VarianceCurve {
 public:
  static VarianceCurve continuum();
  static VarianceCurve discrete(const GridConfig& grid);

  bool is_discrete() const { return grid_.has_value(); }
  const std::optional<GridConfig>& grid() const { return grid_; }
  double operator()(double t) const;

 private:
  std::optional<GridConfig> grid_;
};

/// O^n_0, O^n_h, ..., O^n_{t_end}: the scheme with zero drift and zero data.
std::vector<FieldState> simulate_ou_disc(const GridConfig& grid, const NoiseSource& noise,
                                         double t_end);

/// The F_s-measurable part P^n_{t-s} O^n_s of O^n_t. Grid times only.
FieldState ou_hat(const SpectralTable& table, std::span<const double> state_at_s, double s,
                  double t);

/// E|O_t(x) - O^n_t(x)|^2 for grid times t, computed mode by mode.
double ou_coupling_error_sq(const GridConfig& grid, double t);

/// Samples O_t(x) for the continuum OU jointly with the noise cells of one grid.
///
/// The cell integrals determine the conditional mean of O_t(x) linearly; the
/// remaining, independent part is a centred Gaussian with variance Q(t) minus
/// the explained variance, drawn from the auxiliary stream.
class ExactOuSampler {
 public:
  /// t must be a grid time, x_index a gridpoint.
  ExactOuSampler(const GridConfig& grid, double t, std::int64_t x_index);

  const GridConfig& grid() const { return grid_; }
  double residual_variance() const { return residual_variance_; }
  /// Weight of cell (l, i), l < t/h.
  double weight(std::size_t l, std::size_t i) const;
  double explained_variance() const;

  double sample(const NoiseSource& noise, const NoiseKey& key) const;
  /// Conditional mean only (without the independent residual).
  double conditional_mean(const NoiseSource& noise) const;

 private:
  GridConfig grid_;
  std::size_t steps_;
  std::int64_t x_index_;
  std::vector<double> weights_;  // by (l, offset) with offset = i - x_index mod 2n
  double residual_variance_;
};

/// E g(z + sqrt(v) Z) for Z standard normal; g(z) when v = 0.
double gauss_smooth(const std::function<double(double)>& g, double variance, double z);

}  // namespace fdspde
