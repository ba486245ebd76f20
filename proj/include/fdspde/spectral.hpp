#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "fdspde/grid.hpp"

namespace fdspde {

/// A real function sampled on the spatial grid, index i <-> x = i/(2n).
using FieldState = std::vector<double>;

/// Eigenvalue -4 pi^2 k^2 of the Laplacian on the torus for e_k(x) = exp(i 2 pi k x).
double lambda_cont(std::int64_t k);

/// Eigenvalue -16 n^2 sin^2(j pi / 2n) of the periodic second difference.
/// Only -n <= j <= n-1 is accepted.
double lambda_disc(std::int64_t n, std::int64_t j);

/// Damping exponent for the CFL bound |1 + h lambda|^{t/h} <= exp(delta0 t lambda).
double cfl_delta0(double c);
inline double cfl_delta(double c) { return 16.0 * cfl_delta0(c); }

/// Precomputed discrete spectrum of one grid. Immutable once built.
class SpectralTable {
 public:
  explicit SpectralTable(const GridConfig& grid);

  const GridConfig& grid() const { return grid_; }
  std::int64_t n() const { return grid_.n(); }

  double lambda_cont(std::int64_t j) const;
  double lambda_disc(std::int64_t j) const;
  /// lambda_disc / lambda_cont, with gamma_0 = 1.
  double gamma(std::int64_t j) const;
  /// Per-step amplification factor 1 + h lambda_disc.
  double one_plus_h_lambda(std::int64_t j) const;

  /// (1 + h lambda_j)^k.
  double mu_at_step(std::int64_t j, std::int64_t k) const;
  /// Temporal coefficient of the discrete kernel: exact at grid times,
  /// linear in between.
  double mu(std::int64_t j, double t) const;

 private:
  std::size_t slot(std::int64_t j) const;

  GridConfig grid_;
  std::vector<double> lambda_cont_;
  std::vector<double> lambda_disc_;
  std::vector<double> gamma_;
  std::vector<double> amplification_;
};

double mu_coeff(const GridConfig& grid, std::int64_t j, double t);

/// e_j at gridpoints, complex-linear interpolation in between.
std::complex<double> basis_eval(std::int64_t n, std::int64_t j, double x);

/// Discrete heat kernel p^n_t(x, y) = sum_j mu_j(t) e^n_j(x) conj(e_j(rho(y))).
double discrete_heat_kernel(const SpectralTable& table, double t, double x, double y);

/// Discrete semigroup on grid functions through the size-2n Fourier transform.
FieldState apply_semigroup_disc(const SpectralTable& table, std::span<const double> f, double t);

/// Law of the lazy walk with steps {-1: c, 0: 1-2c, +1: c} after `steps`
/// steps, folded onto Z/2nZ.
std::vector<double> random_walk_law(const GridConfig& grid, std::int64_t steps);

/// Same operator as apply_semigroup_disc, evaluated as an exact expectation
/// over the walk law. t must be a grid time.
FieldState random_walk_semigroup(const GridConfig& grid, std::span<const double> f, double t);

FieldState discrete_laplacian(const GridConfig& grid, std::span<const double> f);

/// Periodic heat kernel p_t(x) = sum_k exp(-4 pi^2 k^2 t) e_k(x). Below
/// t = 1e-3 the Gaussian image sum is used instead of the Fourier series.
double heat_kernel_cont(double t, double x, double tol = 1e-16);

struct TrigTerm {
  std::int64_t k;
  double cos_coeff;
  double sin_coeff;
};

/// Finite real Fourier series sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x).
struct TrigSeries {
  std::vector<TrigTerm> terms;

  double operator()(double x) const;
  std::vector<double> sample(const GridConfig& grid) const;
};

/// Continuum heat semigroup, exact on trigonometric polynomials.
TrigSeries apply_semigroup_cont(const TrigSeries& f, double t);

/// Continuum heat semigroup applied to the trigonometric interpolant of
/// uniform samples. Modes damped below `tol` are dropped; t = 0 is the identity.
std::vector<double> apply_semigroup_cont(std::span<const double> samples, double t,
                                         double tol = 1e-16);

/// ||p_t(x - .) - p^n_{kappa(t)}(x, .)||^2 in L2(T), evaluated mode by mode.
/// Requires t >= h. Independent of x for gridpoints x.
double kernel_l2_distance_sq(const SpectralTable& table, double t);
double kernel_l2_distance_sq_at(const SpectralTable& table, double t, double x);

/// max over gridpoint pairs of |(p_t *_n p_s(., y))(x) - p_{t+s}(x, y)|.
double semigroup_compose_check(const SpectralTable& table, double s, double t);

/// Dense matrix p^n_t(x_i, x_k) on gridpoints, row-major.
std::vector<double> discrete_kernel_matrix(const SpectralTable& table, double t);

}  // namespace fdspde
