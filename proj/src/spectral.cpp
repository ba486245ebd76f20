#include "fdspde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fdspde/errors.hpp"

namespace fdspde {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kImagTolerance = 1e-12;
// Below this time the Gaussian image sum converges faster than the Fourier series.
constexpr double kImageCrossover = 1e-3;
constexpr int kImageCount = 6;

void require_mode(std::int64_t n, std::int64_t j) {
  if (j < -n || j > n - 1) {
    throw DimensionError("mode index " + std::to_string(j) + " outside [-" +
                         std::to_string(n) + ", " + std::to_string(n - 1) + "]");
  }
}

void require_size(const GridConfig& grid, std::size_t size) {
  if (size != grid.num_space()) {
    throw DimensionError("field has " + std::to_string(size) +
                         " values, grid expects " + std::to_string(grid.num_space()));
  }
}

/// exp(i 2 pi m / M) for m = 0..M-1; exact index arithmetic keeps e_j(x_i)
/// free of argument-reduction error.
std::vector<cplx> unit_roots(std::size_t m) {
  std::vector<cplx> roots(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(m);
    roots[k] = {std::cos(angle), std::sin(angle)};
  }
  return roots;
}

std::size_t mod_index(std::int64_t v, std::int64_t m) {
  const std::int64_t r = v % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

double checked_real(cplx z, double scale) {
  if (std::abs(z.imag()) > kImagTolerance * std::max(1.0, scale)) {
    throw Error("imaginary residue " + std::to_string(z.imag()) +
                " exceeds tolerance in a real-valued kernel evaluation");
  }
  return z.real();
}

/// (1 - exp(-i theta)) / (i theta), the cell average of exp(-i 2 pi k y) times 2n.
cplx cell_average_factor(std::int64_t k, std::int64_t n) {
  if (k == 0) return {1.0, 0.0};
  const double theta = kPi * static_cast<double>(k) / static_cast<double>(n);
  return {std::sin(theta) / theta, -(1.0 - std::cos(theta)) / theta};
}

}  // namespace

double lambda_cont(std::int64_t k) {
  const double kk = static_cast<double>(k);
  return -4.0 * kPi * kPi * kk * kk;
}

double lambda_disc(std::int64_t n, std::int64_t j) {
  require_mode(n, j);
  const double s = std::sin(static_cast<double>(j) * kPi / static_cast<double>(2 * n));
  const double nn = static_cast<double>(n);
  return -16.0 * nn * nn * s * s;
}

double cfl_delta0(double c) {
  if (4.0 * c <= 1.0) return 1.0;
  return std::min(1.0, -(c / 4.0) * std::log(4.0 * c - 1.0));
}

// ---------------------------------------------------------------------------
// SpectralTable

SpectralTable::SpectralTable(const GridConfig& grid) : grid_(grid) {
  const std::int64_t n = grid.n();
  const std::size_t size = grid.num_space();
  lambda_cont_.resize(size);
  lambda_disc_.resize(size);
  gamma_.resize(size);
  amplification_.resize(size);
  for (std::int64_t j = -n; j <= n - 1; ++j) {
    const std::size_t s = slot(j);
    lambda_cont_[s] = fdspde::lambda_cont(j);
    lambda_disc_[s] = fdspde::lambda_disc(n, j);
    gamma_[s] = j == 0 ? 1.0 : lambda_disc_[s] / lambda_cont_[s];
    amplification_[s] = 1.0 + grid.h() * lambda_disc_[s];
  }
}

std::size_t SpectralTable::slot(std::int64_t j) const {
  require_mode(grid_.n(), j);
  return static_cast<std::size_t>(j + grid_.n());
}

double SpectralTable::lambda_cont(std::int64_t j) const { return lambda_cont_[slot(j)]; }
double SpectralTable::lambda_disc(std::int64_t j) const { return lambda_disc_[slot(j)]; }
double SpectralTable::gamma(std::int64_t j) const { return gamma_[slot(j)]; }
double SpectralTable::one_plus_h_lambda(std::int64_t j) const {
  return amplification_[slot(j)];
}

double SpectralTable::mu_at_step(std::int64_t j, std::int64_t k) const {
  if (k == 0) return 1.0;
  return std::pow(amplification_[slot(j)], static_cast<double>(k));
}

double SpectralTable::mu(std::int64_t j, double t) const {
  if (t < 0.0) throw GridError("mu: negative time");
  const std::int64_t k = grid_.kappa_index(t);
  const double frac = std::max(0.0, (t - grid_.time(k)) / grid_.h());
  const double lo = mu_at_step(j, k);
  if (frac == 0.0) return lo;
  return lo + frac * (mu_at_step(j, k + 1) - lo);
}

double mu_coeff(const GridConfig& grid, std::int64_t j, double t) {
  require_mode(grid.n(), j);
  return SpectralTable(grid).mu(j, t);
}

std::complex<double> basis_eval(std::int64_t n, std::int64_t j, double x) {
  require_mode(n, j);
  const double m = static_cast<double>(2 * n);
  x -= std::floor(x);
  const double scaled = x * m;
  auto i0 = static_cast<std::int64_t>(std::floor(scaled));
  const double frac = scaled - static_cast<double>(i0);
  auto at = [&](std::int64_t i) {
    const double angle = 2.0 * kPi * static_cast<double>(mod_index(j * i, 2 * n)) / m;
    return cplx{std::cos(angle), std::sin(angle)};
  };
  const cplx left = at(i0);
  if (frac == 0.0) return left;
  return left + frac * (at(i0 + 1) - left);
}

double discrete_heat_kernel(const SpectralTable& table, double t, double x, double y) {
  const std::int64_t n = table.n();
  const std::int64_t yi = table.grid().rho_index(y - std::floor(y));
  const auto m = static_cast<double>(2 * n);
  cplx sum{0.0, 0.0};
  double scale = 0.0;
  for (std::int64_t j = -n; j <= n - 1; ++j) {
    const double angle = -2.0 * kPi * static_cast<double>(mod_index(j * yi, 2 * n)) / m;
    const cplx term = table.mu(j, t) * basis_eval(n, j, x) * cplx{std::cos(angle), std::sin(angle)};
    sum += term;
    scale += std::abs(term);
  }
  return checked_real(sum, scale);
}

std::vector<double> discrete_kernel_matrix(const SpectralTable& table, double t) {
  const std::int64_t n = table.n();
  const auto size = static_cast<std::int64_t>(table.grid().num_space());
  const auto roots = unit_roots(static_cast<std::size_t>(size));
  std::vector<double> mu(static_cast<std::size_t>(size));
  for (std::int64_t j = -n; j <= n - 1; ++j) mu[static_cast<std::size_t>(j + n)] = table.mu(j, t);

  std::vector<double> out(static_cast<std::size_t>(size * size));
  for (std::int64_t x = 0; x < size; ++x) {
    for (std::int64_t y = 0; y < size; ++y) {
      cplx sum{0.0, 0.0};
      double scale = 0.0;
      for (std::int64_t j = -n; j <= n - 1; ++j) {
        const cplx term = mu[static_cast<std::size_t>(j + n)] * roots[mod_index(j * (x - y), size)];
        sum += term;
        scale += std::abs(term);
      }
      out[static_cast<std::size_t>(x * size + y)] = checked_real(sum, scale);
    }
  }
  return out;
}

FieldState apply_semigroup_disc(const SpectralTable& table, std::span<const double> f, double t) {
  const GridConfig& grid = table.grid();
  require_size(grid, f.size());
  if (t < 0.0) throw GridError("semigroup: negative time");
  const std::int64_t n = grid.n();
  const auto size = static_cast<std::int64_t>(grid.num_space());
  const auto roots = unit_roots(static_cast<std::size_t>(size));

  // Coefficients (1/2n) sum_x f(x) conj(e_j(x)), already damped by mu_j(t).
  std::vector<cplx> coeff(static_cast<std::size_t>(size));
  for (std::int64_t j = -n; j <= n - 1; ++j) {
    cplx acc{0.0, 0.0};
    for (std::int64_t i = 0; i < size; ++i) {
      acc += f[static_cast<std::size_t>(i)] * std::conj(roots[mod_index(j * i, size)]);
    }
    coeff[static_cast<std::size_t>(j + n)] = table.mu(j, t) * acc / static_cast<double>(size);
  }

  double scale = 0.0;
  for (double v : f) scale = std::max(scale, std::abs(v));
  FieldState out(static_cast<std::size_t>(size));
  for (std::int64_t i = 0; i < size; ++i) {
    cplx acc{0.0, 0.0};
    for (std::int64_t j = -n; j <= n - 1; ++j) {
      acc += coeff[static_cast<std::size_t>(j + n)] * roots[mod_index(j * i, size)];
    }
    out[static_cast<std::size_t>(i)] = checked_real(acc, scale);
  }
  return out;
}

std::vector<double> random_walk_law(const GridConfig& grid, std::int64_t steps) {
  if (steps < 0) throw GridError("random walk: negative step count");
  const auto size = static_cast<std::int64_t>(grid.num_space());
  const double c = grid.c();
  std::vector<double> law(static_cast<std::size_t>(size), 0.0);
  std::vector<double> next(law.size());
  law[0] = 1.0;
  for (std::int64_t s = 0; s < steps; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::int64_t m = 0; m < size; ++m) {
      const double p = law[static_cast<std::size_t>(m)];
      if (p == 0.0) continue;
      next[static_cast<std::size_t>(m)] += (1.0 - 2.0 * c) * p;
      next[mod_index(m + 1, size)] += c * p;
      next[mod_index(m - 1, size)] += c * p;
    }
    law.swap(next);
  }
  return law;
}

FieldState random_walk_semigroup(const GridConfig& grid, std::span<const double> f, double t) {
  require_size(grid, f.size());
  const std::int64_t steps = grid.step_of(t);
  const auto law = random_walk_law(grid, steps);
  const auto size = static_cast<std::int64_t>(grid.num_space());
  FieldState out(static_cast<std::size_t>(size), 0.0);
  for (std::int64_t x = 0; x < size; ++x) {
    double acc = 0.0;
    for (std::int64_t m = 0; m < size; ++m) {
      acc += law[static_cast<std::size_t>(m)] * f[mod_index(x + m, size)];
    }
    out[static_cast<std::size_t>(x)] = acc;
  }
  return out;
}

FieldState discrete_laplacian(const GridConfig& grid, std::span<const double> f) {
  require_size(grid, f.size());
  const std::size_t size = f.size();
  const double scale = static_cast<double>(size) * static_cast<double>(size);
  FieldState out(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double left = f[(i + size - 1) % size];
    const double right = f[(i + 1) % size];
    out[i] = scale * (right - 2.0 * f[i] + left);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuum kernels

double heat_kernel_cont(double t, double x, double tol) {
  if (!(t > 0.0)) throw GridError("continuum heat kernel needs t > 0");
  x -= std::floor(x);
  if (t < kImageCrossover) {
    const double norm = 1.0 / std::sqrt(4.0 * kPi * t);
    double sum = 0.0;
    for (int m = -kImageCount; m <= kImageCount; ++m) {
      const double d = x + m;
      sum += std::exp(-d * d / (4.0 * t));
    }
    return norm * sum;
  }
  double sum = 1.0;
  for (std::int64_t k = 1;; ++k) {
    const double damp = std::exp(lambda_cont(k) * t);
    if (damp < tol) break;
    sum += 2.0 * damp * std::cos(2.0 * kPi * static_cast<double>(k) * x);
  }
  return sum;
}

double TrigSeries::operator()(double x) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    const double angle = 2.0 * kPi * static_cast<double>(term.k) * x;
    sum += term.cos_coeff * std::cos(angle) + term.sin_coeff * std::sin(angle);
  }
  return sum;
}

std::vector<double> TrigSeries::sample(const GridConfig& grid) const {
  std::vector<double> out(grid.num_space());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (*this)(grid.point(static_cast<std::int64_t>(i)));
  }
  return out;
}

TrigSeries apply_semigroup_cont(const TrigSeries& f, double t) {
  if (t < 0.0) throw GridError("continuum semigroup: negative time");
  TrigSeries out = f;
  for (auto& term : out.terms) {
    const double damp = std::exp(lambda_cont(term.k) * t);
    term.cos_coeff *= damp;
    term.sin_coeff *= damp;
  }
  return out;
}

std::vector<double> apply_semigroup_cont(std::span<const double> samples, double t, double tol) {
  if (t < 0.0) throw GridError("continuum semigroup: negative time");
  std::vector<double> out(samples.begin(), samples.end());
  if (t == 0.0 || samples.empty()) return out;
  const auto m = static_cast<std::int64_t>(samples.size());
  const auto roots = unit_roots(samples.size());
  // Symmetric mode range; for even m the Nyquist mode is kept once as a cosine.
  const std::int64_t lo = -((m - 1) / 2);
  const std::int64_t hi = m / 2;
  std::vector<cplx> coeff;
  std::vector<std::int64_t> modes;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double damp = std::exp(lambda_cont(k) * t);
    if (damp < tol) continue;
    cplx acc{0.0, 0.0};
    for (std::int64_t i = 0; i < m; ++i) {
      acc += samples[static_cast<std::size_t>(i)] * std::conj(roots[mod_index(k * i, m)]);
    }
    coeff.push_back(damp * acc / static_cast<double>(m));
    modes.push_back(k);
  }
  for (std::int64_t i = 0; i < m; ++i) {
    cplx acc{0.0, 0.0};
    for (std::size_t q = 0; q < modes.size(); ++q) {
      acc += coeff[q] * roots[mod_index(modes[q] * i, m)];
    }
    out[static_cast<std::size_t>(i)] = acc.real();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel distance

double kernel_l2_distance_sq_at(const SpectralTable& table, double t, double x) {
  const GridConfig& grid = table.grid();
  if (t < grid.h() * (1.0 - 1e-12)) {
    throw GridError("kernel distance requires t >= h");
  }
  const std::int64_t n = table.n();
  const std::int64_t steps = grid.kappa_index(t);

  // ||p_t||^2 = sum_k exp(-8 pi^2 k^2 t)
  double cont_norm = 1.0;
  for (std::int64_t k = 1;; ++k) {
    const double v = std::exp(2.0 * lambda_cont(k) * t);
    cont_norm += 2.0 * v;
    if (v < 1e-18) break;
  }

  double disc_norm = 0.0;
  cplx cross{0.0, 0.0};
  for (std::int64_t j = -n; j <= n - 1; ++j) {
    const double a = table.mu_at_step(j, steps);
    const cplx ej = basis_eval(n, j, x);
    disc_norm += a * a * std::norm(ej);
    // aliases k = j + 2nm all feed into the discrete mode j
    auto alias = [&](std::int64_t k) {
      const double angle = 2.0 * kPi * static_cast<double>(k) * x;
      return std::exp(lambda_cont(k) * t) * cplx{std::cos(angle), std::sin(angle)} *
             cell_average_factor(k, n);
    };
    cplx inner = alias(j);
    for (std::int64_t m = 1;; ++m) {
      const std::int64_t up = j + 2 * n * m;
      const std::int64_t down = j - 2 * n * m;
      inner += alias(up) + alias(down);
      const double damp = std::exp(lambda_cont(std::min(std::abs(up), std::abs(down))) * t);
      if (damp < 1e-20) break;
    }
    cross += a * std::conj(ej) * inner;
  }
  return cont_norm - 2.0 * cross.real() + disc_norm;
}

double kernel_l2_distance_sq(const SpectralTable& table, double t) {
  return kernel_l2_distance_sq_at(table, t, 0.0);
}

double semigroup_compose_check(const SpectralTable& table, double s, double t) {
  const GridConfig& grid = table.grid();
  grid.step_of(s);
  grid.step_of(t);
  const auto size = static_cast<std::size_t>(grid.num_space());
  const auto kt = discrete_kernel_matrix(table, t);
  const auto ks = discrete_kernel_matrix(table, s);
  const auto kts = discrete_kernel_matrix(table, s + t);
  double worst = 0.0;
  for (std::size_t x = 0; x < size; ++x) {
    for (std::size_t y = 0; y < size; ++y) {
      double acc = 0.0;
      for (std::size_t z = 0; z < size; ++z) acc += kt[x * size + z] * ks[z * size + y];
      acc /= static_cast<double>(size);
      worst = std::max(worst, std::abs(acc - kts[x * size + y]));
    }
  }
  return worst;
}

}  // namespace fdspde
