#include "fdspde/ou.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fdspde/errors.hpp"
#include "fdspde/scheme.hpp"

namespace fdspde {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSmallTime = 1e-3;
// exp(-41.4) ~ 1e-18
constexpr double kDampingCut = 41.4;
constexpr std::int64_t kLastSliceModes = 20000;

std::int64_t mode_cutoff(double tau) {
  if (tau <= 0.0) return kLastSliceModes;
  const double k = std::ceil(std::sqrt(kDampingCut / (4.0 * kPi * kPi * tau)));
  return std::min<std::int64_t>(kLastSliceModes, std::max<std::int64_t>(1, static_cast<std::int64_t>(k)));
}

/// int_a^{a+h} exp(-lambda r) dr for lambda >= 0.
double exp_slice(double lambda, double a, double h) {
  if (lambda == 0.0) return h;
  return std::exp(-lambda * a) * (-std::expm1(-lambda * h)) / lambda;
}

/// sum_{k>=1} sin(k phi) / k^3 on [0, 2 pi].
double clausen_sl3(double phi) {
  return kPi * kPi * phi / 6.0 - kPi * phi * phi / 4.0 + phi * phi * phi / 12.0;
}

double sinc(double theta) { return theta == 0.0 ? 1.0 : std::sin(theta) / theta; }

std::size_t fold(std::int64_t k, std::int64_t m) {
  const std::int64_t r = k % m;
  return static_cast<std::size_t>(r < 0 ? r + m : r);
}

}  // namespace

double q_cont(double t) {
  if (t < 0.0) throw Error("q_cont: negative time");
  if (t == 0.0) return 0.0;
  if (t < kSmallTime) {
    // image sum: ||p_r||^2 = (8 pi r)^{-1/2} sum_m exp(-m^2/(8r)); m != 0 is below 1e-50 here
    return std::sqrt(t / (2.0 * kPi));
  }
  double tail = 0.0;
  for (std::int64_t k = 1;; ++k) {
    const double lam = 8.0 * kPi * kPi * static_cast<double>(k * k);
    const double term = std::exp(-lam * t) / lam;
    tail += term;
    if (term < 1e-18) break;
  }
  return t + 1.0 / 24.0 - 2.0 * tail;
}

double q_disc(const GridConfig& grid, double t) {
  if (t < 0.0) throw Error("q_disc: negative time");
  const std::int64_t n = grid.n();
  const std::int64_t big_l = grid.kappa_index(t);
  const double h = grid.h();
  const double rest = std::max(0.0, t - grid.time(big_l));
  if (big_l == 0) return static_cast<double>(2 * n) * t;

  double full = 0.0;   // sum_j sum_{l<L} g_j^{2l}
  double last = 0.0;   // sum_j g_j^{2L}
  const double ell = static_cast<double>(big_l);
  for (std::int64_t j = -n; j <= n - 1; ++j) {
    const double hl = h * lambda_disc(n, j);
    const double a = hl * (2.0 + hl);  // g^2 - 1
    if (a == 0.0) {
      full += ell;
      last += 1.0;
    } else if (a == -1.0) {
      full += 1.0;
    } else {
      const double log_g2 = std::log1p(a);
      full += std::expm1(ell * log_g2) / a;
      last += std::exp(ell * log_g2);
    }
  }
  return h * full + rest * last;
}

VarianceCurve VarianceCurve::continuum() { return VarianceCurve{}; }

VarianceCurve VarianceCurve::discrete(const GridConfig& grid) {
  VarianceCurve v;
  v.grid_ = grid;
  return v;
}

double VarianceCurve::operator()(double t) const {
  return grid_ ? q_disc(*grid_, t) : q_cont(t);
}

std::vector<FieldState> simulate_ou_disc(const GridConfig& grid, const NoiseSource& noise,
                                         double t_end) {
  const auto steps = static_cast<std::size_t>(grid.step_of(t_end));
  const FieldState zero(grid.num_space(), 0.0);
  return trajectory(grid, find_drift("zero"), zero, noise, steps);
}

FieldState ou_hat(const SpectralTable& table, std::span<const double> state_at_s, double s,
                  double t) {
  const GridConfig& grid = table.grid();
  const std::int64_t ks = grid.step_of(s);
  const std::int64_t kt = grid.step_of(t);
  if (kt < ks) throw GridError("ou_hat: t < s");
  return apply_semigroup_disc(table, state_at_s, grid.time(kt - ks));
}

double ou_coupling_error_sq(const GridConfig& grid, double t) {
  const std::int64_t big_l = grid.step_of(t);
  if (big_l == 0) return 0.0;
  const std::int64_t n = grid.n();
  const std::int64_t m = 2 * n;
  const double h = grid.h();
  const double nn = static_cast<double>(n);

  // slice l = 0: kappa(r) = 0, every discrete mode has coefficient 1
  const double phi = kPi / nn;
  double s_damped = 0.0;
  for (std::int64_t k = 1;; ++k) {
    const double kk = static_cast<double>(k);
    const double damp = std::exp(-4.0 * kPi * kPi * kk * kk * h);
    s_damped += std::sin(kk * phi) * damp / (kk * kk * kk);
    if (damp < 1e-20) break;
  }
  double cross = h + 2.0 * nn / (4.0 * kPi * kPi * kPi) * (clausen_sl3(phi) - s_damped);

  std::vector<double> g(static_cast<std::size_t>(m));
  std::vector<double> a(static_cast<std::size_t>(m), 1.0);
  for (std::int64_t j = -n; j <= n - 1; ++j) {
    g[fold(j, m)] = 1.0 + h * lambda_disc(n, j);
  }
  const std::int64_t kmax = mode_cutoff(h);
  std::vector<double> weight(static_cast<std::size_t>(kmax + 1));
  std::vector<double> lam(static_cast<std::size_t>(kmax + 1));
  for (std::int64_t k = 0; k <= kmax; ++k) {
    weight[k] = sinc(kPi * static_cast<double>(k) / nn);
    lam[k] = 4.0 * kPi * kPi * static_cast<double>(k * k);
  }
  for (std::int64_t l = 1; l < big_l; ++l) {
    for (std::size_t s = 0; s < a.size(); ++s) a[s] *= g[s];
    const double start = static_cast<double>(l) * h;
    double acc = a[0] * h;
    for (std::int64_t k = 1; k <= kmax; ++k) {
      const double slice = exp_slice(lam[k], start, h);
      if (slice == 0.0) break;
      acc += (a[fold(k, m)] + a[fold(-k, m)]) * weight[k] * slice;
    }
    cross += acc;
  }
  const double err = q_cont(t) + q_disc(grid, t) - 2.0 * cross;
  return std::max(0.0, err);
}

// ---------------------------------------------------------------------------

ExactOuSampler::ExactOuSampler(const GridConfig& grid, double t, std::int64_t x_index)
    : grid_(grid),
      steps_(static_cast<std::size_t>(grid.step_of(t))),
      x_index_(grid.wrap(x_index)),
      residual_variance_(0.0) {
  const std::int64_t n = grid.n();
  const std::int64_t m = 2 * n;
  const double h = grid.h();
  const double nn = static_cast<double>(n);
  weights_.assign(steps_ * static_cast<std::size_t>(m), 0.0);
  for (std::size_t l = 0; l < steps_; ++l) {
    // s in [lh, (l+1)h) -> t - s in (tau, tau + h]
    const double tau = t - static_cast<double>(l + 1) * h;
    const std::int64_t kmax = mode_cutoff(std::max(0.0, tau));
    for (std::int64_t d = 0; d < m; ++d) {
      double acc = h;  // k = 0
      for (std::int64_t k = 1; k <= kmax; ++k) {
        const double kk = static_cast<double>(k);
        const double theta = kPi * kk / nn;
        const double slice = exp_slice(4.0 * kPi * kPi * kk * kk, std::max(0.0, tau), h);
        if (slice == 0.0) break;
        // Re[exp(-i 2 pi k d/2n) (1 - exp(-i theta))/(i theta)], doubled for +-k
        const double psi = 2.0 * kPi * kk * static_cast<double>(d) / static_cast<double>(m);
        const double re = (std::sin(theta) * std::cos(psi) - (1.0 - std::cos(theta)) * std::sin(psi)) / theta;
        acc += 2.0 * slice * re;
      }
      weights_[l * static_cast<std::size_t>(m) + static_cast<std::size_t>(d)] = acc / h;
    }
  }
  residual_variance_ = std::max(0.0, q_cont(t) - explained_variance());
}

double ExactOuSampler::weight(std::size_t l, std::size_t i) const {
  const auto m = grid_.num_space();
  const std::size_t d = fold(static_cast<std::int64_t>(i) - x_index_, static_cast<std::int64_t>(m));
  return weights_.at(l * m + d);
}

double ExactOuSampler::explained_variance() const {
  const double cell = grid_.h() * grid_.spacing();
  double acc = 0.0;
  for (double w : weights_) acc += w * w * cell;
  return acc;
}

double ExactOuSampler::conditional_mean(const NoiseSource& noise) const {
  if (!(noise.grid() == grid_)) throw DimensionError("ExactOuSampler: noise on a different grid");
  if (noise.steps() < steps_) throw NoiseExhausted("ExactOuSampler: noise horizon too short");
  const auto m = grid_.num_space();
  std::vector<double> slab(m);
  double acc = 0.0;
  for (std::size_t l = 0; l < steps_; ++l) {
    noise.slab(l, slab);
    for (std::size_t i = 0; i < m; ++i) acc += weight(l, i) * slab[i];
  }
  return acc;
}

double ExactOuSampler::sample(const NoiseSource& noise, const NoiseKey& key) const {
  return conditional_mean(noise) + std::sqrt(residual_variance_) * auxiliary_normal(key, 0);
}

double gauss_smooth(const std::function<double(double)>& g, double variance, double z) {
  if (variance < 0.0 || std::isnan(variance)) {
    throw Error("gauss_smooth: negative variance " + std::to_string(variance));
  }
  if (variance == 0.0) return g(z);
  const double sd = std::sqrt(variance);
  const double norm = 1.0 / std::sqrt(2.0 * kPi);
  using boost::math::quadrature::gauss_kronrod;
  auto right = [&](double x) { return g(z + sd * x) * norm * std::exp(-0.5 * x * x); };
  auto left = [&](double x) { return g(z - sd * x) * norm * std::exp(-0.5 * x * x); };
  const double inf = std::numeric_limits<double>::infinity();
  const double r = gauss_kronrod<double, 61>::integrate(right, 0.0, inf, 15, 1e-14);
  const double l = gauss_kronrod<double, 61>::integrate(left, 0.0, inf, 15, 1e-14);
  return r + l;
}

}  // namespace fdspde
