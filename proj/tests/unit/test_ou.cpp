#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fdspde/errors.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/ou.hpp"
#include "fdspde/scheme.hpp"

using namespace fdspde;
using std::numbers::pi;

namespace {

struct Moments {
  double mean;
  double se;
};

Moments moments(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double m = static_cast<double>(v.size());
  const double mean = s / m;
  return {mean, std::sqrt(std::max(0.0, s2 / m - mean * mean) / (m - 1.0))};
}

double slope(const std::vector<double>& n, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]);
    my += std::log(y[i]);
  }
  mx /= n.size();
  my /= n.size();
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxx += (std::log(n[i]) - mx) * (std::log(n[i]) - mx);
    sxy += (std::log(n[i]) - mx) * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("Q: zero, monotone, sqrt scaling") {
  CHECK(q_cont(0.0) == 0.0);
  double prev = 0.0;
  for (double t = 1e-5; t <= 1.0; t *= 1.3) {
    const double q = q_cont(t);
    CHECK(q >= prev);
    prev = q;
  }
  double lo = 1e300, hi = 0.0;
  for (int e = -10; e <= -1; ++e) {
    const double r = std::ldexp(1.0, e);
    lo = std::min(lo, q_cont(r) / std::sqrt(r));
    hi = std::max(hi, q_cont(r) / std::sqrt(r));
  }
  CHECK(lo > 0.3);
  CHECK(hi < 1.0);
  // both evaluation regimes agree at the crossover
  CHECK(q_cont(0.999e-3) == doctest::Approx(q_cont(1.001e-3)).epsilon(2e-3));
}

TEST_CASE("Q(0.1) against 2-D trapezoid quadrature") {
  // oracle: trapezoid in r on [0, 0.1] and in y on [0, 1) at 2^12 x 2^12 of p_r(y)^2, with
  // p_r from its Gaussian image sum; the r = 0 endpoint contributes through the exact
  // small-time integral over [0, r_1].
  const int nr = 1 << 12, ny = 1 << 12;
  const double t = 0.1;
  const double dr = t / nr;
  auto norm_sq = [&](double r) {
    double acc = 0.0;
    for (int s = 0; s < ny; ++s) {
      const double y = static_cast<double>(s) / ny;
      double p = 0.0;
      for (int m = -6; m <= 6; ++m) p += std::exp(-(y - m) * (y - m) / (4 * r));
      p /= std::sqrt(4 * pi * r);
      acc += p * p;
    }
    return acc / ny;
  };
  // ||p_r||^2 ~ (8 pi r)^{-1/2} is singular at 0: integrate [0, r0] exactly, trapezoid beyond
  const int skip = 64;
  double total = std::sqrt(skip * dr / (2 * pi));
  for (int k = skip; k <= nr; k += 1) {
    const double w = (k == skip || k == nr) ? 0.5 : 1.0;
    total += w * dr * norm_sq(k * dr);
  }
  CHECK(std::abs(total - q_cont(t)) <= 1e-6);
}

TEST_CASE("Q^n exact small-time identity and examples") {
  const auto g = GridConfig::make(2, 0.25);
  CHECK(q_disc(g, 1.0 / 64.0) == 1.0 / 16.0);
  for (std::int64_t n : {1, 2, 4, 8, 16, 32, 64}) {
    const auto gn = GridConfig::make(n, 0.3);
    for (double r : {0.0, gn.h() / 3.0, gn.h() / 2.0, gn.h()}) CHECK(q_disc(gn, r) == 2.0 * n * r);
  }
}

TEST_CASE("Q^n against direct summation") {
  const auto g = GridConfig::make(4, 0.3);
  for (double t : {0.001, 0.05, 0.123, 0.5}) {
    double acc = 0.0;
    const auto L = g.kappa_index(t);
    for (std::int64_t l = 0; l <= L; ++l) {
      const double len = l < L ? g.h() : t - L * g.h();
      double s = 0.0;
      for (std::int64_t j = -4; j <= 3; ++j) s += std::pow(1 + g.h() * lambda_disc(4, j), 2.0 * l);
      acc += len * s;
    }
    CHECK(q_disc(g, t) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("Q^n - Q decays, Q^n lower bound, increments") {
  std::vector<double> ns, d;
  for (std::int64_t n : {8, 16, 32, 64}) {
    ns.push_back(static_cast<double>(n));
    d.push_back(std::abs(q_disc(GridConfig::make(n, 0.25), 0.25) - q_cont(0.25)));
  }
  CHECK(slope(ns, d) <= -0.45);
  for (std::int64_t n : {4, 16, 64}) {
    const auto g = GridConfig::make(n, 0.25);
    double lo = 1e300, worst_inc = 0.0;
    for (double r = g.h(); r <= 1.0; r *= 1.5) lo = std::min(lo, q_disc(g, r) / std::sqrt(r));
    CHECK(lo >= 0.3);
    for (double r = 4 * g.h(); r <= 1.0; r *= 1.7) {
      for (double rp : {r * 1.1, r * 2.0, r + g.h()}) {
        worst_inc = std::max(worst_inc, std::abs(q_disc(g, rp) - q_disc(g, r)) / (std::abs(rp - r) / std::sqrt(r)));
      }
    }
    CHECK(worst_inc < 2.0);
  }
  const auto v = VarianceCurve::discrete(GridConfig::make(8, 0.25));
  CHECK(v.is_discrete());
  CHECK(v(0.1) == q_disc(GridConfig::make(8, 0.25), 0.1));
  CHECK(VarianceCurve::continuum()(0.1) == q_cont(0.1));
}

TEST_CASE("discrete OU: pointwise variance is Q^n and the mean mode has variance t") {
  const auto g = GridConfig::make(4, 0.25);
  const std::size_t steps = 64;
  const int M = 10000;
  std::vector<double> at0(M), mean_mode(M);
  for (int s = 0; s < M; ++s) {
    const auto f = NoiseField::sample_steps(g, steps, {31, static_cast<std::uint64_t>(s)});
    const auto tr = simulate_ou_disc(g, f, g.time(steps));
    at0[s] = tr.back()[0] * tr.back()[0];
    double avg = 0.0;
    for (double v : tr.back()) avg += v / 8.0;
    mean_mode[s] = avg * avg;
    // the spatial mean is the running sum of mean noise
    double sum = 0.0;
    for (double c : f.cells()) sum += c;
    CHECK(avg == doctest::Approx(sum).epsilon(1e-9));
  }
  const auto a = moments(at0);
  CHECK(std::abs(a.mean - q_disc(g, g.time(steps))) <= 4 * a.se);
  const auto b = moments(mean_mode);
  CHECK(std::abs(b.mean - g.time(steps)) <= 4 * b.se);
}

TEST_CASE("OU coupling error: exact value, decay") {
  CHECK(ou_coupling_error_sq(GridConfig::make(8, 0.25), 0.0) == 0.0);
  std::vector<double> ns, e;
  for (std::int64_t n : {8, 16, 32, 64}) {
    const double v = ou_coupling_error_sq(GridConfig::make(n, 0.25), 0.25);
    CHECK(v >= 0.0);
    ns.push_back(static_cast<double>(n));
    e.push_back(v);
  }
  const double s = slope(ns, e);
  CHECK(s >= -1.2);
  CHECK(s <= -0.8);
  CHECK_THROWS_AS(ou_coupling_error_sq(GridConfig::make(8, 0.25), 0.001), GridError);
}

TEST_CASE("OU coupling error: one-step closed form against brute quadrature") {
  // t = h: the error is int_0^h ||p_r - 2n 1_{cell(x)}||^2 dr; oracle integrates the
  // continuum kernel (images) on a fine (r, y) grid.
  const auto g = GridConfig::make(2, 0.25);
  const double h = g.h();
  const int nr = 4000, ny = 4000;
  double acc = 0.0;
  for (int a = 0; a < nr; ++a) {
    const double r = (a + 0.5) * h / nr;
    double inner = 0.0;
    for (int b = 0; b < ny; ++b) {
      const double y = (b + 0.5) / ny;
      double p = 0.0;
      for (int m = -6; m <= 6; ++m) p += std::exp(-(y - m) * (y - m) / (4 * r));
      p /= std::sqrt(4 * pi * r);
      const double disc = y < 0.25 ? 4.0 : 0.0;  // cell [0, 1/4) carries p^n_0(0, y)
      inner += (p - disc) * (p - disc) / ny;
    }
    acc += inner * h / nr;
  }
  // x = 0 against p_r(0 - y): kernel symmetric, cell to the right of x
  CHECK(ou_coupling_error_sq(g, h) == doctest::Approx(acc).epsilon(2e-3));
}

TEST_CASE("exact continuum sampler: weights and variance") {
  const auto g = GridConfig::make(4, 0.25);
  const double t = 16 * g.h();
  const ExactOuSampler s(g, t, 0);
  CHECK(s.residual_variance() >= 0.0);
  CHECK(s.explained_variance() + s.residual_variance() == doctest::Approx(q_cont(t)).epsilon(1e-10));
  // weight = cell average of p_{t-s}(x - y): brute midpoint oracle for one cell
  const std::size_t l = 10, i = 1;
  const int q = 400;
  double acc = 0.0;
  for (int a = 0; a < q; ++a) {
    const double sr = (l + (a + 0.5) / q) * g.h();
    for (int b = 0; b < q; ++b) {
      const double y = (i + (b + 0.5) / q) * g.spacing();
      acc += heat_kernel_cont(t - sr, -y);
    }
  }
  CHECK(s.weight(l, i) == doctest::Approx(acc / (q * q)).epsilon(1e-4));
  const ExactOuSampler shifted(g, t, 3);
  CHECK(shifted.weight(l, 4) == doctest::Approx(s.weight(l, 1)).epsilon(1e-14));
}

TEST_CASE("coupled Monte Carlo matches the exact coupling error (n = 8, t = 0.25)") {
  const auto g = GridConfig::make(8, 0.25);
  const double t = 0.25;
  const ExactOuSampler sampler(g, t, 0);
  const int M = 10000;
  std::vector<double> d2(M), o2(M);
  for (int s = 0; s < M; ++s) {
    const NoiseKey key{2718, static_cast<std::uint64_t>(s)};
    const auto f = NoiseField::sample(g, t, key);
    const double cont = sampler.sample(f, key);
    const double disc = simulate_ou_disc(g, f, t).back()[0];
    d2[s] = (cont - disc) * (cont - disc);
    o2[s] = cont * cont;
  }
  const auto a = moments(d2);
  CHECK(std::abs(a.mean - ou_coupling_error_sq(g, t)) <= 4 * a.se);
  const auto b = moments(o2);
  CHECK(std::abs(b.mean - q_cont(t)) <= 4 * b.se);
}

TEST_CASE("gauss_smooth") {
  auto cosine = [](double x) { return std::cos(x); };
  CHECK(gauss_smooth(cosine, 0.0, 0.3) == std::cos(0.3));
  for (double v : {0.1, 1.0, 7.0}) {
    CHECK(gauss_smooth([](double x) { return 2.0 * x - 1.0; }, v, 0.4) == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(gauss_smooth([](double x) { return x > 0 ? 1.0 : 0.0; }, v, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gauss_smooth(cosine, v, 0.3) == doctest::Approx(std::cos(0.3) * std::exp(-v / 2)).epsilon(1e-12));
  }
  CHECK_THROWS(gauss_smooth(cosine, -1e-3, 0.0));
}

TEST_CASE("conditional smoothing identity for the discrete OU") {
  const auto g = GridConfig::make(4, 0.25);
  const SpectralTable table(g);
  auto cosine = [](double x) { return std::cos(x); };
  const int M = 10000;
  for (auto [ks, kt] : {std::pair<int, int>{16, 48}, std::pair<int, int>{40, 44}}) {
    const double s = g.time(ks), t = g.time(kt);
    const double v = q_disc(g, t - s);
    std::vector<double> resid(M), weighted(M);
    for (int m = 0; m < M; ++m) {
      const auto f = NoiseField::sample_steps(g, kt, {77, static_cast<std::uint64_t>(m)});
      const auto tr = simulate_ou_disc(g, f, t);
      const auto hat = ou_hat(table, tr[ks], s, t);
      const double pred = gauss_smooth(cosine, v, hat[0]);
      resid[m] = cosine(tr[kt][0]) - pred;
      weighted[m] = resid[m] * hat[0];
    }
    const auto a = moments(resid);
    CHECK(std::abs(a.mean) <= 4 * a.se);
    const auto b = moments(weighted);
    CHECK(std::abs(b.mean) <= 4 * b.se);
  }
  CHECK_THROWS_AS(ou_hat(table, std::vector<double>(8, 0.0), 0.5 * g.h(), g.h()), GridError);
}

TEST_CASE("discrete OU spatial regularity is uniform in n") {
  // C^{0.4} seminorm of O^n_1, fourth moment over 10^3 samples
  std::vector<double> means;
  for (std::int64_t n : {8, 16, 32, 64}) {
    const auto g = GridConfig::make(n, 0.25);
    const double t = 1.0;
    const auto steps = static_cast<std::size_t>(g.step_of(t));
    const int M = n <= 16 ? 1000 : 200;
    double acc = 0.0;
    for (int s = 0; s < M; ++s) {
      const StreamingNoise noise(g, steps, {99, static_cast<std::uint64_t>(s)}, g);
      std::vector<double> last;
      integrate(g, find_drift("zero"), std::vector<double>(g.num_space(), 0.0), noise, steps,
                [&](std::size_t k, std::span<const double> u) {
                  if (k == steps) last.assign(u.begin(), u.end());
                });
      acc += std::pow(discrete_holder_seminorm(last, 0.4), 4);
    }
    means.push_back(acc / M);
  }
  const double ratio = *std::max_element(means.begin(), means.end()) / *std::min_element(means.begin(), means.end());
  CHECK(ratio <= 2.0);
}
