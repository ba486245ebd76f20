#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fdspde/convergence.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/ou.hpp"
#include "fdspde/scheme.hpp"
#include "fdspde/spectral.hpp"

using namespace fdspde;

namespace {

double loglog_slope(const std::vector<double>& n, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(n[i]) / n.size();
    my += std::log(y[i]) / n.size();
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxx += (std::log(n[i]) - mx) * (std::log(n[i]) - mx);
    sxy += (std::log(n[i]) - mx) * (std::log(y[i]) - my);
  }
  return sxy / sxx;
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

ExperimentPlan headline_plan(const std::string& drift, std::size_t workers) {
  ExperimentPlan plan;
  plan.c = 0.25;
  plan.levels = {4, 8, 16, 32};
  plan.reference_n = 64;
  plan.horizon = 0.25;
  plan.p = 2.0;
  plan.samples = 200;
  plan.drift = drift;
  plan.initial = "sine";
  plan.workers = workers;
  return plan;
}

Outcome strong_rate(const RateReport& r) {
  if (!r.slope) return {false, "no slope (degenerate)"};
  std::string errs;
  for (const auto& e : r.per_level) errs += fmt("%.0f:%.4g ", static_cast<double>(e.n), e.error);
  return {*r.slope >= -0.65 && *r.slope <= -0.35, errs + fmt("slope %.4f in [-0.65, -0.35]", *r.slope)};
}

}  // namespace

int main() {
  RateReport sign_serial;
  report(1, "strong rate, sign drift", [&] {
    sign_serial = estimate_rates(headline_plan("sign", 1));
    return strong_rate(sign_serial);
  });

  report(2, "strong rate, sin drift", [] { return strong_rate(estimate_rates(headline_plan("smooth", 0))); });

  report(3, "linear case", [] {
    std::vector<double> ns, e;
    for (std::int64_t n : {8, 16, 32, 64}) {
      ns.push_back(static_cast<double>(n));
      e.push_back(ou_coupling_error_sq(GridConfig::make(n, 0.25), 0.25));
    }
    const double s = loglog_slope(ns, e);
    const auto g = GridConfig::make(8, 0.25);
    const ExactOuSampler sampler(g, 0.25, 0);
    const int M = 10000;
    double s1 = 0, s2 = 0;
    for (int m = 0; m < M; ++m) {
      const NoiseKey key{4242, static_cast<std::uint64_t>(m)};
      const auto f = NoiseField::sample(g, 0.25, key);
      const double d = sampler.sample(f, key) - simulate_ou_disc(g, f, 0.25).back()[0];
      s1 += d * d;
      s2 += d * d * d * d;
    }
    const double mean = s1 / M;
    const double se = std::sqrt((s2 / M - mean * mean) / (M - 1));
    const double z = std::abs(mean - e[0]) / se;
    return Outcome{s >= -1.2 && s <= -0.8 && z <= 4.0,
                   fmt("slope %.4f; MC %.5g vs quadrature ", s, mean) + fmt("%.5g (%.2f s.e.)", e[0], z)};
  });

  report(4, "kernel distance", [] {
    std::vector<double> ns, d;
    for (std::int64_t n : {8, 16, 32, 64}) {
      ns.push_back(static_cast<double>(n));
      d.push_back(kernel_l2_distance_sq(SpectralTable(GridConfig::make(n, 0.25)), 0.1));
    }
    const double s = loglog_slope(ns, d);
    double comp_max = 0.0, comp_first = 0.0, comp_last = 0.0;
    for (double t : {0.05, 0.1, 0.2, 0.4}) {
      for (std::int64_t n : {8, 16, 32, 64}) {
        const double v = kernel_l2_distance_sq(SpectralTable(GridConfig::make(n, 0.25)), t) * n * n * std::pow(t, 1.5);
        comp_max = std::max(comp_max, v);
        if (t == 0.1 && n == 8) comp_first = v;
        if (t == 0.1 && n == 64) comp_last = v;
      }
    }
    return Outcome{s <= -1.5 && comp_max <= 0.01 && comp_last <= 2.0 * comp_first,
                   fmt("slope %.4f; compensated max %.3g, n=64/n=8 ratio %.3f", s, comp_max, comp_last / comp_first)};
  });

  report(5, "spectral vs random walk", [] {
    double worst = 0.0;
    for (std::int64_t n : {1, 2, 4, 8}) {
      const auto g = GridConfig::make(n, 0.25);
      const SpectralTable table(g);
      std::vector<double> f(g.num_space());
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(1.0 + 3.7 * i) + (i % 3 == 0 ? 1.5 : -0.25);
      for (std::int64_t k = 0; k <= 32; ++k) {
        const auto a = apply_semigroup_disc(table, f, g.time(k));
        const auto b = random_walk_semigroup(g, f, g.time(k));
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      }
    }
    return Outcome{worst <= 1e-10, fmt("max deviation %.3g", worst)};
  });

  report(6, "semigroup identities", [] {
    double compose = 0.0, one_step = 0.0;
    for (std::int64_t n : {1, 2, 4, 8}) {
      const auto g = GridConfig::make(n, 0.25);
      const SpectralTable table(g);
      for (std::int64_t a : {0, 1, 3, 10, 32}) {
        for (std::int64_t b : {1, 2, 7, 32}) compose = std::max(compose, semigroup_compose_check(table, g.time(a), g.time(b)));
      }
      const std::size_t m = g.num_space();
      std::vector<double> f(m);
      for (std::size_t i = 0; i < m; ++i) f[i] = std::sin(0.3 + 2.1 * i * i);
      const auto ph = apply_semigroup_disc(table, f, g.h());
      const double inv = static_cast<double>(m * m);
      for (std::size_t i = 0; i < m; ++i) {
        const double lap = (f[(i + 1) % m] - 2 * f[i] + f[(i + m - 1) % m]) * inv;
        one_step = std::max(one_step, std::abs(ph[i] - (f[i] + g.h() * lap)));
      }
    }
    return Outcome{compose <= 1e-10 && one_step <= 1e-12,
                   fmt("composition %.3g (<= 1e-10), one step %.3g (<= 1e-12)", compose, one_step)};
  });

  report(7, "mild form", [] {
    const auto g = GridConfig::make(4, 0.25);
    const SpectralTable table(g);
    const auto field = NoiseField::sample_steps(g, 32, {20240601, 7});
    const auto psi = find_initial_condition("sine").sample(g);
    const auto& drift = find_drift("sign");
    const auto traj = trajectory(g, drift, psi, field, 32);
    double worst = 0.0;
    for (std::int64_t k = 0; k <= 32; ++k) {
      for (std::int64_t i = 0; i < 8; ++i) {
        worst = std::max(worst, std::abs(mild_eval(table, drift, psi, field, g.time(k), g.point(i)) - traj[k][i]));
      }
    }
    return Outcome{worst <= 1e-8, fmt("max deviation %.3g", worst)};
  });

  report(8, "Q^n identities", [] {
    double small = 0.0;
    for (std::int64_t n : {1, 2, 4, 8, 16, 32, 64}) {
      const auto g = GridConfig::make(n, 0.25);
      for (int q = 0; q <= 8; ++q) {
        const double r = g.h() * q / 8.0;
        small = std::max(small, std::abs(q_disc(g, r) - 2.0 * n * r) / std::max(1e-300, 2.0 * n * g.h()));
      }
    }
    std::vector<double> ns, diff;
    double lower = 1e300;
    for (std::int64_t n : {8, 16, 32, 64}) {
      const auto g = GridConfig::make(n, 0.25);
      ns.push_back(static_cast<double>(n));
      diff.push_back(std::abs(q_disc(g, 0.25) - q_cont(0.25)));
      for (double r = g.h(); r <= 1.0; r *= 1.25) lower = std::min(lower, q_disc(g, r) / std::sqrt(r));
      lower = std::min(lower, q_disc(g, 1.0));
    }
    const double s = loglog_slope(ns, diff);
    return Outcome{small <= 1e-15 && s <= -0.45 && lower >= 0.1,
                   fmt("small-time rel. deviation %.3g; diff slope %.4f; min Q^n(r)/sqrt(r) %.4f", small, s, lower)};
  });

  report(9, "aggregation and worker reproducibility", [&] {
    const auto fine = GridConfig::make(16, 0.25);
    const auto field = NoiseField::sample(fine, 0.0625, {99, 1});
    double dev = 0.0;
    for (std::int64_t n : {1, 2, 4, 8, 16}) {
      const auto coarse = GridConfig::make(n, 0.25);
      const auto view = aggregate(field, coarse);
      const std::size_t r = 16 / n, rt = r * r, mc = coarse.num_space();
      for (std::size_t k = 0; k < view.steps(); ++k) {
        for (std::size_t i = 0; i < mc; ++i) {
          double s = 0.0;
          for (std::size_t a = 0; a < rt; ++a) {
            for (std::size_t b = 0; b < r; ++b) s += field.cell(k * rt + a, i * r + b);
          }
          dev = std::max(dev, std::abs(s - view.cell(k, i)));
        }
      }
    }
    if (sign_serial.per_level.empty()) return Outcome{false, "criterion 1 did not produce a report"};
    const auto parallel = estimate_rates(headline_plan("sign", 8));
    bool same = parallel.per_level.size() == sign_serial.per_level.size() && parallel.slope == sign_serial.slope;
    for (std::size_t i = 0; same && i < parallel.per_level.size(); ++i) {
      const auto& a = parallel.per_level[i];
      const auto& b = sign_serial.per_level[i];
      same = a.error == b.error && a.stderr_ == b.stderr_ && a.pointwise_sup_error == b.pointwise_sup_error &&
             a.sup_argmax_t == b.sup_argmax_t && a.sup_argmax_x == b.sup_argmax_x;
    }
    return Outcome{dev == 0.0 && same,
                   fmt("max aggregation deviation %.3g; 1 vs 8 workers bitwise ", dev) + (same ? "equal" : "DIFFERENT")};
  });

  report(10, "deterministic semigroup rate", [] {
    const auto g0 = std::vector<std::int64_t>{8, 16, 32, 64};
    std::vector<double> ns, e;
    const auto& ic = find_initial_condition("sine");
    for (auto n : g0) {
      const auto g = GridConfig::make(n, 0.25);
      const SpectralTable table(g);
      const auto disc = apply_semigroup_disc(table, ic.sample(g), 0.25);
      const double decay = std::exp(-4 * M_PI * M_PI * 0.25);
      double worst = 0.0;
      for (std::int64_t i = 0; i < 2 * n; ++i) worst = std::max(worst, std::abs(disc[i] - decay * std::sin(2 * M_PI * g.point(i))));
      ns.push_back(static_cast<double>(n));
      e.push_back(worst);
    }
    const double s = loglog_slope(ns, e);
    const auto lib = deterministic_rate_experiment("sine", g0, 0.25);
    const bool agree = lib.slope && std::abs(*lib.slope - s) <= 1e-6;
    return Outcome{s <= -0.9 && agree, fmt("slope %.4f (library report %.4f)", s, lib.slope ? *lib.slope : NAN)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
