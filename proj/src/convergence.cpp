#include "fdspde/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "fdspde/errors.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/report_json.hpp"
#include "fdspde/scheme.hpp"
#include "fdspde/spectral.hpp"

namespace fdspde {

namespace {

constexpr std::size_t kBlockSize = 8;

struct LevelAccumulator {
  double sum_pow = 0.0;
  double sum_pow_sq = 0.0;
  std::vector<double> pointwise;
};

struct BlockResult {
  std::vector<LevelAccumulator> levels;
};

void add_sample(BlockResult& block, const std::vector<LevelSample>& sample) {
  if (block.levels.empty()) block.levels.resize(sample.size());
  for (std::size_t l = 0; l < sample.size(); ++l) {
    auto& acc = block.levels[l];
    acc.sum_pow += sample[l].sup_pow;
    acc.sum_pow_sq += sample[l].sup_pow * sample[l].sup_pow;
    if (acc.pointwise.empty()) acc.pointwise.assign(sample[l].pointwise_pow.size(), 0.0);
    for (std::size_t q = 0; q < acc.pointwise.size(); ++q) acc.pointwise[q] += sample[l].pointwise_pow[q];
  }
}

void fold_block(BlockResult& total, const BlockResult& block) {
  if (total.levels.empty()) {
    total = block;
    return;
  }
  for (std::size_t l = 0; l < block.levels.size(); ++l) {
    auto& acc = total.levels[l];
    const auto& b = block.levels[l];
    acc.sum_pow += b.sum_pow;
    acc.sum_pow_sq += b.sum_pow_sq;
    for (std::size_t q = 0; q < acc.pointwise.size(); ++q) acc.pointwise[q] += b.pointwise[q];
  }
}

double root_p(double v, double p) { return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / p); }

}  // namespace

std::string build_id() {
#ifdef FDSPDE_BUILD_ID
  return FDSPDE_BUILD_ID;
#else
  return "unknown";
#endif
}

void ExperimentPlan::validate() const {
  const auto ref = GridConfig::make(reference_n, c);
  if (levels.empty()) throw ConfigError("plan has no levels");
  if (!std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
    throw ConfigError("levels must be strictly ascending");
  }
  for (auto n : levels) {
    if (n <= 0 || n > reference_n || reference_n % n != 0 || !is_power_of_two(reference_n / n)) {
      throw ConfigError("level " + std::to_string(n) + " does not divide reference " +
                        std::to_string(reference_n) + " dyadically");
    }
    if (!GridConfig::make(n, c).on_time_grid(horizon)) {
      throw ConfigError("horizon " + std::to_string(horizon) + " is not a grid time at level " +
                        std::to_string(n));
    }
  }
  if (!(horizon >= 0.0) || !ref.on_time_grid(horizon)) {
    throw ConfigError("horizon must be a non-negative multiple of the reference step");
  }
  if (!(p >= 2.0)) throw ConfigError("moment p must be >= 2");
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (samples > (std::size_t{1} << 32)) throw ConfigError("too many samples");
  find_drift(drift);
  find_initial_condition(initial);
}

std::vector<LevelSample> coupled_sample_error(const ExperimentPlan& plan,
                                              std::uint64_t sample_index) {
  plan.validate();
  const auto ref = GridConfig::make(plan.reference_n, plan.c);
  const DriftSpec& drift = find_drift(plan.drift);
  const InitialCondition& ic = find_initial_condition(plan.initial);
  const auto ref_steps = static_cast<std::size_t>(ref.step_of(plan.horizon));
  const NoiseField field = NoiseField::sample_steps(ref, ref_steps, {plan.seed, sample_index});

  // keep reference states only at the finest coarse level's times
  std::int64_t finest_coarse = 0;
  for (auto n : plan.levels) {
    if (n < plan.reference_n) finest_coarse = std::max(finest_coarse, n);
  }
  const std::int64_t ratio = finest_coarse == 0 ? 1 : plan.reference_n / finest_coarse;
  const auto stride = static_cast<std::size_t>(ratio * ratio);
  const std::size_t ref_width = ref.num_space();
  std::vector<double> stored((ref_steps / stride + 1) * ref_width);
  integrate(ref, drift, ic.sample(ref), field, ref_steps,
            [&](std::size_t k, std::span<const double> u) {
              if (k % stride == 0) std::copy(u.begin(), u.end(), stored.begin() + (k / stride) * ref_width);
            });

  std::vector<LevelSample> out;
  out.reserve(plan.levels.size());
  for (auto n : plan.levels) {
    const auto grid = GridConfig::make(n, plan.c);
    const auto steps = static_cast<std::size_t>(grid.step_of(plan.horizon));
    const std::size_t width = grid.num_space();
    LevelSample s;
    s.pointwise_pow.assign((steps + 1) * width, 0.0);
    if (n == plan.reference_n) {
      out.push_back(std::move(s));
      continue;
    }
    const auto r = static_cast<std::size_t>(plan.reference_n / n);
    const std::size_t per_stored = r * r / stride;
    const NoiseView view = aggregate(field, grid);
    integrate(grid, drift, ic.sample(grid), view, steps,
              [&](std::size_t k, std::span<const double> u) {
                const double* ref_row = stored.data() + k * per_stored * ref_width;
                for (std::size_t i = 0; i < width; ++i) {
                  const double v = std::pow(std::abs(ref_row[i * r] - u[i]), plan.p);
                  s.pointwise_pow[k * width + i] = v;
                  if (v > s.sup_pow) {
                    s.sup_pow = v;
                    s.argmax_step = static_cast<std::int64_t>(k);
                    s.argmax_index = static_cast<std::int64_t>(i);
                  }
                }
              });
    out.push_back(std::move(s));
  }
  return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_line: need at least two points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: abscissae coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - fit.intercept - fit.slope * x[i]);
  return fit;
}

void fit_rates(RateReport& report) {
  std::vector<double> lx, ly;
  std::vector<std::int64_t> used;
  for (const auto& e : report.per_level) {
    if (e.error > 0.0 && std::isfinite(e.error)) {
      lx.push_back(std::log(static_cast<double>(e.n)));
      ly.push_back(std::log(e.error));
      used.push_back(e.n);
    }
  }
  report.slope.reset();
  report.intercept.reset();
  report.slope_all_levels.reset();
  report.residuals.clear();
  report.excluded_levels.clear();
  report.degenerate = lx.size() < 2;
  if (report.degenerate) return;

  LinearFit fit = fit_line(lx, ly);
  report.slope_all_levels = fit.slope;
  if (lx.size() >= 4) {
    double ssr = 0.0;
    for (double r : fit.residuals) ssr += r * r;
    const double sd = std::sqrt(ssr / static_cast<double>(lx.size() - 2));
    if (std::abs(fit.residuals.front()) > 2.0 * sd) {
      report.excluded_levels.push_back(used.front());
      fit = fit_line(std::vector<double>(lx.begin() + 1, lx.end()),
                     std::vector<double>(ly.begin() + 1, ly.end()));
    }
  }
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.residuals = fit.residuals;
}

RateReport estimate_rates(const ExperimentPlan& plan) {
  plan.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t blocks = (plan.samples + kBlockSize - 1) / kBlockSize;
  std::size_t workers = plan.workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : plan.workers;
  workers = std::min(workers, blocks);

  BlockResult total;
  std::map<std::size_t, BlockResult> pending;
  std::size_t next_fold = 0;
  std::atomic<std::size_t> next_block{0};
  std::mutex mu;
  std::exception_ptr failure;

  auto work = [&] {
    for (;;) {
      const std::size_t b = next_block.fetch_add(1);
      if (b >= blocks) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      BlockResult block;
      try {
        const std::size_t end = std::min(plan.samples, (b + 1) * kBlockSize);
        for (std::size_t s = b * kBlockSize; s < end; ++s) add_sample(block, coupled_sample_error(plan, s));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
      std::lock_guard lock(mu);
      pending.emplace(b, std::move(block));
      for (auto it = pending.find(next_fold); it != pending.end(); it = pending.find(next_fold)) {
        fold_block(total, it->second);
        pending.erase(it);
        ++next_fold;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  RateReport report;
  report.plan = plan;
  report.build_id = build_id();
  const double m = static_cast<double>(plan.samples);
  for (std::size_t l = 0; l < plan.levels.size(); ++l) {
    const auto& acc = total.levels[l];
    const auto grid = GridConfig::make(plan.levels[l], plan.c);
    LevelEstimate e;
    e.n = plan.levels[l];
    const double mean = acc.sum_pow / m;
    const double var = plan.samples > 1 ? std::max(0.0, (acc.sum_pow_sq - m * mean * mean) / (m - 1.0)) : 0.0;
    e.error = root_p(mean, plan.p);
    if (!std::isfinite(e.error)) throw Error("non-finite error estimate at level " + std::to_string(e.n));
    e.stderr_ = mean > 0.0 ? std::pow(mean, 1.0 / plan.p - 1.0) / plan.p * std::sqrt(var / m) : 0.0;
    const auto best = std::max_element(acc.pointwise.begin(), acc.pointwise.end());
    const auto q = static_cast<std::size_t>(best - acc.pointwise.begin());
    const std::size_t width = grid.num_space();
    e.sup_argmax_t = grid.time(static_cast<std::int64_t>(q / width));
    e.sup_argmax_x = grid.point(static_cast<std::int64_t>(q % width));
    e.pointwise_sup_error = root_p(*best / m, plan.p);
    report.per_level.push_back(e);
  }
  fit_rates(report);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RateReport deterministic_rate_experiment(const std::string& initial,
                                         const std::vector<std::int64_t>& levels, double t,
                                         double c) {
  const auto start = std::chrono::steady_clock::now();
  const InitialCondition& ic = find_initial_condition(initial);
  RateReport report;
  report.kind = "deterministic";
  report.build_id = build_id();
  report.plan.c = c;
  report.plan.levels = levels;
  report.plan.reference_n = levels.empty() ? 0 : levels.back();
  report.plan.horizon = t;
  report.plan.samples = 0;
  report.plan.drift = "zero";
  report.plan.initial = ic.name;
  report.reference_slope = -ic.holder_alpha;
  for (auto n : levels) {
    const auto grid = GridConfig::make(n, c);
    const SpectralTable table(grid);
    const auto disc = apply_semigroup_disc(table, ic.sample(grid), t);
    std::vector<double> cont;
    if (ic.series) {
      cont = apply_semigroup_cont(*ic.series, t).sample(grid);
    } else {
      // trigonometric interpolant on a much finer grid, read back at the coarse points
      const std::size_t fine = std::max<std::size_t>(1 << 14, 64 * grid.num_space());
      std::vector<double> samples(fine);
      for (std::size_t i = 0; i < fine; ++i) samples[i] = ic.eval(static_cast<double>(i) / static_cast<double>(fine));
      const auto smooth = apply_semigroup_cont(samples, t, 1e-12);
      const std::size_t r = fine / grid.num_space();
      for (std::size_t i = 0; i < grid.num_space(); ++i) cont.push_back(smooth[i * r]);
    }
    LevelEstimate e;
    e.n = n;
    e.sup_argmax_t = t;
    for (std::size_t i = 0; i < disc.size(); ++i) {
      const double d = std::abs(disc[i] - cont[i]);
      if (d > e.error) {
        e.error = d;
        e.sup_argmax_x = grid.point(static_cast<std::int64_t>(i));
      }
    }
    e.pointwise_sup_error = e.error;
    report.per_level.push_back(e);
  }
  fit_rates(report);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void persist_report(const RateReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ReportIoError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
  if (!out) throw ReportIoError("write failed for " + path.string());
}

RateReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ReportIoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ReportParseError(path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

void write_rate_csv(const RateReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ReportIoError("cannot write " + path.string());
  out.precision(17);
  out << "n,error,stderr\n";
  for (const auto& e : report.per_level) out << e.n << ',' << e.error << ',' << e.stderr_ << '\n';
  if (!out) throw ReportIoError("write failed for " + path.string());
}

}  // namespace fdspde
