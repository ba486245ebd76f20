#include "fdspde/noise.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "fdspde/errors.hpp"
#include "fdspde/philox.hpp"

namespace fdspde {

namespace {

using NoPromotion = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

constexpr std::array<char, 8> kMagic = {'F', 'D', 'S', 'P', 'N', 'O', 'I', 'S'};
constexpr std::uint32_t kDumpVersion = 1;

/// Uniform on the open interval (0, 1) from 53 random bits.
double open_uniform(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double standard_normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u, NoPromotion{});
}

void require_nesting(const GridConfig& coarse, const GridConfig& fine) {
  if (coarse.n() > fine.n()) {
    throw NestingError("cannot aggregate to a finer grid");
  }
}

template <typename T>
void put_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw Error("noise dump truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

double noise_cell_value(const GridConfig& grid, const NoiseKey& key, std::uint64_t k,
                        std::uint64_t i) {
  const Philox4x32::Key pkey = {static_cast<std::uint32_t>(key.seed),
                                static_cast<std::uint32_t>(key.seed >> 32)};
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k),
      static_cast<std::uint32_t>(k >> 32), static_cast<std::uint32_t>(key.sample_index)};
  const auto out = Philox4x32::generate(ctr, pkey);
  const double z = standard_normal_quantile(open_uniform(out[0], out[1]));
  return std::sqrt(grid.h() * grid.spacing()) * z;
}

double auxiliary_normal(const NoiseKey& key, std::uint64_t counter) {
  const Philox4x32::Key pkey = {static_cast<std::uint32_t>(key.seed) ^ 0x5A17E3C1u,
                                static_cast<std::uint32_t>(key.seed >> 32) ^ 0xA3D2B7F9u};
  const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(counter),
                                   static_cast<std::uint32_t>(counter >> 32),
                                   static_cast<std::uint32_t>(key.sample_index), 0x4155584Cu};
  const auto out = Philox4x32::generate(ctr, pkey);
  return standard_normal_quantile(open_uniform(out[0], out[1]));
}

void ZeroNoise::slab(std::size_t k, std::span<double> out) const {
  if (k >= steps_) throw NoiseExhausted("zero noise exhausted");
  std::fill(out.begin(), out.end(), 0.0);
}

double eta(const NoiseSource& source, std::size_t k, std::size_t i) {
  const GridConfig& grid = source.grid();
  if (k >= source.steps() || i >= grid.num_space()) {
    throw DimensionError("eta: index (" + std::to_string(k) + ", " + std::to_string(i) +
                         ") out of range");
  }
  std::vector<double> row(grid.num_space());
  source.slab(k, row);
  return static_cast<double>(grid.num_space()) / grid.h() * row[i];
}

// ---------------------------------------------------------------------------
// NoiseField

NoiseField::NoiseField(const GridConfig& grid, std::size_t steps, const NoiseKey& key,
                       std::shared_ptr<const std::vector<double>> cells)
    : grid_(grid), steps_(steps), key_(key), cells_(std::move(cells)) {}

NoiseField NoiseField::sample(const GridConfig& grid, double horizon, const NoiseKey& key) {
  if (!(horizon > 0.0)) throw GridError("noise horizon must be positive");
  return sample_steps(grid, static_cast<std::size_t>(grid.step_of(horizon)), key);
}

NoiseField NoiseField::sample_steps(const GridConfig& grid, std::size_t steps,
                                    const NoiseKey& key) {
  if (key.sample_index > 0xFFFFFFFFull) {
    throw Error("sample_index must fit in 32 bits");
  }
  const std::size_t width = grid.num_space();
  auto cells = std::make_shared<std::vector<double>>(steps * width);
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < width; ++i) {
      (*cells)[k * width + i] = noise_cell_value(grid, key, k, i);
    }
  }
  return NoiseField(grid, steps, key, std::move(cells));
}

NoiseField NoiseField::from_cells(const GridConfig& grid, std::vector<double> cells,
                                  const NoiseKey& key) {
  const std::size_t width = grid.num_space();
  if (cells.size() % width != 0) {
    throw DimensionError("cell count is not a multiple of 2n");
  }
  const std::size_t steps = cells.size() / width;
  return NoiseField(grid, steps, key, std::make_shared<const std::vector<double>>(std::move(cells)));
}

void NoiseField::slab(std::size_t k, std::span<double> out) const {
  const std::size_t width = grid_.num_space();
  if (k >= steps_) {
    throw NoiseExhausted("noise slab " + std::to_string(k) + " beyond horizon of " +
                         std::to_string(steps_) + " steps");
  }
  if (out.size() != width) throw DimensionError("slab buffer has wrong size");
  std::copy_n(cells_->begin() + static_cast<std::ptrdiff_t>(k * width), width, out.begin());
}

double NoiseField::cell(std::size_t k, std::size_t i) const {
  const std::size_t width = grid_.num_space();
  if (k >= steps_ || i >= width) throw DimensionError("noise cell index out of range");
  return (*cells_)[k * width + i];
}

void NoiseField::dump(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(os, kDumpVersion);
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(grid_.n()));
  put_le<double>(os, grid_.c());
  put_le<std::uint64_t>(os, steps_);
  put_le<std::uint64_t>(os, key_.seed);
  put_le<std::uint64_t>(os, key_.sample_index);
  for (double v : *cells_) put_le<double>(os, v);
  if (!os) throw Error("write failed for " + path.string());
}

NoiseField NoiseField::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(path.string() + " is not a noise dump");
  }
  const auto version = get_le<std::uint32_t>(is);
  if (version != kDumpVersion) {
    throw Error("unsupported noise dump version " + std::to_string(version));
  }
  const auto n = get_le<std::uint64_t>(is);
  const auto c = get_le<double>(is);
  const auto steps = get_le<std::uint64_t>(is);
  NoiseKey key;
  key.seed = get_le<std::uint64_t>(is);
  key.sample_index = get_le<std::uint64_t>(is);
  const GridConfig grid = GridConfig::make(static_cast<std::int64_t>(n), c);
  std::vector<double> cells(steps * grid.num_space());
  for (double& v : cells) v = get_le<double>(is);
  return from_cells(grid, std::move(cells), key);
}

// ---------------------------------------------------------------------------
// Aggregation

NoiseView::NoiseView(const LevelPair& levels, std::size_t steps,
                     std::shared_ptr<const std::vector<double>> cells)
    : levels_(levels), grid_(levels.coarse), steps_(steps), cells_(std::move(cells)) {}

void NoiseView::slab(std::size_t k, std::span<double> out) const {
  const std::size_t width = grid_.num_space();
  if (k >= steps_) {
    throw NoiseExhausted("noise slab " + std::to_string(k) + " beyond horizon of " +
                         std::to_string(steps_) + " steps");
  }
  if (out.size() != width) throw DimensionError("slab buffer has wrong size");
  std::copy_n(cells_->begin() + static_cast<std::ptrdiff_t>(k * width), width, out.begin());
}

double NoiseView::cell(std::size_t k, std::size_t i) const {
  const std::size_t width = grid_.num_space();
  if (k >= steps_ || i >= width) throw DimensionError("noise cell index out of range");
  return (*cells_)[k * width + i];
}

NoiseView NoiseView::scaled(double factor) const {
  auto cells = std::make_shared<std::vector<double>>(*cells_);
  for (double& v : *cells) v *= factor;
  return NoiseView(levels_, steps_, std::move(cells));
}

namespace {

/// Accumulates one coarse slab from `temporal_ratio` fine rows, row by row.
template <typename FineRow>
void accumulate_slab(const LevelPair& levels, std::size_t coarse_k, FineRow&& fine_row,
                     std::span<double> out) {
  const auto sr = static_cast<std::size_t>(levels.spatial_ratio);
  const auto tr = static_cast<std::size_t>(levels.temporal_ratio);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t dk = 0; dk < tr; ++dk) {
    const std::span<const double> row = fine_row(coarse_k * tr + dk);
    for (std::size_t ci = 0; ci < out.size(); ++ci) {
      double acc = out[ci];
      for (std::size_t di = 0; di < sr; ++di) acc += row[ci * sr + di];
      out[ci] = acc;
    }
  }
}

}  // namespace

NoiseView aggregate(const NoiseField& field, const GridConfig& coarse) {
  require_nesting(coarse, field.grid());
  const LevelPair levels = make_level_pair(coarse, field.grid());
  const auto tr = static_cast<std::size_t>(levels.temporal_ratio);
  if (levels.spatial_ratio == 1) {
    return NoiseView(levels, field.steps(), field.shared_cells());
  }
  const std::size_t steps = field.steps() / tr;
  const std::size_t fine_width = field.grid().num_space();
  const std::size_t width = coarse.num_space();
  auto cells = std::make_shared<std::vector<double>>(steps * width);
  const auto fine = field.cells();
  for (std::size_t k = 0; k < steps; ++k) {
    accumulate_slab(
        levels, k,
        [&](std::size_t fk) { return fine.subspan(fk * fine_width, fine_width); },
        std::span<double>(cells->data() + k * width, width));
  }
  return NoiseView(levels, steps, std::move(cells));
}

double aggregate_cell(const NoiseField& fine, const LevelPair& levels, std::size_t k,
                      std::size_t i) {
  const auto sr = static_cast<std::size_t>(levels.spatial_ratio);
  const auto tr = static_cast<std::size_t>(levels.temporal_ratio);
  double acc = 0.0;
  for (std::size_t dk = 0; dk < tr; ++dk) {
    for (std::size_t di = 0; di < sr; ++di) acc += fine.cell(k * tr + dk, i * sr + di);
  }
  return acc;
}

StreamingNoise::StreamingNoise(const GridConfig& finest, std::size_t finest_steps,
                               const NoiseKey& key, const GridConfig& target)
    : levels_((require_nesting(target, finest), make_level_pair(target, finest))),
      steps_(finest_steps / static_cast<std::size_t>(levels_.temporal_ratio)),
      key_(key) {}

void StreamingNoise::slab(std::size_t k, std::span<double> out) const {
  if (k >= steps_) {
    throw NoiseExhausted("noise slab " + std::to_string(k) + " beyond horizon of " +
                         std::to_string(steps_) + " steps");
  }
  if (out.size() != levels_.coarse.num_space()) throw DimensionError("slab buffer has wrong size");
  const std::size_t fine_width = levels_.fine.num_space();
  std::vector<double> row(fine_width);
  accumulate_slab(
      levels_, k,
      [&](std::size_t fk) {
        for (std::size_t i = 0; i < fine_width; ++i) row[i] = noise_cell_value(levels_.fine, key_, fk, i);
        return std::span<const double>(row);
      },
      out);
}

}  // namespace fdspde
