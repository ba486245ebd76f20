#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "fdspde/grid.hpp"

namespace fdspde {

/// Identifies one white-noise realisation.
struct NoiseKey {
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;

  friend bool operator==(const NoiseKey&, const NoiseKey&) = default;
};

/// Integral of the noise over the cell [kh, (k+1)h] x [i/2n, (i+1)/2n] of
/// `grid`: a centred Gaussian of variance h/(2n), produced by Philox keyed on
/// (seed, sample_index, k, i) followed by the inverse normal CDF.
double noise_cell_value(const GridConfig& grid, const NoiseKey& key, std::uint64_t k,
                        std::uint64_t i);

/// Standard normal draw from a counter stream independent of the noise cells
/// (distinct Philox key domain). Used for auxiliary randomness in couplings.
double auxiliary_normal(const NoiseKey& key, std::uint64_t counter);

/// Anything that yields noise cell integrals one time slab at a time.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;

  virtual const GridConfig& grid() const = 0;
  virtual std::size_t steps() const = 0;
  /// Writes the 2n cell integrals of time step k into `out`.
  virtual void slab(std::size_t k, std::span<double> out) const = 0;

  double horizon() const { return grid().time(static_cast<std::int64_t>(steps())); }
};

/// Identically zero noise on a grid, for deterministic runs.
class ZeroNoise final : public NoiseSource {
 public:
  ZeroNoise(const GridConfig& grid, std::size_t steps) : grid_(grid), steps_(steps) {}

  const GridConfig& grid() const override { return grid_; }
  std::size_t steps() const override { return steps_; }
  void slab(std::size_t k, std::span<double> out) const override;

 private:
  GridConfig grid_;
  std::size_t steps_;
};

/// Noise increment eta(t_k, x_i) = 2n h^{-1} * cell integral.
double eta(const NoiseSource& source, std::size_t k, std::size_t i);

/// Cell integrals on the finest grid of an experiment, held in memory.
class NoiseField final : public NoiseSource {
 public:
  /// Horizon must be a positive multiple of h.
  static NoiseField sample(const GridConfig& grid, double horizon, const NoiseKey& key);
  static NoiseField sample_steps(const GridConfig& grid, std::size_t steps, const NoiseKey& key);
  /// Wraps externally supplied cells (time-major, k * 2n + i).
  static NoiseField from_cells(const GridConfig& grid, std::vector<double> cells,
                               const NoiseKey& key);

  const GridConfig& grid() const override { return grid_; }
  std::size_t steps() const override { return steps_; }
  void slab(std::size_t k, std::span<double> out) const override;

  const NoiseKey& key() const { return key_; }
  double cell(std::size_t k, std::size_t i) const;
  std::span<const double> cells() const { return *cells_; }
  std::shared_ptr<const std::vector<double>> shared_cells() const { return cells_; }

  /// Little-endian binary dump with header {magic, version, n, c, K, seed, sample_index}.
  void dump(const std::filesystem::path& path) const;
  static NoiseField load(const std::filesystem::path& path);

 private:
  NoiseField(const GridConfig& grid, std::size_t steps, const NoiseKey& key,
             std::shared_ptr<const std::vector<double>> cells);

  GridConfig grid_;
  std::size_t steps_;
  NoiseKey key_;
  std::shared_ptr<const std::vector<double>> cells_;
};

/// Noise of a coarser level obtained by summing fine cells. Each coarse cell is
/// the sum of spatial_ratio x temporal_ratio fine cells, accumulated time-major
/// and left to right so that every route to a coarse cell rounds identically.
class NoiseView final : public NoiseSource {
 public:
  const GridConfig& grid() const override { return grid_; }
  std::size_t steps() const override { return steps_; }
  void slab(std::size_t k, std::span<double> out) const override;

  double cell(std::size_t k, std::size_t i) const;
  std::span<const double> cells() const { return *cells_; }
  const LevelPair& levels() const { return levels_; }

  /// Same view with every cell multiplied by `factor`.
  NoiseView scaled(double factor) const;

  friend NoiseView aggregate(const NoiseField& field, const GridConfig& coarse);

 private:
  NoiseView(const LevelPair& levels, std::size_t steps,
            std::shared_ptr<const std::vector<double>> cells);

  LevelPair levels_;
  GridConfig grid_;
  std::size_t steps_;
  std::shared_ptr<const std::vector<double>> cells_;
};

/// Throws NestingError unless `coarse` nests dyadically in field.grid().
NoiseView aggregate(const NoiseField& field, const GridConfig& coarse);

/// Sum of fine cells making up one coarse cell, in the canonical order.
double aggregate_cell(const NoiseField& fine, const LevelPair& levels, std::size_t k,
                      std::size_t i);

/// Generates coarse slabs on the fly from the counter stream, without ever
/// storing the finest field. Bitwise equal to aggregate(sample(...), coarse).
class StreamingNoise final : public NoiseSource {
 public:
  StreamingNoise(const GridConfig& finest, std::size_t finest_steps, const NoiseKey& key,
                 const GridConfig& target);

  const GridConfig& grid() const override { return levels_.coarse; }
  std::size_t steps() const override { return steps_; }
  void slab(std::size_t k, std::span<double> out) const override;

 private:
  LevelPair levels_;
  std::size_t steps_;
  NoiseKey key_;
};

}  // namespace fdspde
