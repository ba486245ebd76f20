#include <doctest.h>

#include "fdspde/errors.hpp"
#include "fdspde/grid.hpp"

using namespace fdspde;

TEST_CASE("make_grid examples") {
  const auto g = GridConfig::make(2, 0.25);
  CHECK(g.h() == 1.0 / 64.0);
  CHECK(g.num_space() == 4);
  CHECK_THROWS_AS(GridConfig::make(2, 0.5), CflViolation);
  CHECK_THROWS_AS(GridConfig::make(2, 0.0), CflViolation);
  CHECK_THROWS_AS(GridConfig::make(2, -0.1), CflViolation);
  CHECK_THROWS_AS(GridConfig::make(0, 0.25), GridError);
  const auto g1 = GridConfig::make(1, 0.25);
  CHECK(g1.h() == 1.0 / 16.0);
  CHECK(g1.num_space() == 2);
}

TEST_CASE("h (2n)^2 = c up to one rounding") {
  for (std::int64_t n : {1, 3, 7, 64, 1000}) {
    for (double c : {0.1, 0.25, 0.33, 0.49}) {
      const auto g = GridConfig::make(n, c);
      const double m = static_cast<double>(2 * n);
      CHECK(std::abs(g.h() * m * m - c) <= 2e-16 * c);
      CHECK(g.spacing() == 1.0 / m);
    }
  }
}

TEST_CASE("kappa examples and invariants") {
  const auto g = GridConfig::make(2, 0.25);
  CHECK(g.kappa(0.02) == 0.015625);
  CHECK(g.kappa(0.0) == 0.0);
  for (int k = 0; k < 200; ++k) CHECK(g.kappa(k / 64.0) == k / 64.0);
  for (double t = 0.0; t < 2.0; t += 0.00731) {
    const double kt = g.kappa(t);
    CHECK(g.kappa(kt) == kt);
    CHECK(t - kt >= -1e-15);
    CHECK(t - kt < g.h());
  }
  CHECK_THROWS_AS(g.kappa(-1.0), GridError);
}

TEST_CASE("rho examples and invariants") {
  CHECK(GridConfig::make(2, 0.25).rho(0.3) == 0.25);
  CHECK(GridConfig::make(2, 0.25).rho(0.25) == 0.25);
  CHECK(GridConfig::make(1, 0.25).rho(0.999) == 0.5);
  const auto g = GridConfig::make(8, 0.3);
  for (double x = 0.0; x < 1.0; x += 0.0137) {
    const double r = g.rho(x);
    CHECK(g.rho(r) == r);
    CHECK(x - r >= -1e-15);
    CHECK(x - r < g.spacing());
  }
}

TEST_CASE("periodic addition") {
  const auto g = GridConfig::make(4, 0.25);
  CHECK(g.wrap(7 + 1) == 0);
  CHECK(g.point(7 + 1) == 0.0);
  CHECK(g.wrap(-1) == 7);
  CHECK(g.wrap(-17) == 7);
}

TEST_CASE("level pairs") {
  const auto c4 = GridConfig::make(4, 0.25);
  const auto c8 = GridConfig::make(8, 0.25);
  const auto lp = make_level_pair(c4, c8);
  CHECK(lp.spatial_ratio == 2);
  CHECK(lp.temporal_ratio == 4);
  CHECK(c4.h() / c8.h() == 4.0);
  CHECK_THROWS_AS(make_level_pair(c4, GridConfig::make(12, 0.25)), NestingError);
  CHECK_THROWS_AS(make_level_pair(GridConfig::make(4, 0.2), c8), NestingError);
  CHECK(make_level_pair(c4, GridConfig::make(32, 0.25)).temporal_ratio == 64);
}

TEST_CASE("coarse points and times lie on finer grids") {
  const auto coarse = GridConfig::make(4, 0.25);
  const auto fine = GridConfig::make(32, 0.25);
  for (std::int64_t i = 0; i < 8; ++i) {
    const double x = coarse.point(i);
    CHECK(fine.point(fine.rho_index(x)) == x);
  }
  for (std::int64_t k = 0; k < 50; ++k) {
    const double t = coarse.time(k);
    CHECK(fine.on_time_grid(t));
    CHECK(fine.time(fine.step_of(t)) == t);
  }
  CHECK_FALSE(coarse.on_time_grid(fine.h()));
  CHECK_THROWS_AS(coarse.step_of(fine.h()), GridError);
}
