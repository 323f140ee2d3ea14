#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <doctest.h>

#include "haltbound/errors.hpp"
#include "haltbound/solver.hpp"

using namespace haltbound;

namespace {

const GbmParams kShajiaoGbm{21.43, -0.0020, 0.0603};
const PlantParams kShajiao{0.014, 14.7, 246, std::nullopt};

SolverConfig small_config(std::size_t samples = 400, std::size_t levels = 80) {
  SolverConfig c;
  c.samples_per_node = samples;
  c.grid.levels = levels;
  return c;
}

Boundary make_boundary(std::vector<double> values, double floor = 0.0) {
  Boundary b;
  for (std::size_t i = 0; i < values.size(); ++i) {
    b.times.push_back(static_cast<double>(i));
    b.values.push_back(values[i]);
    b.status.push_back(std::isinf(values[i]) ? BoundaryStatus::AboveGrid : BoundaryStatus::Found);
    b.lower_bound.push_back(floor);
  }
  return b;
}

}  // namespace

TEST_CASE("TimeGrid::uniform") {
  const auto g = TimeGrid::uniform(49, 4.9);
  CHECK(g.steps() == 10);
  CHECK(g.times.back() == 49.0);
  CHECK(g.index_of(24.5) == 5u);
  CHECK_FALSE(g.index_of(3.0));
  CHECK_THROWS_AS(TimeGrid::uniform(10, 3), ConfigError);
  CHECK_THROWS_AS(TimeGrid::uniform(10, 0), ConfigError);
}

TEST_CASE("price grids") {
  const auto g = geometric_grid(10.0, 40.0, 3);
  CHECK(g.base[0] == 10.0);
  CHECK(g.base[1] == doctest::Approx(20.0));
  CHECK(g.base[2] == 40.0);
  CHECK(cell_width_at(g.base, 15.0) == doctest::Approx(10.0));
  CHECK(cell_width_at(g.base, 100.0) == doctest::Approx(20.0));

  const auto d = make_price_grid(GridSpec{}, kShajiaoGbm, kShajiao);
  CHECK(d.size() == 200);
  CHECK(d.base.front() == doctest::Approx(21.43 / 2));
  CHECK(d.base.back() == doctest::Approx(3 * 21.43));

  const auto drifting = geometric_grid(10.0, 40.0, 3, -0.01);
  CHECK(drifting.level(2, 100.0) == doctest::Approx(40.0 * std::exp(-1.0)));

  CHECK_THROWS_WITH_AS(validate(PriceGrid{{1.0}, 0.0}), doctest::Contains("degenerate price grid"),
                       ConfigError);
  CHECK_THROWS_AS(validate(PriceGrid{{1.0, 1.0}, 0.0}), ConfigError);
  CHECK_THROWS_AS(validate(PriceGrid{{-1.0, 1.0}, 0.0}), ConfigError);
}

TEST_CASE("solver config validation") {
  auto c = small_config();
  c.samples_per_node = 99;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config();
  c.price_grid = PriceGrid{{2.0, 1.0}, 0.0};
  CHECK_THROWS_AS(solve_backward(kShajiaoGbm, PlantParams{0.014, 14.7, 10, {}}, TimeGrid::uniform(10),
                                 c),
                  ConfigError);
  CHECK_THROWS_AS(solve_backward(kShajiaoGbm, kShajiao, TimeGrid::uniform(10), small_config()),
                  ConfigError);
  CHECK(resolved_tolerance(small_config(), kShajiao) == doctest::Approx(1e-6 * 14.7 * 246));
}

TEST_CASE("deterministic case telescopes") {
  // sigma = 0 and mu = 0: every transition lands on its own node
  const GbmParams g{20.0, 0.0, 0.0};
  const PlantParams plant{1.0, 25.0, 30, {}};
  auto config = small_config(100, 60);
  const auto grid = solve_backward(g, plant, TimeGrid::uniform(30), config);

  for (std::size_t j = 0; j < grid.cols; ++j) CHECK(grid.U[grid.at(30, j)] == 0.0);
  const auto ys = grid.levels(0);
  for (std::size_t j = 0; j < grid.cols; ++j) {
    const double expected = ys[j] < 25.0 ? (25.0 - ys[j]) * 30 : 0.0;
    CHECK(grid.U[grid.at(0, j)] == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
  }

  const auto b = extract_boundary(grid, config);
  for (std::size_t i = 0; i < b.size(); ++i) {
    REQUIRE(b.found(i));
    CHECK(b.values[i] >= 25.0);
    CHECK(b.values[i] - 25.0 <= cell_width_at(grid.levels(i), 25.0));
  }
}

TEST_CASE("Shajiao 2019 solve") {
  SolverConfig config;  // spec defaults: 200 levels, 2000 samples
  const auto tg = TimeGrid::uniform(246);
  const auto grid = solve_backward(kShajiaoGbm, kShajiao, tg, config);

  SUBCASE("continuing beats halting at the starting price") {
    const auto v = value_at(grid, 0.0, 21.43);
    CHECK(v.v > v.g);
    CHECK(v.u > 0.0);
    CHECK(v.g == doctest::Approx(45.1245026980716551).epsilon(0.01));
  }
  SUBCASE("terminal boundary sits at P") {
    const auto b = extract_boundary(grid, config);
    REQUIRE(b.found(246));
    CHECK(std::abs(b.values[246] - 14.7) <= cell_width_at(grid.levels(246), 14.7));
  }
  SUBCASE("doubling the sample count barely moves b(0)") {
    auto doubled = config;
    doubled.samples_per_node *= 2;
    const auto b1 = extract_boundary(grid, config);
    const auto b2 = extract_boundary(solve_backward(kShajiaoGbm, kShajiao, tg, doubled), doubled);
    REQUIRE(b1.found(0));
    REQUIRE(b2.found(0));
    CHECK(std::abs(b2.values[0] / b1.values[0] - 1.0) < 0.05);
  }
}

TEST_CASE("solve is deterministic for a fixed seed") {
  const PlantParams plant{0.02, 15.0, 40, {}};
  const auto tg = TimeGrid::uniform(40);
  const auto a = solve_backward(kShajiaoGbm, plant, tg, small_config());
  const auto b = solve_backward(kShajiaoGbm, plant, tg, small_config());
  CHECK(a.U == b.U);
  CHECK(a.V == b.V);
  auto other = small_config();
  other.seed = Seed{1};
  CHECK(a.U != solve_backward(kShajiaoGbm, plant, tg, other).U);
}

TEST_CASE("value_at") {
  const PlantParams plant{0.02, 15.0, 20, {}};
  const auto grid = solve_backward(kShajiaoGbm, plant, TimeGrid::uniform(20), small_config());
  const auto ys = grid.levels(3);
  const auto node = value_at(grid, 3.0, ys[10]);
  CHECK(node.u == grid.U[grid.at(3, 10)]);
  CHECK(node.v == grid.V[grid.at(3, 10)]);
  CHECK(node.g == grid.G[grid.at(3, 10)]);

  // top of the grid stops, so U is flat zero between the last two nodes
  const double mid = 0.5 * (ys[ys.size() - 2] + ys.back());
  CHECK(value_at(grid, 3.0, mid).u == 0.0);

  for (double y = ys.front(); y < ys.back(); y *= 1.07) {
    const auto q = value_at(grid, 3.0, y);
    CHECK(q.v - q.g >= -1e-12);
  }
  CHECK_THROWS_AS(value_at(grid, 3.5, ys[3]), std::out_of_range);
  CHECK_THROWS_AS(value_at(grid, 3.0, ys.front() * 0.99), std::out_of_range);
  CHECK_THROWS_AS(value_at(grid, 3.0, ys.back() * 1.01), std::out_of_range);
}

TEST_CASE("smooth_boundary") {
  const auto raw = make_boundary({30, 40, 30, 35, 20});
  CHECK(smooth_boundary(raw, {}).values == raw.values);

  const auto mono = make_boundary({40, 38, 38, 30, 20});
  CHECK(smooth_boundary(mono, {SmoothingMethod::Kind::Isotonic}).values == mono.values);

  const auto ma = smooth_boundary(raw, {SmoothingMethod::Kind::MovingAverage, 3});
  CHECK(ma.values[1] == doctest::Approx(100.0 / 3.0));
  CHECK(ma.values[2] == doctest::Approx(35.0));
  CHECK(ma.values.back() == 20.0);

  const auto floored = smooth_boundary(make_boundary({30, 40, 30, 35, 20}, 34.0),
                                       {SmoothingMethod::Kind::MovingAverage, 3});
  CHECK(floored.values[1] == 34.0);

  const auto iso = smooth_boundary(make_boundary({40, 36, 38, 30, 20}),
                                   {SmoothingMethod::Kind::Isotonic});
  CHECK(iso.values == std::vector<double>{40, 37, 37, 30, 20});

  const double inf = std::numeric_limits<double>::infinity();
  const auto sparse = make_boundary({inf, inf, 30, 20});
  CHECK_THROWS_AS(smooth_boundary(sparse, {SmoothingMethod::Kind::Isotonic}), ConfigError);
  CHECK(smooth_boundary(sparse, {}).values.size() == 4);
}

TEST_CASE("boundary CSV") {
  const double inf = std::numeric_limits<double>::infinity();
  std::ostringstream out;
  write_boundary_csv(out, make_boundary({inf, 36.8, 14.7}, 14.7));
  CHECK(out.str() ==
        "t,b,status,lower_bound\n"
        "0,inf,ABOVE_GRID,14.7\n"
        "1,36.8,FOUND,14.7\n"
        "2,14.7,FOUND,14.7\n");
}
