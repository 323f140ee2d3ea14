#include <cmath>
#include <limits>
#include <sstream>

#include <doctest.h>

#include "haltbound/errors.hpp"
#include "haltbound/scenario.hpp"

using namespace haltbound;

namespace {

Boundary flat_boundary(std::size_t days, double level) {
  Boundary b;
  for (std::size_t i = 0; i <= days; ++i) {
    b.times.push_back(static_cast<double>(i));
    b.values.push_back(level);
    b.status.push_back(BoundaryStatus::Found);
    b.lower_bound.push_back(0.0);
  }
  return b;
}

SolverConfig quick_config() {
  SolverConfig c;
  c.samples_per_node = 300;
  c.grid.levels = 80;
  return c;
}

}  // namespace

TEST_CASE("monitor") {
  const auto b = flat_boundary(10, 30.0);
  SUBCASE("first touch") {
    const auto r = monitor(b, std::vector<double>{28, 29, 31});
    CHECK(r.crossed);
    CHECK(r.crossing_index == 2u);
    CHECK(r.crossing_price == 31.0);
    CHECK(r.boundary_at_crossing == 30.0);
  }
  SUBCASE("touching counts as crossing") {
    CHECK(monitor(b, std::vector<double>{29.9, 30.0}).crossing_index == 1u);
  }
  SUBCASE("never crosses") {
    const auto r = monitor(b, std::vector<double>{1, 2, 3});
    CHECK_FALSE(r.crossed);
    CHECK_FALSE(r.crossing_index);
    const nlohmann::json j = r;
    CHECK(j.at("crossed") == false);
    CHECK(j.at("crossing_price").is_null());
  }
  SUBCASE("prepending quiet days shifts the crossing") {
    const std::vector<double> base{25, 27, 33, 20};
    const auto r0 = monitor(b, base);
    for (std::size_t k = 1; k <= 4; ++k) {
      std::vector<double> shifted(k, 29.0);
      shifted.insert(shifted.end(), base.begin(), base.end());
      const auto rk = monitor(b, shifted);
      REQUIRE(rk.crossed);
      CHECK(*rk.crossing_index == *r0.crossing_index + k);
    }
  }
  SUBCASE("above-grid days never trigger") {
    auto tall = b;
    tall.values[0] = std::numeric_limits<double>::infinity();
    tall.status[0] = BoundaryStatus::AboveGrid;
    CHECK(monitor(tall, std::vector<double>{1e9, 31}).crossing_index == 1u);
  }
  SUBCASE("series longer than the horizon") {
    CHECK_THROWS_AS(monitor(b, std::vector<double>(12, 1.0)), DataError);
  }
  SUBCASE("coarse boundary grid cannot be aligned with daily prices") {
    Boundary coarse = flat_boundary(5, 30.0);
    for (auto& t : coarse.times) t *= 2.0;
    CHECK_THROWS_AS(monitor(coarse, std::vector<double>{1, 2, 3}), DataError);
  }
}

TEST_CASE("monitor a price file") {
  const auto series = load_price_csv(std::string(HALTBOUND_FIXTURES) + "/below_boundary.csv");
  const auto r = monitor(flat_boundary(40, 10.0), series);
  CHECK_FALSE(r.crossed);
}

TEST_CASE("apply_upgrade") {
  const GbmParams g{36.5, -0.0019, 0.0238};
  SUBCASE("no-op upgrade") {
    const PlantParams plant{0.048, 14.5, 49, Upgrade{8, 14.5, 0.048}};
    const auto r = apply_upgrade(g, plant, quick_config());
    CHECK(r.before.values == r.after.values);
    CHECK(r.composite.values == r.before.values);
  }
  SUBCASE("higher unit profit lifts the boundary") {
    const PlantParams plant{0.048, 14.5, 49, Upgrade{8, 17.2, 0.041}};
    const auto r = apply_upgrade(g, plant, quick_config());
    bool strict = false;
    for (std::size_t i = 0; i < r.before.size(); ++i) {
      CHECK(r.after.values[i] >= r.before.values[i]);
      strict = strict || r.after.values[i] > r.before.values[i];
    }
    CHECK(strict);
    CHECK(r.composite.values[7] == r.before.values[7]);
    CHECK(r.composite.values[8] == r.after.values[8]);
    CHECK(r.composite.values.back() == r.after.values.back());
  }
  SUBCASE("missing upgrade") {
    CHECK_THROWS_AS(apply_upgrade(g, PlantParams{0.048, 14.5, 49, {}}, quick_config()), ConfigError);
  }
}

TEST_CASE("surface") {
  const GbmParams g{40.0, -0.0014, 0.0805};
  const auto config = quick_config();

  SUBCASE("a single p reproduces the plain solve") {
    const auto s = surface(g, 30, {20.0}, config);
    const PlantParams plant{0.7, 20.0, 30, {}};
    const auto b = extract_boundary(solve_backward(g, plant, TimeGrid::uniform(30), config), config);
    REQUIRE(s.B.size() == 1);
    CHECK(s.B[0] == b.values);
  }
  SUBCASE("lifted as p rises") {
    const auto s = surface(g, 30, {10, 15, 20, 25}, config);
    for (std::size_t i = 0; i < s.times.times.size(); ++i) {
      for (std::size_t k = 1; k < s.p_values.size(); ++k) CHECK(s.at(i, k) >= s.at(i, k - 1));
    }
    CHECK(curvature_in_p(s)[0].size() == 2);
  }
  SUBCASE("p values must be positive and increasing") {
    CHECK_THROWS_AS(surface(g, 30, {}, config), ConfigError);
    CHECK_THROWS_AS(surface(g, 30, {20, 10}, config), ConfigError);
    CHECK_THROWS_AS(surface(g, 30, {-1, 10}, config), ConfigError);
  }
}

TEST_CASE("min_survival_p") {
  SurfaceGrid s;
  s.p_values = {10, 20, 30};
  s.times = TimeGrid::uniform(2);
  const double inf = std::numeric_limits<double>::infinity();
  s.B = {{15, 12, 10}, {25, 22, 20}, {35, inf, 30}};
  CHECK(min_survival_p(s, 0, 5.0) == 10.0);
  CHECK_FALSE(min_survival_p(s, 0, 40.0));
  CHECK(min_survival_p(s, 0, 16.0) == 20.0);
  CHECK(min_survival_p(s, 1, 30.0) == 30.0);
  CHECK(min_survival_p(s, 2, 25.0) == 30.0);
  CHECK_THROWS_AS(min_survival_p(s, 0.5, 1.0), std::out_of_range);

  // a higher price never needs a smaller p
  for (std::size_t i = 0; i < 3; ++i) {
    double last = 0.0;
    for (double y = 1.0; y < 40.0; y += 0.5) {
      const auto p = min_survival_p(s, static_cast<double>(i), y);
      if (!p) break;
      CHECK(*p >= last);
      last = *p;
    }
  }

  std::ostringstream csv;
  write_surface_csv(csv, s);
  CHECK(csv.str().rfind("t,p,B\n0,10,15\n0,20,25\n", 0) == 0);
  const auto j = surface_json(s);
  CHECK(j.at("p_values").size() == 3);
  CHECK(j.at("B").at(1).at(2).is_null());
  CHECK(j.at("B").at(0).at(1) == 25.0);
}
