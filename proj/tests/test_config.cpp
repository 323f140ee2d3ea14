#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "haltbound/config.hpp"
#include "haltbound/errors.hpp"

using namespace haltbound;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / ("haltbound_test_" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("a full config parses") {
  const auto doc = json::parse(R"({
    "gbm": {"y0": 36.5, "mu": -0.0019, "sigma": 0.0238},
    "plant": {"M": 0.048, "P": 14.5, "T": 49, "upgrade": {"day": 8, "P_new": 17.2, "M_new": 0.041}},
    "solver": {"samples_per_node": 500, "seed": 7, "grid": {"levels": 120, "follow_drift": true},
               "smoothing": "moving-average", "smoothing_window": 5},
    "surface": {"p_min": 10, "p_max": 40, "p_step": 2}
  })");
  const auto cfg = parse_run_config(doc);
  REQUIRE(cfg.gbm);
  CHECK(cfg.gbm->sigma == 0.0238);
  REQUIRE(cfg.plant);
  CHECK(cfg.plant->upgrade->effective_day == 8);
  CHECK(cfg.solver.samples_per_node == 500);
  CHECK(cfg.solver.seed.value == 7);
  CHECK(cfg.solver.grid.levels == 120);
  CHECK(cfg.solver.grid.follow_drift);
  CHECK(cfg.smoothing.kind == SmoothingMethod::Kind::MovingAverage);
  CHECK(cfg.smoothing.window == 5);
  REQUIRE(cfg.surface);
  CHECK(cfg.surface->p_values.size() == 16);
  CHECK(cfg.surface->p_values.back() == 40.0);
  CHECK(resolve_gbm(cfg).y0 == 36.5);
}

TEST_CASE("config errors name the field") {
  const auto bad = [](const char* text) { return parse_run_config(json::parse(text)); };
  CHECK_THROWS_WITH_AS(bad(R"({"plant": {"M": 1, "P": 1, "T": 5, "colour": 3}})"),
                       doctest::Contains("plant.colour: unknown field"), ConfigError);
  CHECK_THROWS_WITH_AS(bad(R"({"plant": {"M": 1, "P": 1, "T": 5.5}})"), doctest::Contains("plant.T"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(bad(R"({"plant": {"M": 1, "T": 5}})"), doctest::Contains("plant.P"), ConfigError);
  CHECK_THROWS_WITH_AS(bad(R"({"gbm": {"y0": 1, "mu": 0, "sigma": -1}})"), doctest::Contains("gbm"),
                       ConfigError);
  CHECK_THROWS_AS(bad(R"({"gbm": {"y0": 1, "mu": 0, "sigma": 0}, "estimate": {"csv": "x.csv"}})"),
                  ConfigError);
  CHECK_THROWS_WITH_AS(bad(R"({"solver": {"smoothing": "spline"}})"), doctest::Contains("solver.smoothing"),
                       ConfigError);
  CHECK_THROWS_AS(bad(R"({"solver": {"samples_per_node": 10}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"surface": {"p_values": [20, 10]}})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"unknown": 1})"), ConfigError);
  CHECK_THROWS_AS(resolve_gbm(RunConfig{}), ConfigError);
}

TEST_CASE("estimation source resolves against the config directory") {
  const auto dir = scratch_dir("estimate");
  fs::copy_file(fs::path(HALTBOUND_FIXTURES) / "constant_ratio.csv", dir / "prices.csv");
  {
    std::ofstream out(dir / "run.json");
    out << R"({"estimate": {"csv": "prices.csv", "from": "2019-01-10"}, "plant": {"M": 1, "P": 5, "T": 10}})";
  }
  const auto cfg = load_run_config(dir / "run.json");
  REQUIRE(cfg.estimation);
  CHECK(cfg.estimation->csv == dir / "prices.csv");
  const auto g = resolve_gbm(cfg);
  CHECK(g.mu == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(g.sigma < 1e-9);
  const auto series = load_price_csv(dir / "prices.csv");
  CHECK(g.y0 == series.entries.back().price);
  fs::remove_all(dir);
}

TEST_CASE("load_run_config reports unreadable input") {
  const auto dir = scratch_dir("bad_json");
  {
    std::ofstream out(dir / "run.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_run_config(dir / "run.json"), ConfigError);
  CHECK_THROWS_AS(load_run_config(dir / "missing.json"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("write_files_atomically") {
  const auto dir = scratch_dir("atomic");
  write_files_atomically(dir / "out", {{"a.csv", "1\n"}, {"b.json", "{}"}});
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(dir / "out")) {
    ++count;
    CHECK(entry.path().extension() != ".tmp");
  }
  CHECK(count == 2);
  std::ifstream in(dir / "out" / "a.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "1");

  // a directory occupying the target name makes the rename fail
  fs::create_directories(dir / "out2" / "b.json" / "x");
  CHECK_THROWS_AS(write_files_atomically(dir / "out2", {{"a.csv", "1"}, {"b.json", "{}"}}), DataError);
  for (const auto& entry : fs::directory_iterator(dir / "out2")) {
    CHECK(entry.path().extension() != ".tmp");
  }
  fs::remove_all(dir);
}
