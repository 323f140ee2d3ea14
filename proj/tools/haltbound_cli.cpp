// haltbound: estimate allowance price dynamics and compute production-halt
// boundaries from a JSON run configuration.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "haltbound/config.hpp"
#include "haltbound/errors.hpp"
#include "haltbound/market_data.hpp"
#include "haltbound/scenario.hpp"
#include "haltbound/solver.hpp"

namespace {

using namespace haltbound;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

struct Overrides {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> grid_levels;
};

RunConfig load_with_overrides(const Overrides& o) {
  if (o.config_path.empty()) throw ConfigError("--config is required");
  auto cfg = load_run_config(o.config_path);
  if (o.seed) cfg.solver.seed = Seed{*o.seed};
  if (o.samples) cfg.solver.samples_per_node = *o.samples;
  if (o.grid_levels) cfg.solver.grid.levels = *o.grid_levels;
  validate(cfg.solver);
  return cfg;
}

const PlantParams& require_plant(const RunConfig& cfg) {
  if (!cfg.plant) throw ConfigError("plant: required for this command");
  return *cfg.plant;
}

std::string boundary_csv(const Boundary& b) {
  std::ostringstream out;
  write_boundary_csv(out, b);
  return out.str();
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct Solved {
  GbmParams gbm;
  Boundary raw;
  Boundary smoothed;
  double seconds;
};

Solved run_solver(const RunConfig& cfg) {
  const auto& plant = require_plant(cfg);
  const GbmParams gbm = resolve_gbm(cfg);
  const auto start = std::chrono::steady_clock::now();
  const auto times = TimeGrid::uniform(plant.horizon, cfg.solver.delta);
  const auto grid = solve_backward(gbm, plant, times, cfg.solver);
  Boundary raw = extract_boundary(grid, cfg.solver);
  Boundary smoothed = smooth_boundary(raw, cfg.smoothing);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {gbm, std::move(raw), std::move(smoothed), seconds};
}

int cmd_estimate(const Overrides& o, const std::string& csv, const std::string& from,
                 const std::string& to, const CsvFormat& format) {
  EstimationSource src;
  if (!o.config_path.empty()) {
    const auto cfg = load_run_config(o.config_path);
    if (!cfg.estimation) throw ConfigError("estimate: config has no estimate block");
    src = *cfg.estimation;
  } else {
    if (csv.empty()) throw ConfigError("estimate: --csv or --config is required");
    src.csv = csv;
    src.format = format;
    if (!from.empty()) src.from = parse_iso_date(from);
    if (!to.empty()) src.to = parse_iso_date(to);
  }
  const auto all = load_price_csv(src.csv, src.format);
  const auto win = window(all, src.from ? &*src.from : nullptr, src.to ? &*src.to : nullptr);
  const auto est = estimate_gbm(log_returns(win));
  std::cout << json(est).dump() << '\n';
  return kOk;
}

int cmd_solve(const Overrides& o) {
  const auto cfg = load_with_overrides(o);
  const auto s = run_solver(cfg);
  json summary{{"b0", number_or_null(s.raw.values.front())},
               {"bT", number_or_null(s.raw.values.back())},
               {"runtime_seconds", s.seconds},
               {"seed", cfg.solver.seed.value},
               {"samples_per_node", cfg.solver.samples_per_node},
               {"grid_levels", cfg.solver.price_grid ? cfg.solver.price_grid->size() : cfg.solver.grid.levels},
               {"found", s.raw.found_count()},
               {"gbm", s.gbm},
               {"plant", *cfg.plant}};
  std::vector<std::pair<std::string, std::string>> files{{"boundary.csv", boundary_csv(s.raw)}};
  if (cfg.smoothing.kind != SmoothingMethod::Kind::None) {
    files.emplace_back("boundary_smoothed.csv", boundary_csv(s.smoothed));
  }
  files.emplace_back("summary.json", summary.dump(2) + "\n");
  write_files_atomically(o.out_dir, files);
  std::cout << summary.dump() << '\n';
  return kOk;
}

int cmd_monitor(const Overrides& o) {
  const auto cfg = load_with_overrides(o);
  if (!cfg.monitor) throw ConfigError("monitor: required for this command");
  const auto all = load_price_csv(cfg.monitor->csv, cfg.monitor->format);
  const auto prices = window(all, cfg.monitor->from ? &*cfg.monitor->from : nullptr, nullptr);
  const auto s = run_solver(cfg);
  const auto report = monitor(s.raw, prices);
  json out = report;
  if (report.crossing_index) {
    out["crossing_date"] = format_iso_date(prices.entries[*report.crossing_index].date);
  }
  write_files_atomically(o.out_dir, {{"boundary.csv", boundary_csv(s.raw)},
                                     {"monitor.json", out.dump(2) + "\n"}});
  std::cout << out.dump() << '\n';
  return kOk;
}

int cmd_upgrade(const Overrides& o) {
  const auto cfg = load_with_overrides(o);
  const auto& plant = require_plant(cfg);
  const GbmParams gbm = resolve_gbm(cfg);
  const auto r = apply_upgrade(gbm, plant, cfg.solver);
  double min_gap = std::numeric_limits<double>::infinity();
  double max_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.before.size(); ++i) {
    if (!r.before.found(i) || !r.after.found(i)) continue;
    min_gap = std::min(min_gap, r.after.values[i] - r.before.values[i]);
    max_gap = std::max(max_gap, r.after.values[i] - r.before.values[i]);
  }
  json summary{{"effective_day", r.effective_day},
               {"before_b0", number_or_null(r.before.values.front())},
               {"after_b0", number_or_null(r.after.values.front())},
               {"min_gap", number_or_null(min_gap)},
               {"max_gap", number_or_null(max_gap)},
               {"seed", cfg.solver.seed.value}};
  write_files_atomically(o.out_dir, {{"boundary_before.csv", boundary_csv(r.before)},
                                     {"boundary_after.csv", boundary_csv(r.after)},
                                     {"boundary_composite.csv", boundary_csv(r.composite)},
                                     {"upgrade.json", summary.dump(2) + "\n"}});
  std::cout << summary.dump() << '\n';
  return kOk;
}

int cmd_surface(const Overrides& o) {
  const auto cfg = load_with_overrides(o);
  if (!cfg.surface) throw ConfigError("surface: required for this command");
  const auto& plant = require_plant(cfg);
  const GbmParams gbm = resolve_gbm(cfg);
  const auto surf = surface(gbm, plant.horizon, cfg.surface->p_values, cfg.solver);
  std::ostringstream csv;
  write_surface_csv(csv, surf);
  json diag{{"p_values", surf.p_values}, {"curvature_in_p", json::array()}};
  for (const auto& row : curvature_in_p(surf)) {
    json r = json::array();
    for (double c : row) r.push_back(number_or_null(c));
    diag["curvature_in_p"].push_back(r);
  }
  write_files_atomically(o.out_dir, {{"surface.csv", csv.str()},
                                     {"surface.json", surface_json(surf).dump() + "\n"},
                                     {"surface_diagnostics.json", diag.dump() + "\n"}});
  std::cout << json{{"p_values", surf.p_values.size()}, {"times", surf.times.times.size()}}.dump()
            << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal production-halt boundaries under stochastic carbon allowance prices"};
  app.require_subcommand(1);

  Overrides o;
  std::string csv, from, to;
  CsvFormat format;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON run configuration");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "master seed override");
    sub->add_option("--samples", o.samples, "samples per node override");
    sub->add_option("--grid", o.grid_levels, "price grid levels override");
  };

  auto* estimate = app.add_subcommand("estimate", "estimate drift and volatility from a price CSV");
  estimate->add_option("--config", o.config_path, "JSON run configuration with an estimate block");
  estimate->add_option("--csv", csv, "price CSV");
  estimate->add_option("--from", from, "first date of the window (YYYY-MM-DD)");
  estimate->add_option("--to", to, "last date of the window (YYYY-MM-DD)");
  estimate->add_option("--date-col", format.date_column, "date column name");
  estimate->add_option("--price-col", format.price_column, "price column name");
  estimate->add_option("--volume-col", format.volume_column, "volume column name ('' for none)");

  auto* solve = app.add_subcommand("solve", "compute the free boundary");
  auto* mon = app.add_subcommand("monitor", "check a price series against the boundary");
  auto* upg = app.add_subcommand("upgrade", "boundaries before and after a technical upgrade");
  auto* surf = app.add_subcommand("surface", "boundary surface over a sweep of unit profits");
  for (auto* sub : {solve, mon, upg, surf}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(o, csv, from, to, format);
    if (solve->parsed()) return cmd_solve(o);
    if (mon->parsed()) return cmd_monitor(o);
    if (upg->parsed()) return cmd_upgrade(o);
    if (surf->parsed()) return cmd_surface(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  }
  return kConfigError;
}
