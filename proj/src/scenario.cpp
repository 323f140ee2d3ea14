#include "haltbound/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "haltbound/errors.hpp"

namespace haltbound {

MonitorReport monitor(const Boundary& boundary, const std::vector<double>& prices) {
  MonitorReport report;
  if (prices.empty()) return report;
  if (boundary.times.empty()) throw DataError("monitor: empty boundary");
  const double delta = boundary.times.size() > 1 ? boundary.times[1] - boundary.times[0] : 1.0;
  for (std::size_t day = 0; day < prices.size(); ++day) {
    const double index = static_cast<double>(day) / delta;
    const double k = std::round(index);
    if (std::abs(index - k) > 1e-9 || k >= static_cast<double>(boundary.size()) ||
        std::abs(boundary.times[static_cast<std::size_t>(k)] - static_cast<double>(day)) > 1e-9) {
      throw DataError("monitor: price day " + std::to_string(day) +
                      " has no matching boundary time (series longer than T or grid not daily)");
    }
  }
  for (std::size_t day = 0; day < prices.size(); ++day) {
    const auto i = static_cast<std::size_t>(std::round(static_cast<double>(day) / delta));
    const double level = boundary.found(i) ? boundary.values[i] : std::numeric_limits<double>::infinity();
    if (prices[day] >= level) {
      report.crossed = true;
      report.crossing_index = day;
      report.crossing_price = prices[day];
      report.boundary_at_crossing = level;
      break;
    }
  }
  return report;
}

MonitorReport monitor(const Boundary& boundary, const PriceSeries& prices) {
  return monitor(boundary, prices.prices());
}

void to_json(nlohmann::json& j, const MonitorReport& r) {
  j = nlohmann::json{{"crossed", r.crossed}};
  const auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  j["crossing_index"] = opt(r.crossing_index);
  j["crossing_price"] = opt(r.crossing_price);
  j["boundary_at_crossing"] = opt(r.boundary_at_crossing);
}

UpgradeResult apply_upgrade(const GbmParams& gbm, const PlantParams& plant, const SolverConfig& config) {
  if (!plant.upgrade) throw ConfigError("apply_upgrade: plant has no upgrade");
  validate(plant);
  const Upgrade& up = *plant.upgrade;

  PlantParams before = plant;
  before.upgrade.reset();
  PlantParams after = before;
  after.emission_rate = up.new_emission_rate;
  after.unit_profit = up.new_unit_profit;

  SolverConfig shared = config;
  if (!shared.price_grid) shared.price_grid = make_price_grid(config.grid, gbm, plant);
  if (!shared.stop_tolerance) {
    PlantParams low = before;
    low.unit_profit = std::min(before.unit_profit, after.unit_profit);
    shared.stop_tolerance = resolved_tolerance(config, low);
  }
  const auto times = TimeGrid::uniform(plant.horizon, config.delta);

  UpgradeResult result;
  result.effective_day = up.effective_day;
  result.before = extract_boundary(solve_backward(gbm, before, times, shared), shared);
  result.after = extract_boundary(solve_backward(gbm, after, times, shared), shared);
  result.composite = result.before;
  for (std::size_t i = 0; i < result.composite.size(); ++i) {
    if (result.composite.times[i] >= up.effective_day) {
      result.composite.values[i] = result.after.values[i];
      result.composite.status[i] = result.after.status[i];
      result.composite.lower_bound[i] = result.after.lower_bound[i];
    }
  }
  return result;
}

SurfaceGrid surface(const GbmParams& gbm, int horizon, const std::vector<double>& p_values,
                    const SolverConfig& config) {
  if (p_values.empty()) throw ConfigError("surface: p_values must not be empty");
  for (std::size_t k = 0; k < p_values.size(); ++k) {
    if (!(p_values[k] > 0.0)) throw ConfigError("surface: p_values must be positive");
    if (k > 0 && !(p_values[k - 1] < p_values[k])) {
      throw ConfigError("surface: p_values must be strictly increasing");
    }
  }
  PlantParams plant{1.0, p_values.front(), horizon, std::nullopt};
  validate(plant);

  SolverConfig shared = config;
  if (!shared.price_grid) {
    shared.price_grid = make_price_grid(config.grid, gbm, horizon, p_values.front(), p_values.back());
  }
  if (!shared.stop_tolerance) shared.stop_tolerance = resolved_tolerance(config, plant);

  SurfaceGrid out;
  out.p_values = p_values;
  out.times = TimeGrid::uniform(horizon, config.delta);
  for (double p : p_values) {
    plant.unit_profit = p;
    const auto b = extract_boundary(solve_backward(gbm, plant, out.times, shared), shared);
    out.B.push_back(b.values);
  }
  return out;
}

std::optional<double> min_survival_p(const SurfaceGrid& surface, double t, double y) {
  const auto i = surface.times.index_of(t);
  if (!i) throw std::out_of_range("min_survival_p: t is not a surface time");
  for (std::size_t k = 0; k < surface.p_values.size(); ++k) {
    if (surface.at(*i, k) > y) return surface.p_values[k];
  }
  return std::nullopt;
}

std::vector<std::vector<double>> curvature_in_p(const SurfaceGrid& surface) {
  std::vector<std::vector<double>> out(surface.times.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 1; k + 1 < surface.p_values.size(); ++k) {
      out[i].push_back(surface.at(i, k + 1) - 2.0 * surface.at(i, k) + surface.at(i, k - 1));
    }
  }
  return out;
}

void write_surface_csv(std::ostream& out, const SurfaceGrid& surface) {
  std::string text = "t,p,B\n";
  char buf[96];
  for (std::size_t i = 0; i < surface.times.times.size(); ++i) {
    for (std::size_t k = 0; k < surface.p_values.size(); ++k) {
      const double b = surface.at(i, k);
      if (std::isinf(b)) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g,inf\n", surface.times.times[i], surface.p_values[k]);
      } else {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%.6g\n", surface.times.times[i], surface.p_values[k], b);
      }
      text += buf;
    }
  }
  out << text;
}

nlohmann::json surface_json(const SurfaceGrid& surface) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < surface.times.times.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t k = 0; k < surface.p_values.size(); ++k) {
      const double b = surface.at(i, k);
      row.push_back(std::isinf(b) ? nlohmann::json(nullptr) : nlohmann::json(b));
    }
    rows.push_back(std::move(row));
  }
  return {{"times", surface.times.times}, {"p_values", surface.p_values}, {"B", rows}};
}

}  // namespace haltbound
