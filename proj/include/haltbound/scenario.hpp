#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "haltbound/market_data.hpp"
#include "haltbound/solver.hpp"

namespace haltbound {

/// Outcome of watching a price series against a precomputed boundary.
struct MonitorReport {
  bool crossed = false;
  std::optional<std::size_t> crossing_index;
  std::optional<double> crossing_price;
  std::optional<double> boundary_at_crossing;
};

/// First trading day i with price_i >= b(i); AboveGrid days count as +inf.
/// Price index i is day i, so the boundary must contain every day 0..k
/// as a grid time (DataError otherwise).
MonitorReport monitor(const Boundary& boundary, const PriceSeries& prices);
MonitorReport monitor(const Boundary& boundary, const std::vector<double>& prices);

void to_json(nlohmann::json& j, const MonitorReport& r);

struct UpgradeResult {
  Boundary before;
  Boundary after;
  Boundary composite;
  double effective_day = 0.0;
};

/// Solves the whole horizon once with (M, P) and once with (M~, P~) on a
/// shared grid, seed and tolerance; the composite follows `before` up to the
/// effective day and `after` from it on.
UpgradeResult apply_upgrade(const GbmParams& gbm, const PlantParams& plant, const SolverConfig& config);

/// Boundary levels B(t, p) for a sweep of unit profits.
struct SurfaceGrid {
  std::vector<double> p_values;
  TimeGrid times;
  /// B[k] is the boundary for p_values[k]; +inf where the level is above the grid.
  std::vector<std::vector<double>> B;

  double at(std::size_t time_index, std::size_t p_index) const { return B.at(p_index).at(time_index); }
};

/// One boundary per p (M is irrelevant to the boundary and fixed at 1), all
/// sharing one price grid, seed and tolerance so slices compare node by node.
SurfaceGrid surface(const GbmParams& gbm, int horizon, const std::vector<double>& p_values,
                    const SolverConfig& config);

/// Smallest p with B(t, p) > y, or nullopt.
std::optional<double> min_survival_p(const SurfaceGrid& surface, double t, double y);

/// Second differences of B in p at every time: row i holds
/// B(t_i, p_{k+1}) - 2 B(t_i, p_k) + B(t_i, p_{k-1}) for interior k
/// (uniform p spacing assumed). Negative values mean flattening slopes.
std::vector<std::vector<double>> curvature_in_p(const SurfaceGrid& surface);

/// Long format t,p,B.
void write_surface_csv(std::ostream& out, const SurfaceGrid& surface);
/// {"times": [...], "p_values": [...], "B": [[B(t_i, p_k) for k] for i]}, null for +inf.
nlohmann::json surface_json(const SurfaceGrid& surface);

}  // namespace haltbound
