#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "haltbound/gbm.hpp"
#include "haltbound/plant_model.hpp"
#include "haltbound/random.hpp"

namespace haltbound {

/// Uniform decision dates t_0 = 0 < ... < t_n = T.
struct TimeGrid {
  double delta = 1.0;
  std::vector<double> times;

  /// Throws ConfigError unless horizon / delta is (within 1e-9) a whole number.
  static TimeGrid uniform(double horizon, double delta = 1.0);

  std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
  double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }
  /// Index of the grid time equal to t (within 1e-9 * delta), if any.
  std::optional<std::size_t> index_of(double t) const noexcept;
};

/// Price levels of the lattice. Level j at time t sits at
/// base[j] * exp(drift * t); drift = 0 is an ordinary fixed grid.
///
/// A grid whose drift equals the price drift mu keeps every node a fixed
/// distance (in log price) from the kink y e^{mu (T - t)} = P of the running
/// reward, so deterministic (sigma = 0) transitions land exactly on nodes.
struct PriceGrid {
  std::vector<double> base;
  double drift = 0.0;

  std::size_t size() const noexcept { return base.size(); }
  double level(std::size_t j, double t) const;
  std::vector<double> levels_at(double t) const;
};

/// Throws ConfigError for fewer than two levels or levels that are not
/// positive and strictly increasing.
void validate(const PriceGrid& grid);

/// How to build the default geometric grid.
struct GridSpec {
  std::size_t levels = 200;
  /// Defaults: min(Y0, L(0)) / 2 and 3 max(P, Y0), taking the lowest and
  /// highest P when an upgrade is present.
  std::optional<double> lower;
  std::optional<double> upper;
  bool follow_drift = false;
};

PriceGrid make_price_grid(const GridSpec& spec, const GbmParams& gbm, const PlantParams& plant);
/// Default grid for a family of plants with unit profits in [p_low, p_high].
PriceGrid make_price_grid(const GridSpec& spec, const GbmParams& gbm, int horizon, double p_low,
                          double p_high);
/// Geometric levels between explicit bounds.
PriceGrid geometric_grid(double lower, double upper, std::size_t levels, double drift = 0.0);

struct SolverConfig {
  std::size_t samples_per_node = 2000;
  double delta = 1.0;
  GridSpec grid;
  /// Overrides `grid` when set; sweeps pass one grid to every solve so
  /// that results stay comparable node by node.
  std::optional<PriceGrid> price_grid;
  Seed seed;
  /// Absolute threshold below which U counts as zero. Defaults to 1e-6 P T.
  std::optional<double> stop_tolerance;
};

void validate(const SolverConfig& config);
double resolved_tolerance(const SolverConfig& config, const PlantParams& plant);

/// U, G and V on the (time x price) lattice. U is the M-free continuation
/// premium (V - G) / M_eff; matrices are row-major with one row per time.
struct ValueGrid {
  TimeGrid time_grid;
  PriceGrid price_grid;
  GbmParams gbm;
  PlantParams plant;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> prices;
  std::vector<double> U;
  std::vector<double> G;
  std::vector<double> V;

  std::size_t at(std::size_t i, std::size_t j) const noexcept { return i * cols + j; }
  std::span<const double> levels(std::size_t i) const { return {prices.data() + i * cols, cols}; }
  std::span<const double> u_row(std::size_t i) const { return {U.data() + i * cols, cols}; }
};

/// Backward recursion for the continuation premium:
///   U(t_n, y) = 0
///   U(t_i, y) = max(0, E[U(t_{i+1}, y xi)] + delta (P_eff(t_i) - y e^{mu (T - t_i)}))
/// with xi the one-step log-normal growth factor. The expectation is a
/// sample mean over `samples_per_node` draws shared by every node of slice i
/// (stream i of the seed), and U(t_{i+1}, .) is interpolated linearly in y,
/// clamped to the edge values outside the grid.
ValueGrid solve_backward(const GbmParams& gbm, const PlantParams& plant, const TimeGrid& time_grid,
                         const SolverConfig& config);

enum class BoundaryStatus { Found, AboveGrid };

/// Free boundary b(t): lowest price at which halting is optimal.
struct Boundary {
  std::vector<double> times;
  std::vector<double> values;  // +inf where AboveGrid
  std::vector<BoundaryStatus> status;
  std::vector<double> lower_bound;

  std::size_t size() const noexcept { return times.size(); }
  bool found(std::size_t i) const { return status[i] == BoundaryStatus::Found; }
  std::size_t found_count() const;
};

/// For t_i < T: smallest level with U <= tolerance (no monotone clean-up).
/// At t_n every price stops, so b(T) is reported as its limit from the
/// left: the smallest level at or above P_eff(T).
Boundary extract_boundary(const ValueGrid& grid, const SolverConfig& config);

struct ValueTriple {
  double u;
  double v;
  double g;
};

/// Linear interpolation in y at grid time t. Throws std::out_of_range when t
/// is not a grid time or y lies outside the slice's levels.
ValueTriple value_at(const ValueGrid& grid, double t, double y);

struct SmoothingMethod {
  enum class Kind { None, Isotonic, MovingAverage };
  Kind kind = Kind::None;
  std::size_t window = 3;
};

/// Post-processing for plotting. Isotonic fits whichever monotone direction
/// has the smaller squared error; moving-average uses a centred window over
/// Found entries. Both then restore b(T) and floor at the lower bound.
Boundary smooth_boundary(const Boundary& boundary, const SmoothingMethod& method);

/// Width of the grid cell containing y (the nearest edge cell outside).
double cell_width_at(std::span<const double> levels, double y);

/// t,b,status,lower_bound with six significant digits.
void write_boundary_csv(std::ostream& out, const Boundary& boundary);
/// Long format t,y,U,V,G.
void write_value_grid_csv(std::ostream& out, const ValueGrid& grid);

const char* to_string(BoundaryStatus status) noexcept;

}  // namespace haltbound
