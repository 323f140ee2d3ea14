#include "haltbound/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "haltbound/errors.hpp"

namespace haltbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Linear-in-y interpolation on a sorted slice with edge clamping. Written as
// a convex combination so the result is monotone in the node values.
double interpolate(std::span<const double> ys, std::span<const double> vs, double y) {
  if (y <= ys.front()) return vs.front();
  if (y >= ys.back()) return vs.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin());
  const std::size_t lo = hi - 1;
  const double w = (y - ys[lo]) / (ys[hi] - ys[lo]);
  return (1.0 - w) * vs[lo] + w * vs[hi];
}

void append_number(std::string& out, double x) {
  if (std::isinf(x)) {
    out += x > 0 ? "inf" : "-inf";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  out += buf;
}

}  // namespace

TimeGrid TimeGrid::uniform(double horizon, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("time step delta must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  const double ratio = horizon / delta;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("horizon must be a whole number of time steps");
  }
  TimeGrid grid;
  grid.delta = delta;
  const auto steps = static_cast<std::size_t>(n);
  grid.times.resize(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) grid.times[i] = static_cast<double>(i) * delta;
  grid.times[steps] = horizon;
  return grid;
}

std::optional<std::size_t> TimeGrid::index_of(double t) const noexcept {
  if (times.empty() || !std::isfinite(t)) return std::nullopt;
  const double k = std::round(t / delta);
  if (k < 0.0 || k > static_cast<double>(steps())) return std::nullopt;
  const auto i = static_cast<std::size_t>(k);
  if (std::abs(times[i] - t) > 1e-9 * delta) return std::nullopt;
  return i;
}

double PriceGrid::level(std::size_t j, double t) const {
  return drift == 0.0 ? base.at(j) : base.at(j) * std::exp(drift * t);
}

std::vector<double> PriceGrid::levels_at(double t) const {
  std::vector<double> out(base.size());
  for (std::size_t j = 0; j < base.size(); ++j) out[j] = level(j, t);
  return out;
}

void validate(const PriceGrid& grid) {
  if (grid.base.size() < 2) throw ConfigError("degenerate price grid: need at least two levels");
  for (std::size_t j = 0; j < grid.base.size(); ++j) {
    if (!(grid.base[j] > 0.0) || !std::isfinite(grid.base[j])) {
      throw ConfigError("degenerate price grid: levels must be positive");
    }
    if (j > 0 && !(grid.base[j - 1] < grid.base[j])) {
      throw ConfigError("degenerate price grid: levels must strictly increase");
    }
  }
  if (!std::isfinite(grid.drift)) throw ConfigError("price grid drift must be finite");
}

PriceGrid geometric_grid(double lower, double upper, std::size_t levels, double drift) {
  if (levels < 2) throw ConfigError("degenerate price grid: need at least two levels");
  if (!(lower > 0.0) || !(upper > lower)) {
    throw ConfigError("degenerate price grid: need 0 < lower < upper");
  }
  PriceGrid grid;
  grid.drift = drift;
  grid.base.resize(levels);
  const double log_lo = std::log(lower);
  const double step = (std::log(upper) - log_lo) / static_cast<double>(levels - 1);
  for (std::size_t j = 0; j < levels; ++j) {
    grid.base[j] = std::exp(log_lo + step * static_cast<double>(j));
  }
  grid.base.front() = lower;
  grid.base.back() = upper;
  return grid;
}

PriceGrid make_price_grid(const GridSpec& spec, const GbmParams& gbm, int horizon, double p_low,
                          double p_high) {
  const double l0 = p_low * std::exp(-gbm.mu * horizon);
  const double lower = spec.lower.value_or(0.5 * std::min(gbm.y0, l0));
  const double upper = spec.upper.value_or(3.0 * std::max(p_high, gbm.y0));
  return geometric_grid(lower, upper, spec.levels, spec.follow_drift ? gbm.mu : 0.0);
}

PriceGrid make_price_grid(const GridSpec& spec, const GbmParams& gbm, const PlantParams& plant) {
  double p_low = plant.unit_profit;
  double p_high = plant.unit_profit;
  if (plant.upgrade) {
    p_low = std::min(p_low, plant.upgrade->new_unit_profit);
    p_high = std::max(p_high, plant.upgrade->new_unit_profit);
  }
  return make_price_grid(spec, gbm, plant.horizon, p_low, p_high);
}

void validate(const SolverConfig& config) {
  if (config.samples_per_node < 100) throw ConfigError("solver.samples_per_node must be >= 100");
  if (!(config.delta > 0.0) || !std::isfinite(config.delta)) {
    throw ConfigError("solver.delta must be positive");
  }
  if (config.price_grid) validate(*config.price_grid);
  else if (config.grid.levels < 2) throw ConfigError("solver.grid.levels must be >= 2");
  if (config.stop_tolerance && !(*config.stop_tolerance >= 0.0)) {
    throw ConfigError("solver.stop_tolerance must be nonnegative");
  }
}

double resolved_tolerance(const SolverConfig& config, const PlantParams& plant) {
  return config.stop_tolerance.value_or(1e-6 * plant.unit_profit * plant.horizon);
}

ValueGrid solve_backward(const GbmParams& gbm, const PlantParams& plant, const TimeGrid& time_grid,
                         const SolverConfig& config) {
  validate(gbm);
  validate(plant);
  validate(config);
  if (time_grid.steps() < 1 ||
      std::abs(time_grid.horizon() - static_cast<double>(plant.horizon)) > 1e-9) {
    throw ConfigError("time grid must end at the plant horizon T");
  }

  ValueGrid grid;
  grid.time_grid = time_grid;
  grid.price_grid = config.price_grid ? *config.price_grid : make_price_grid(config.grid, gbm, plant);
  validate(grid.price_grid);
  grid.gbm = gbm;
  grid.plant = plant;
  grid.rows = time_grid.steps() + 1;
  grid.cols = grid.price_grid.size();
  const std::size_t cells = grid.rows * grid.cols;
  grid.prices.resize(cells);
  grid.U.assign(cells, 0.0);
  grid.G.resize(cells);
  grid.V.resize(cells);
  for (std::size_t i = 0; i < grid.rows; ++i) {
    const double t = time_grid.times[i];
    for (std::size_t j = 0; j < grid.cols; ++j) {
      grid.prices[grid.at(i, j)] = grid.price_grid.level(j, t);
    }
  }

  const std::size_t n = time_grid.steps();
  const std::size_t samples = config.samples_per_node;
  const double horizon = plant.horizon;
  std::vector<double> growth(samples);

  for (std::size_t step = n; step-- > 0;) {
    const double t = time_grid.times[step];
    const double dt = time_grid.times[step + 1] - t;
    CounterRng rng(config.seed, step);
    for (auto& g : growth) g = std::exp(log_growth(gbm, dt, rng.next_normal()));
    std::sort(growth.begin(), growth.end());

    const double profit = effective_params(plant, t).unit_profit;
    const double forward = std::exp(gbm.mu * (horizon - t));
    const auto next_y = grid.levels(step + 1);
    const auto next_u = grid.u_row(step + 1);
    const double* here_y = grid.prices.data() + grid.at(step, 0);
    double* here_u = grid.U.data() + grid.at(step, 0);
    const auto cols = static_cast<std::ptrdiff_t>(grid.cols);
    bool finite = true;

#pragma omp parallel for schedule(static) reduction(&& : finite)
    for (std::ptrdiff_t jj = 0; jj < cols; ++jj) {
      const double y = here_y[jj];
      // Growth factors are sorted, so the bracketing cell only moves right.
      std::size_t cell = 0;
      double sum = 0.0;
      for (double g : growth) {
        const double target = y * g;
        double value;
        if (target <= next_y.front()) {
          value = next_u.front();
        } else if (target >= next_y.back()) {
          value = next_u.back();
        } else {
          while (next_y[cell + 1] <= target) ++cell;
          const double w = (target - next_y[cell]) / (next_y[cell + 1] - next_y[cell]);
          value = (1.0 - w) * next_u[cell] + w * next_u[cell + 1];
        }
        sum += value;
      }
      const double continuation = sum / static_cast<double>(samples) + dt * (profit - y * forward);
      finite = finite && std::isfinite(continuation);
      here_u[jj] = std::max(0.0, continuation);
    }
    if (!finite) {
      throw NumericError("non-finite continuation value at t = " + std::to_string(t));
    }
  }

  for (std::size_t i = 0; i < grid.rows; ++i) {
    const double t = time_grid.times[i];
    const double m_eff = effective_params(plant, t).emission_rate;
    for (std::size_t j = 0; j < grid.cols; ++j) {
      const std::size_t c = grid.at(i, j);
      grid.G[c] = immediate_value(plant, gbm, t, grid.prices[c]);
      grid.V[c] = m_eff * grid.U[c] + grid.G[c];
      if (!std::isfinite(grid.V[c])) throw NumericError("non-finite value function");
    }
  }
  return grid;
}

std::size_t Boundary::found_count() const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), BoundaryStatus::Found));
}

Boundary extract_boundary(const ValueGrid& grid, const SolverConfig& config) {
  const double tol = resolved_tolerance(config, grid.plant);
  Boundary b;
  const std::size_t n = grid.time_grid.steps();
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = grid.time_grid.times[i];
    const auto ys = grid.levels(i);
    std::optional<std::size_t> hit;
    if (i < n) {
      const auto us = grid.u_row(i);
      for (std::size_t j = 0; j < grid.cols; ++j) {
        if (us[j] <= tol) {
          hit = j;
          break;
        }
      }
    } else {
      const double p_end = effective_params(grid.plant, t).unit_profit;
      const auto it = std::lower_bound(ys.begin(), ys.end(), p_end);
      if (it != ys.end()) hit = static_cast<std::size_t>(it - ys.begin());
    }
    b.times.push_back(t);
    b.values.push_back(hit ? ys[*hit] : kInf);
    b.status.push_back(hit ? BoundaryStatus::Found : BoundaryStatus::AboveGrid);
    b.lower_bound.push_back(lower_bound(grid.plant, grid.gbm, t));
  }
  return b;
}

ValueTriple value_at(const ValueGrid& grid, double t, double y) {
  const auto i = grid.time_grid.index_of(t);
  if (!i) throw std::out_of_range("value_at: t is not a grid time");
  const auto ys = grid.levels(*i);
  if (!(y >= ys.front() && y <= ys.back())) {
    throw std::out_of_range("value_at: y outside the price grid");
  }
  const std::size_t off = grid.at(*i, 0);
  const auto row = [&](const std::vector<double>& m) {
    return std::span<const double>(m.data() + off, grid.cols);
  };
  return {interpolate(ys, row(grid.U), y), interpolate(ys, row(grid.V), y),
          interpolate(ys, row(grid.G), y)};
}

namespace {

// Pool-adjacent-violators fit of a nondecreasing sequence.
std::vector<double> isotonic_increasing(const std::vector<double>& x) {
  std::vector<double> level;
  std::vector<std::size_t> count;
  for (double v : x) {
    level.push_back(v);
    count.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const std::size_t c = count.back() + count[count.size() - 2];
      const double merged =
          (level.back() * count.back() + level[level.size() - 2] * count[count.size() - 2]) / c;
      level.pop_back();
      count.pop_back();
      level.back() = merged;
      count.back() = c;
    }
  }
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t k = 0; k < level.size(); ++k) out.insert(out.end(), count[k], level[k]);
  return out;
}

double squared_error(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

Boundary smooth_boundary(const Boundary& boundary, const SmoothingMethod& method) {
  if (method.kind == SmoothingMethod::Kind::None) return boundary;

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    if (boundary.found(i)) idx.push_back(i);
  }
  if (idx.size() < 3) throw ConfigError("smooth_boundary: need at least 3 found entries");
  std::vector<double> x;
  for (auto i : idx) x.push_back(boundary.values[i]);

  std::vector<double> fit;
  if (method.kind == SmoothingMethod::Kind::Isotonic) {
    auto up = isotonic_increasing(x);
    std::vector<double> rev(x.rbegin(), x.rend());
    auto down = isotonic_increasing(rev);
    std::reverse(down.begin(), down.end());
    fit = squared_error(up, x) < squared_error(down, x) ? std::move(up) : std::move(down);
  } else {
    if (method.window < 1) throw ConfigError("smooth_boundary: window must be >= 1");
    const std::size_t half = method.window / 2;
    fit.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      const std::size_t lo = k >= half ? k - half : 0;
      const std::size_t hi = std::min(x.size() - 1, k + half);
      double s = 0.0;
      for (std::size_t q = lo; q <= hi; ++q) s += x[q];
      fit[k] = s / static_cast<double>(hi - lo + 1);
    }
  }

  Boundary out = boundary;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.values[idx[k]] = std::max(fit[k], boundary.lower_bound[idx[k]]);
  }
  const std::size_t last = boundary.size() - 1;
  out.values[last] = boundary.values[last];
  return out;
}

double cell_width_at(std::span<const double> levels, double y) {
  if (levels.size() < 2) throw std::invalid_argument("cell_width_at: need two levels");
  if (y <= levels.front()) return levels[1] - levels[0];
  if (y >= levels.back()) return levels.back() - levels[levels.size() - 2];
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(levels.begin(), levels.end(), y) - levels.begin());
  return levels[hi] - levels[hi - 1];
}

const char* to_string(BoundaryStatus status) noexcept {
  return status == BoundaryStatus::Found ? "FOUND" : "ABOVE_GRID";
}

void write_boundary_csv(std::ostream& out, const Boundary& boundary) {
  std::string text = "t,b,status,lower_bound\n";
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    append_number(text, boundary.times[i]);
    text += ',';
    append_number(text, boundary.values[i]);
    text += ',';
    text += to_string(boundary.status[i]);
    text += ',';
    append_number(text, boundary.lower_bound[i]);
    text += '\n';
  }
  out << text;
}

void write_value_grid_csv(std::ostream& out, const ValueGrid& grid) {
  std::string text = "t,y,U,V,G\n";
  for (std::size_t i = 0; i < grid.rows; ++i) {
    for (std::size_t j = 0; j < grid.cols; ++j) {
      const std::size_t c = grid.at(i, j);
      append_number(text, grid.time_grid.times[i]);
      for (double v : {grid.prices[c], grid.U[c], grid.V[c], grid.G[c]}) {
        text += ',';
        append_number(text, v);
      }
      text += '\n';
    }
  }
  out << text;
}

}  // namespace haltbound
