#include "haltbound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "haltbound/errors.hpp"

namespace haltbound::oracle {

namespace {

// The oracle accepts P = 0 (pure allowance-selling plants).
void check_inputs(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec) {
  validate(gbm);
  if (!(plant.emission_rate > 0.0)) throw ConfigError("oracle: M must be positive");
  if (!(plant.unit_profit >= 0.0)) throw ConfigError("oracle: P must be nonnegative");
  if (plant.horizon < 1) throw ConfigError("oracle: T must be at least 1");
  if (spec.n_steps < 1) throw ConfigError("oracle: n_steps must be at least 1");
}

}  // namespace

LatticeFactors lattice_factors(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec) {
  const double delta = static_cast<double>(plant.horizon) / static_cast<double>(spec.n_steps);
  const double s = gbm.sigma * std::sqrt(delta);
  const double drift = std::exp(gbm.mu * delta) / std::cosh(s);
  return {delta, drift * std::exp(s), drift * std::exp(-s)};
}

double node_price(const GbmParams& gbm, const LatticeFactors& f, std::size_t i, std::size_t k) {
  return gbm.y0 * std::pow(f.up, static_cast<double>(k)) * std::pow(f.down, static_cast<double>(i - k));
}

TreeResult tree_solve(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec,
                      double tolerance) {
  check_inputs(gbm, plant, spec);
  const auto f = lattice_factors(gbm, plant, spec);
  const std::size_t n = spec.n_steps;
  const double T = plant.horizon;

  TreeResult r;
  r.delta = f.delta;
  r.times.resize(n + 1);
  r.prices.resize(n + 1);
  r.u.resize(n + 1);
  r.boundary.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    r.times[i] = i == n ? T : static_cast<double>(i) * f.delta;
    r.prices[i].resize(i + 1);
    for (std::size_t k = 0; k <= i; ++k) r.prices[i][k] = node_price(gbm, f, i, k);
  }
  r.u[n].assign(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    const double t = r.times[i];
    const double profit = effective_params(plant, t).unit_profit;
    const double forward = std::exp(gbm.mu * (T - t));
    r.u[i].resize(i + 1);
    for (std::size_t k = 0; k <= i; ++k) {
      const double expected = 0.5 * (r.u[i + 1][k] + r.u[i + 1][k + 1]);
      r.u[i][k] = std::max(0.0, expected + f.delta * (profit - r.prices[i][k] * forward));
    }
  }
  for (std::size_t i = 0; i <= n; ++i) {
    if (i == n) {
      // Terminal slice: every price stops; report the limit level P_eff(T).
      r.boundary[i] = effective_params(plant, T).unit_profit;
      continue;
    }
    for (std::size_t k = 0; k <= i; ++k) {
      if (r.u[i][k] <= tolerance) {
        r.boundary[i] = r.boundary[i] ? std::min(*r.boundary[i], r.prices[i][k]) : r.prices[i][k];
      }
    }
  }
  r.root_u = r.u[0][0];
  r.root_g = immediate_value(plant, gbm, 0.0, gbm.y0);
  r.root_v = effective_params(plant, 0.0).emission_rate * r.root_u + r.root_g;
  return r;
}

double enumerate_policies(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec) {
  check_inputs(gbm, plant, spec);
  if (spec.n_steps > 4) throw ConfigError("enumerate_policies: n_steps must be <= 4");
  if (plant.upgrade) throw ConfigError("enumerate_policies: upgrades are not supported");
  const auto f = lattice_factors(gbm, plant, spec);
  const std::size_t n = spec.n_steps;
  const double T = plant.horizon;
  const double M = plant.emission_rate;
  const double P = plant.unit_profit;

  // Node (i, k) with k up-moves gets label bit i(i+1)/2 + k.
  const std::size_t nodes = n * (n + 1) / 2;
  const std::uint32_t policies = 1u << nodes;
  const std::uint32_t paths = 1u << n;

  std::vector<double> terminal(n + 1);
  for (std::size_t k = 0; k <= n; ++k) terminal[k] = node_price(gbm, f, n, k);

  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t policy = 0; policy < policies; ++policy) {
    double total = 0.0;
    for (std::uint32_t path = 0; path < paths; ++path) {
      std::size_t k = 0;
      double tau = T;
      bool stopped = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!stopped && ((policy >> (i * (i + 1) / 2 + k)) & 1u)) {
          tau = static_cast<double>(i) * f.delta;
          stopped = true;
        }
        k += (path >> i) & 1u;
      }
      total += M * P * tau + M * terminal[k] * (T - tau);
    }
    best = std::max(best, total / static_cast<double>(paths));
  }
  return best;
}

}  // namespace haltbound::oracle
