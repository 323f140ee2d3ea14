#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "haltbound/gbm.hpp"
#include "haltbound/plant_model.hpp"

namespace haltbound::oracle {

/// Recombining two-point lattice over [0, T] with n_steps equal steps.
///
/// With s = sigma sqrt(delta) the factors are
///   up = e^{mu delta} e^{+s} / cosh(s),  down = e^{mu delta} e^{-s} / cosh(s),
/// each with probability 1/2. The log increment has standard deviation s
/// (the Brownian term of the exact GBM step) and E[factor] = e^{mu delta}
/// exactly, so the closed-form gain function is also the exact stopping
/// payoff on the lattice.
struct LatticeSpec {
  std::size_t n_steps = 10;
};

struct LatticeFactors {
  double delta;
  double up;
  double down;
};

LatticeFactors lattice_factors(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec);

/// Price of node k (number of up moves) at step i, rooted at gbm.y0.
double node_price(const GbmParams& gbm, const LatticeFactors& f, std::size_t i, std::size_t k);

struct TreeResult {
  double delta = 0.0;
  std::vector<double> times;
  /// prices[i][k], u[i][k] for k = 0..i.
  std::vector<std::vector<double>> prices;
  std::vector<std::vector<double>> u;
  double root_u = 0.0;
  double root_g = 0.0;
  double root_v = 0.0;
  /// Lowest node price at step i where U <= tolerance; nullopt when every node continues.
  std::vector<std::optional<double>> boundary;
};

/// Exact backward induction of the continuation-premium recursion on the
/// lattice (two-point expectation, no sampling, no interpolation).
TreeResult tree_solve(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec,
                      double tolerance = 0.0);

/// Largest expected reward E[R(tau)] over every node-measurable stopping
/// rule on the lattice (stop/continue label per node before T), computed by
/// summing R over all 2^n paths. Needs n_steps <= 4 and a plant without upgrade.
double enumerate_policies(const GbmParams& gbm, const PlantParams& plant, const LatticeSpec& spec);

}  // namespace haltbound::oracle
