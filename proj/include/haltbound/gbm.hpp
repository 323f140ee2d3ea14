#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "haltbound/random.hpp"

namespace haltbound {

/// Allowance price diffusion dY = mu Y dt + sigma Y dB, in trading days.
struct GbmParams {
  double y0 = 1.0;     // initial price, > 0
  double mu = 0.0;     // drift per day
  double sigma = 0.0;  // volatility per sqrt(day), >= 0
};

/// Throws ConfigError unless y0 > 0 and sigma >= 0 (all finite).
void validate(const GbmParams& params);

void to_json(nlohmann::json& j, const GbmParams& p);
void from_json(const nlohmann::json& j, GbmParams& p);

/// One sampled path on a uniform time grid.
struct PathGrid {
  double dt = 1.0;
  std::vector<double> values;  // values[0] = y0, size = steps + 1

  std::size_t steps() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// y * exp((mu - sigma^2/2) dt + sigma sqrt(dt) z)
double exact_step(double y, const GbmParams& params, double dt, double z);

/// Log of the one-step growth factor for draw z; shared with the solver so
/// both use the same discretization.
inline double log_growth(const GbmParams& params, double dt, double z) {
  return (params.mu - 0.5 * params.sigma * params.sigma) * dt + params.sigma * std::sqrt(dt) * z;
}

/// Path from stream `stream` of `seed`. Identical arguments give identical paths.
PathGrid simulate_path(const GbmParams& params, std::size_t steps, double dt, Seed seed,
                       std::uint64_t stream = 0);

/// E[Y_t] = y0 e^{mu t}
double expected_price(const GbmParams& params, double t);

/// Writes "step,price" rows, six significant digits.
void write_path_csv(std::ostream& out, const PathGrid& path);

}  // namespace haltbound
