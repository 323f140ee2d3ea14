#include "haltbound/gbm.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "haltbound/errors.hpp"

namespace haltbound {

void validate(const GbmParams& params) {
  if (!std::isfinite(params.y0) || !(params.y0 > 0.0)) {
    throw ConfigError("gbm.y0 must be a positive price");
  }
  if (!std::isfinite(params.mu)) throw ConfigError("gbm.mu must be finite");
  if (!std::isfinite(params.sigma) || params.sigma < 0.0) {
    throw ConfigError("gbm.sigma must be nonnegative");
  }
}

void to_json(nlohmann::json& j, const GbmParams& p) {
  j = nlohmann::json{{"y0", p.y0}, {"mu", p.mu}, {"sigma", p.sigma}};
}

void from_json(const nlohmann::json& j, GbmParams& p) {
  j.at("y0").get_to(p.y0);
  j.at("mu").get_to(p.mu);
  j.at("sigma").get_to(p.sigma);
}

double exact_step(double y, const GbmParams& params, double dt, double z) {
  if (!(y > 0.0)) throw std::invalid_argument("exact_step: price must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("exact_step: dt must be positive");
  return y * std::exp(log_growth(params, dt, z));
}

PathGrid simulate_path(const GbmParams& params, std::size_t steps, double dt, Seed seed,
                       std::uint64_t stream) {
  validate(params);
  if (steps < 1) throw std::invalid_argument("simulate_path: need at least one step");
  CounterRng rng(seed, stream);
  PathGrid path;
  path.dt = dt;
  path.values.reserve(steps + 1);
  path.values.push_back(params.y0);
  double y = params.y0;
  for (std::size_t k = 0; k < steps; ++k) {
    y = exact_step(y, params, dt, rng.next_normal());
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw NumericError("simulated price left (0, inf) at step " + std::to_string(k + 1));
    }
    path.values.push_back(y);
  }
  return path;
}

double expected_price(const GbmParams& params, double t) {
  if (t < 0.0) throw std::invalid_argument("expected_price: t must be nonnegative");
  return params.y0 * std::exp(params.mu * t);
}

void write_path_csv(std::ostream& out, const PathGrid& path) {
  out << "step,price\n";
  char buf[64];
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6g\n", k, path.values[k]);
    out << buf;
  }
}

}  // namespace haltbound
