#include "haltbound/plant_model.hpp"

#include <cmath>
#include <stdexcept>

#include "haltbound/errors.hpp"

namespace haltbound {

namespace {

void check_time(const PlantParams& plant, double t, const char* who) {
  if (!(t >= 0.0) || t > static_cast<double>(plant.horizon)) {
    throw std::out_of_range(std::string(who) + ": t outside [0, T]");
  }
}

}  // namespace

void validate(const PlantParams& plant) {
  if (!std::isfinite(plant.emission_rate) || !(plant.emission_rate > 0.0)) {
    throw ConfigError("plant.M must be positive");
  }
  if (!std::isfinite(plant.unit_profit) || !(plant.unit_profit > 0.0)) {
    throw ConfigError("plant.P must be positive");
  }
  if (plant.horizon < 1) throw ConfigError("plant.T must be at least 1");
  if (plant.upgrade) {
    const auto& u = *plant.upgrade;
    if (!(u.effective_day >= 0.0) || u.effective_day > plant.horizon) {
      throw ConfigError("plant.upgrade.day must lie in [0, T]");
    }
    if (!std::isfinite(u.new_unit_profit) || !(u.new_unit_profit > 0.0)) {
      throw ConfigError("plant.upgrade.P_new must be positive");
    }
    if (!std::isfinite(u.new_emission_rate) || !(u.new_emission_rate > 0.0)) {
      throw ConfigError("plant.upgrade.M_new must be positive");
    }
  }
}

void to_json(nlohmann::json& j, const PlantParams& p) {
  j = nlohmann::json{{"M", p.emission_rate}, {"P", p.unit_profit}, {"T", p.horizon}};
  if (p.upgrade) {
    j["upgrade"] = {{"day", p.upgrade->effective_day},
                    {"P_new", p.upgrade->new_unit_profit},
                    {"M_new", p.upgrade->new_emission_rate}};
  }
}

void from_json(const nlohmann::json& j, PlantParams& p) {
  j.at("M").get_to(p.emission_rate);
  j.at("P").get_to(p.unit_profit);
  j.at("T").get_to(p.horizon);
  p.upgrade.reset();
  if (j.contains("upgrade") && !j.at("upgrade").is_null()) {
    const auto& u = j.at("upgrade");
    p.upgrade = Upgrade{u.at("day").get<double>(), u.at("P_new").get<double>(),
                        u.at("M_new").get<double>()};
  }
}

EffectiveParams effective_params(const PlantParams& plant, double t) {
  if (plant.upgrade && t >= plant.upgrade->effective_day) {
    return {plant.upgrade->new_emission_rate, plant.upgrade->new_unit_profit};
  }
  return {plant.emission_rate, plant.unit_profit};
}

double reward(const PlantParams& plant, double tau, double terminal_price) {
  check_time(plant, tau, "reward");
  if (!(terminal_price > 0.0)) throw std::invalid_argument("reward: terminal price must be positive");
  const double T = plant.horizon;
  return plant.emission_rate * plant.unit_profit * tau +
         plant.emission_rate * terminal_price * (T - tau);
}

double immediate_value(const PlantParams& plant, const GbmParams& gbm, double t, double y) {
  check_time(plant, t, "immediate_value");
  const auto [m, p] = effective_params(plant, t);
  const double remaining = plant.horizon - t;
  return m * p * t + m * y * std::exp(gbm.mu * remaining) * remaining;
}

double lower_bound(const PlantParams& plant, const GbmParams& gbm, double t) {
  check_time(plant, t, "lower_bound");
  return effective_params(plant, t).unit_profit * std::exp(-gbm.mu * (plant.horizon - t));
}

}  // namespace haltbound
