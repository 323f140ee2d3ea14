#pragma once

#include <optional>

#include <json.hpp>

#include "haltbound/gbm.hpp"

namespace haltbound {

/// A technical upgrade taking effect on trading day `effective_day`.
struct Upgrade {
  double effective_day = 0.0;
  double new_unit_profit = 0.0;    // P~
  double new_emission_rate = 0.0;  // M~
};

/// Economics of one plant over a production cycle of `horizon` trading days.
struct PlantParams {
  double emission_rate = 0.0;  // M, tons CO2 per trading day
  double unit_profit = 0.0;    // P, currency per ton CO2
  int horizon = 0;             // T, trading days
  std::optional<Upgrade> upgrade;
};

/// Throws ConfigError on M <= 0, P <= 0, T < 1 or an upgrade outside [0, T].
void validate(const PlantParams& plant);

/// JSON block {"M", "P", "T", "upgrade"?: {"day", "P_new", "M_new"}}.
void to_json(nlohmann::json& j, const PlantParams& p);
void from_json(const nlohmann::json& j, PlantParams& p);

struct EffectiveParams {
  double emission_rate;
  double unit_profit;
};

/// (M~, P~) once the upgrade is in force, (M, P) otherwise.
EffectiveParams effective_params(const PlantParams& plant, double t);

/// Total profit when production halts on day tau and the remaining
/// allowances are sold at the terminal price: M P tau + M y_T (T - tau).
double reward(const PlantParams& plant, double tau, double terminal_price);

/// Expected reward of halting at (t, y):
///   G(t, y) = M P t + M y e^{mu (T - t)} (T - t),
/// evaluated with the parameters in force at t.
double immediate_value(const PlantParams& plant, const GbmParams& gbm, double t, double y);

/// Price level below which continuing production is always optimal:
///   L(t) = P e^{-mu (T - t)}.
double lower_bound(const PlantParams& plant, const GbmParams& gbm, double t);

}  // namespace haltbound
