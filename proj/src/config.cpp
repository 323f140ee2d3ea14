#include "haltbound/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include "haltbound/errors.hpp"

namespace haltbound {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + "." + key + ": unknown field");
  }
}

template <typename T>
T field(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + "." + key + ": required field missing");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return field<T>(obj, where, key);
}

std::optional<Date> optional_date(const json& obj, const std::string& where, const char* key) {
  const auto text = optional_field<std::string>(obj, where, key);
  if (!text) return std::nullopt;
  try {
    return parse_iso_date(*text);
  } catch (const DataError& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

CsvFormat parse_columns(const json& obj, const std::string& where) {
  CsvFormat format;
  if (!obj.contains("columns")) return format;
  const auto& c = obj.at("columns");
  const std::string w = where + ".columns";
  reject_unknown(c, w, {"date", "price", "volume"});
  if (auto v = optional_field<std::string>(c, w, "date")) format.date_column = *v;
  if (auto v = optional_field<std::string>(c, w, "price")) format.price_column = *v;
  if (c.contains("volume")) {
    format.volume_column = c.at("volume").is_null() ? "" : field<std::string>(c, w, "volume");
  }
  return format;
}

void rethrow_with_prefix(const std::string& where, const ConfigError& e) {
  throw ConfigError(where + ": " + e.what());
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  reject_unknown(doc, "config", {"gbm", "estimate", "plant", "solver", "monitor", "surface"});
  RunConfig cfg;

  if (doc.contains("gbm")) {
    const auto& g = doc.at("gbm");
    reject_unknown(g, "gbm", {"y0", "mu", "sigma"});
    GbmParams p{field<double>(g, "gbm", "y0"), field<double>(g, "gbm", "mu"),
                field<double>(g, "gbm", "sigma")};
    validate(p);
    cfg.gbm = p;
  }
  if (doc.contains("estimate")) {
    const auto& e = doc.at("estimate");
    reject_unknown(e, "estimate", {"csv", "from", "to", "columns", "y0"});
    EstimationSource src;
    src.csv = resolve_path(base_dir, field<std::string>(e, "estimate", "csv"));
    src.format = parse_columns(e, "estimate");
    src.from = optional_date(e, "estimate", "from");
    src.to = optional_date(e, "estimate", "to");
    src.y0 = optional_field<double>(e, "estimate", "y0");
    if (src.y0 && !(*src.y0 > 0.0)) throw ConfigError("estimate.y0: must be positive");
    if (src.from && src.to && *src.to < *src.from) throw ConfigError("estimate.to: before estimate.from");
    cfg.estimation = std::move(src);
  }
  if (cfg.gbm && cfg.estimation) throw ConfigError("config: give either gbm or estimate, not both");

  if (doc.contains("plant")) {
    const auto& p = doc.at("plant");
    reject_unknown(p, "plant", {"M", "P", "T", "upgrade"});
    PlantParams plant;
    plant.emission_rate = field<double>(p, "plant", "M");
    plant.unit_profit = field<double>(p, "plant", "P");
    if (p.contains("T") && !p.at("T").is_number_integer()) {
      throw ConfigError("plant.T: must be a whole number of trading days");
    }
    plant.horizon = field<int>(p, "plant", "T");
    if (p.contains("upgrade") && !p.at("upgrade").is_null()) {
      const auto& u = p.at("upgrade");
      reject_unknown(u, "plant.upgrade", {"day", "P_new", "M_new"});
      plant.upgrade = Upgrade{field<double>(u, "plant.upgrade", "day"),
                              field<double>(u, "plant.upgrade", "P_new"),
                              field<double>(u, "plant.upgrade", "M_new")};
    }
    validate(plant);
    cfg.plant = plant;
  }

  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    reject_unknown(s, "solver", {"samples_per_node", "delta", "seed", "stop_tolerance", "grid",
                                 "smoothing", "smoothing_window"});
    auto& sc = cfg.solver;
    if (auto v = optional_field<std::size_t>(s, "solver", "samples_per_node")) sc.samples_per_node = *v;
    if (auto v = optional_field<double>(s, "solver", "delta")) sc.delta = *v;
    if (auto v = optional_field<std::uint64_t>(s, "solver", "seed")) sc.seed = Seed{*v};
    sc.stop_tolerance = optional_field<double>(s, "solver", "stop_tolerance");
    if (s.contains("grid")) {
      const auto& g = s.at("grid");
      reject_unknown(g, "solver.grid", {"levels", "lower", "upper", "follow_drift"});
      if (auto v = optional_field<std::size_t>(g, "solver.grid", "levels")) sc.grid.levels = *v;
      sc.grid.lower = optional_field<double>(g, "solver.grid", "lower");
      sc.grid.upper = optional_field<double>(g, "solver.grid", "upper");
      if (auto v = optional_field<bool>(g, "solver.grid", "follow_drift")) sc.grid.follow_drift = *v;
      if (sc.grid.lower && sc.grid.upper && !(*sc.grid.lower < *sc.grid.upper)) {
        throw ConfigError("solver.grid.upper: must exceed solver.grid.lower");
      }
    }
    if (auto v = optional_field<std::string>(s, "solver", "smoothing")) {
      if (*v == "none") cfg.smoothing.kind = SmoothingMethod::Kind::None;
      else if (*v == "isotonic") cfg.smoothing.kind = SmoothingMethod::Kind::Isotonic;
      else if (*v == "moving-average") cfg.smoothing.kind = SmoothingMethod::Kind::MovingAverage;
      else throw ConfigError("solver.smoothing: expected none, isotonic or moving-average");
    }
    if (auto v = optional_field<std::size_t>(s, "solver", "smoothing_window")) {
      if (*v < 1) throw ConfigError("solver.smoothing_window: must be >= 1");
      cfg.smoothing.window = *v;
    }
    try {
      validate(sc);
    } catch (const ConfigError& e) {
      rethrow_with_prefix("solver", e);
    }
  }

  if (doc.contains("monitor")) {
    const auto& m = doc.at("monitor");
    reject_unknown(m, "monitor", {"csv", "from", "columns"});
    MonitorOptions opt;
    opt.csv = resolve_path(base_dir, field<std::string>(m, "monitor", "csv"));
    opt.format = parse_columns(m, "monitor");
    opt.from = optional_date(m, "monitor", "from");
    cfg.monitor = std::move(opt);
  }

  if (doc.contains("surface")) {
    const auto& s = doc.at("surface");
    reject_unknown(s, "surface", {"p_values", "p_min", "p_max", "p_step"});
    SurfaceOptions opt;
    if (s.contains("p_values")) {
      opt.p_values = field<std::vector<double>>(s, "surface", "p_values");
    } else {
      const double lo = field<double>(s, "surface", "p_min");
      const double hi = field<double>(s, "surface", "p_max");
      const double step = field<double>(s, "surface", "p_step");
      if (!(step > 0.0) || !(hi >= lo)) throw ConfigError("surface: need p_step > 0 and p_max >= p_min");
      const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
      for (std::size_t k = 0; k < count; ++k) opt.p_values.push_back(lo + step * static_cast<double>(k));
    }
    if (opt.p_values.empty()) throw ConfigError("surface.p_values: must not be empty");
    for (std::size_t k = 0; k < opt.p_values.size(); ++k) {
      if (!(opt.p_values[k] > 0.0)) throw ConfigError("surface.p_values: must be positive");
      if (k > 0 && !(opt.p_values[k - 1] < opt.p_values[k])) {
        throw ConfigError("surface.p_values: must be strictly increasing");
      }
    }
    cfg.surface = std::move(opt);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

GbmParams resolve_gbm(const RunConfig& config) {
  if (config.gbm) return *config.gbm;
  if (!config.estimation) throw ConfigError("config: one of gbm or estimate is required");
  const auto& src = *config.estimation;
  const auto all = load_price_csv(src.csv, src.format);
  const auto win = window(all, src.from ? &*src.from : nullptr, src.to ? &*src.to : nullptr);
  const auto est = estimate_gbm(log_returns(win));
  GbmParams p{src.y0.value_or(win.entries.back().price), est.mu, est.sigma};
  validate(p);
  return p;
}

void write_files_atomically(const std::filesystem::path& dir,
                            const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<fs::path> staged;
  const auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path tmp = dir / ("." + name + ".tmp");
    staged.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw DataError("failed writing '" + tmp.string() + "'");
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    fs::rename(staged[k], dir / files[k].first, ec);
    if (ec) {
      cleanup();
      throw DataError("failed to move output into place: " + ec.message());
    }
  }
}

}  // namespace haltbound
