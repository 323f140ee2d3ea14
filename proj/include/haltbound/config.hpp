#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "haltbound/gbm.hpp"
#include "haltbound/market_data.hpp"
#include "haltbound/plant_model.hpp"
#include "haltbound/solver.hpp"

namespace haltbound {

/// Estimate the price process from a window of a quotation file.
struct EstimationSource {
  std::filesystem::path csv;
  CsvFormat format;
  std::optional<Date> from;
  std::optional<Date> to;
  /// Starting price of the decision horizon; defaults to the last price of the window.
  std::optional<double> y0;
};

struct MonitorOptions {
  std::filesystem::path csv;
  CsvFormat format;
  /// First trading day (day 0) of the monitored horizon.
  std::optional<Date> from;
};

struct SurfaceOptions {
  std::vector<double> p_values;
};

/// One run of the command-line tool, read from a single JSON document.
/// Exactly one of `gbm` and `estimation` is set.
struct RunConfig {
  std::optional<GbmParams> gbm;
  std::optional<EstimationSource> estimation;
  std::optional<PlantParams> plant;
  SolverConfig solver;
  SmoothingMethod smoothing;
  std::optional<MonitorOptions> monitor;
  std::optional<SurfaceOptions> surface;
};

/// Throws ConfigError naming the offending field. Relative paths resolve
/// against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Explicit parameters, or the estimate over the configured window.
GbmParams resolve_gbm(const RunConfig& config);

/// Writes every file under a temporary name first and renames them into
/// place only after all writes succeeded; on failure nothing is left behind.
void write_files_atomically(const std::filesystem::path& dir,
                            const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace haltbound
