#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace haltbound {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD. Throws DataError on malformed or impossible dates.
Date parse_iso_date(std::string_view text);
std::string format_iso_date(const Date& date);

struct PriceEntry {
  Date date;
  double price = 0.0;   // currency per ton
  double volume = 0.0;  // tons; zero-volume rows are kept
};

/// Daily allowance quotations. Dates strictly increase, prices are positive.
struct PriceSeries {
  std::vector<PriceEntry> entries;
  std::string label;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
  std::vector<double> prices() const;
  /// Indices of rows that traded nonzero volume.
  std::vector<std::size_t> traded_indices() const;
};

/// Throws DataError if the series breaks the date or price invariants.
void validate(const PriceSeries& series);

/// Column names used when reading an exchange export.
struct CsvFormat {
  std::string date_column = "date";
  std::string price_column = "close";
  /// Empty means the file carries no volume column (volume read as 0).
  std::string volume_column = "volume";
};

/// Reads a header-first CSV file. Errors carry the 1-based line number.
PriceSeries load_price_csv(const std::filesystem::path& path, const CsvFormat& format = {});
PriceSeries parse_price_csv(std::string_view text, const CsvFormat& format = {},
                            std::string label = {});

/// Daily log returns; returns[i-1] = ln(price_i) - ln(price_{i-1}).
struct ReturnSeries {
  std::vector<double> returns;
};

ReturnSeries log_returns(const PriceSeries& series);

/// Per-trading-day drift and volatility of the allowance price.
///
/// `mu` is the plain sample mean of the log returns, which estimates
/// mu - sigma^2/2 of the diffusion rather than mu itself. It is kept
/// unadjusted so that historical parameter tables are reproduced as-is;
/// callers wanting the Ito-corrected drift add sigma^2/2 themselves.
struct GbmEstimate {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t sample_count = 0;
};

/// Sample mean and (n-1)-denominator standard deviation of the returns.
GbmEstimate estimate_gbm(const ReturnSeries& returns);

void to_json(nlohmann::json& j, const GbmEstimate& e);
void from_json(const nlohmann::json& j, GbmEstimate& e);

/// Rows strictly before `cutoff` go to the first part, the rest to the second.
/// Throws DataError when cutoff lies outside [first date, last date].
std::pair<PriceSeries, PriceSeries> split_at(const PriceSeries& series, const Date& cutoff);

/// Rows with from <= date <= to (either bound may be omitted by passing nullptr).
PriceSeries window(const PriceSeries& series, const Date* from, const Date* to);

PriceSeries concatenate(const PriceSeries& head, const PriceSeries& tail);

}  // namespace haltbound
