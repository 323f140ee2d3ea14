#include "haltbound/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "haltbound/errors.hpp"

namespace haltbound {

namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits one CSV record; double quotes may wrap a field containing commas.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError("missing column '" + name + "' in CSV header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

}  // namespace

Date parse_iso_date(std::string_view text) {
  text = trim(text);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const auto bad = [&] { return DataError("invalid date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  const auto read = [&](std::size_t pos, std::size_t len, auto& value) {
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len) throw bad();
  };
  read(0, 4, y);
  read(5, 2, m);
  read(8, 2, d);
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw bad();
  return date;
}

std::string format_iso_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

std::vector<double> PriceSeries::prices() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.price);
  return out;
}

std::vector<std::size_t> PriceSeries::traded_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].volume > 0.0) out.push_back(i);
  }
  return out;
}

void validate(const PriceSeries& series) {
  for (std::size_t i = 0; i < series.entries.size(); ++i) {
    const auto& e = series.entries[i];
    if (!(e.price > 0.0) || !std::isfinite(e.price)) {
      throw DataError("non-positive price at row " + std::to_string(i));
    }
    if (!(e.volume >= 0.0)) throw DataError("negative volume at row " + std::to_string(i));
    if (i > 0 && !(series.entries[i - 1].date < e.date)) {
      throw DataError("non-monotone dates at row " + std::to_string(i));
    }
  }
}

PriceSeries parse_price_csv(std::string_view text, const CsvFormat& format, std::string label) {
  PriceSeries series;
  series.label = std::move(label);

  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::size_t date_col = 0;
  std::size_t price_col = 0;
  std::optional<std::size_t> volume_col;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
      line.remove_prefix(3);
    }
    if (trim(line).empty()) {
      if (eol == text.size()) break;
      continue;
    }
    auto fields = split_record(line);
    if (header.empty()) {
      header = std::move(fields);
      date_col = column_index(header, format.date_column);
      price_col = column_index(header, format.price_column);
      if (!format.volume_column.empty()) volume_col = column_index(header, format.volume_column);
      continue;
    }
    const std::size_t need = std::max({date_col, price_col, volume_col.value_or(0)}) + 1;
    if (fields.size() < need) {
      throw DataError(line_prefix(line_no) + "expected at least " + std::to_string(need) +
                      " fields, got " + std::to_string(fields.size()));
    }
    PriceEntry entry;
    try {
      entry.date = parse_iso_date(fields[date_col]);
    } catch (const DataError& e) {
      throw DataError(line_prefix(line_no) + e.what());
    }
    if (!parse_double(fields[price_col], entry.price)) {
      throw DataError(line_prefix(line_no) + "unparseable price '" + fields[price_col] + "'");
    }
    if (volume_col && !parse_double(fields[*volume_col], entry.volume)) {
      // Exchanges leave the volume cell blank on no-trade days.
      if (!trim(fields[*volume_col]).empty()) {
        throw DataError(line_prefix(line_no) + "unparseable volume '" + fields[*volume_col] + "'");
      }
      entry.volume = 0.0;
    }
    if (!(entry.price > 0.0) || !std::isfinite(entry.price)) {
      throw DataError(line_prefix(line_no) + "non-positive price");
    }
    if (entry.volume < 0.0) throw DataError(line_prefix(line_no) + "negative volume");
    if (!series.entries.empty() && !(series.entries.back().date < entry.date)) {
      throw DataError(line_prefix(line_no) + "non-monotone dates");
    }
    series.entries.push_back(entry);
    if (eol == text.size()) break;
  }
  if (header.empty()) throw DataError("CSV has no header row");
  return series;
}

PriceSeries load_price_csv(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open price file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_price_csv(buf.str(), format, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ReturnSeries log_returns(const PriceSeries& series) {
  if (series.size() < 2) throw DataError("series too short: need at least 2 prices for returns");
  ReturnSeries out;
  out.returns.reserve(series.size() - 1);
  for (std::size_t i = 1; i < series.size(); ++i) {
    out.returns.push_back(std::log(series.entries[i].price) - std::log(series.entries[i - 1].price));
  }
  return out;
}

GbmEstimate estimate_gbm(const ReturnSeries& returns) {
  const auto& r = returns.returns;
  if (r.size() < 2) throw DataError("need at least 2 returns to estimate volatility");
  // Shifted two-pass sums: identical returns give exactly (c, 0).
  const double shift = r.front();
  const double n = static_cast<double>(r.size());
  double sum = 0.0;
  for (double x : r) sum += x - shift;
  const double mean_shifted = sum / n;
  double ss = 0.0;
  for (double x : r) {
    const double d = (x - shift) - mean_shifted;
    ss += d * d;
  }
  GbmEstimate est;
  est.mu = shift + mean_shifted;
  est.sigma = std::sqrt(ss / (n - 1.0));
  est.sample_count = r.size();
  return est;
}

void to_json(nlohmann::json& j, const GbmEstimate& e) {
  j = nlohmann::json{{"mu", e.mu}, {"sigma", e.sigma}, {"sample_count", e.sample_count}};
}

void from_json(const nlohmann::json& j, GbmEstimate& e) {
  j.at("mu").get_to(e.mu);
  j.at("sigma").get_to(e.sigma);
  j.at("sample_count").get_to(e.sample_count);
}

std::pair<PriceSeries, PriceSeries> split_at(const PriceSeries& series, const Date& cutoff) {
  if (series.empty() || cutoff < series.entries.front().date ||
      series.entries.back().date < cutoff) {
    throw DataError("cutoff " + format_iso_date(cutoff) + " outside series date range");
  }
  const auto it = std::lower_bound(series.entries.begin(), series.entries.end(), cutoff,
                                   [](const PriceEntry& e, const Date& d) { return e.date < d; });
  PriceSeries head{{series.entries.begin(), it}, series.label};
  PriceSeries tail{{it, series.entries.end()}, series.label};
  return {std::move(head), std::move(tail)};
}

PriceSeries window(const PriceSeries& series, const Date* from, const Date* to) {
  PriceSeries out;
  out.label = series.label;
  for (const auto& e : series.entries) {
    if (from && e.date < *from) continue;
    if (to && *to < e.date) continue;
    out.entries.push_back(e);
  }
  return out;
}

PriceSeries concatenate(const PriceSeries& head, const PriceSeries& tail) {
  PriceSeries out{head.entries, head.label.empty() ? tail.label : head.label};
  out.entries.insert(out.entries.end(), tail.entries.begin(), tail.entries.end());
  validate(out);
  return out;
}

}  // namespace haltbound
