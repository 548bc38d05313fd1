#include "tsrnn/app/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "tsrnn/errors.hpp"

namespace tsrnn::app {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field += ch;
    }
  }
  out.push_back(field);
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("CSV column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file, header row expected");
  table.header = split_csv_line(line);
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

std::string format_value(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double parse_value(const std::string& field, const std::string& where) {
  if (field.empty() || field == "nan" || field == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw DataError(where + ": cannot parse number '" + field + "'");
  return v;
}

namespace {

double parse_finite(const std::string& field, const std::string& where) {
  const double v = parse_value(field, where);
  if (!std::isfinite(v)) throw DataError(where + ": missing or non-finite value");
  return v;
}

}  // namespace

TimeSeries load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  const CsvTable table = read_csv_table(path);
  const std::size_t ts_col = table.column(options.timestamp_column);
  const std::size_t y_col = table.column(options.value_column);
  std::optional<std::size_t> hour_col;
  if (!options.hour_column.empty()) hour_col = table.column(options.hour_column);
  std::vector<std::size_t> cov_cols;
  for (const auto& c : options.covariates) cov_cols.push_back(table.column(c));

  // Blank lines are skipped, so line numbers are recomputed from the file.
  std::vector<std::size_t> line_of;
  {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    for (std::size_t number = 2; std::getline(in, line); ++number) {
      if (!(line.empty() || line == "\r")) line_of.push_back(number);
    }
  }

  const std::size_t n = table.rows.size();
  std::vector<Timestamp> ts(n);
  std::vector<double> y(n);
  Matrix cov(n, cov_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::string where = path.string() + ":" + std::to_string(line_of[i]);
    const auto parsed = parse_timestamp(row[ts_col]);
    if (!parsed) throw DataError(where + ": cannot parse timestamp '" + row[ts_col] + "'");
    ts[i] = *parsed;
    if (hour_col) {
      const double h = parse_finite(row[*hour_col], where);
      if (h < 0.0 || h != std::floor(h)) throw DataError(where + ": hour must be a non-negative integer");
      ts[i] += std::chrono::hours(static_cast<long long>(h));
    }
    y[i] = parse_finite(row[y_col], where);
    for (std::size_t k = 0; k < cov_cols.size(); ++k) cov(i, k) = parse_finite(row[cov_cols[k]], where);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });

  TimeSeries series;
  series.covariate_names = options.covariates;
  series.covariates = Matrix(n, cov_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t src = order[i];
    if (i > 0 && ts[src] == series.timestamps.back()) {
      throw DataError(path.string() + ":" + std::to_string(line_of[src]) + ": duplicate timestamp " +
                      format_timestamp(ts[src]));
    }
    series.timestamps.push_back(ts[src]);
    series.values.push_back(y[src]);
    for (std::size_t k = 0; k < cov_cols.size(); ++k) series.covariates(i, k) = cov(src, k);
  }
  validate_series(series);
  return series;
}

}  // namespace tsrnn::app
