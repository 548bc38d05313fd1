#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tsrnn/features.hpp"

namespace tsrnn::app {

struct CsvOptions {
  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  std::string hour_column;  // when set, added to the timestamp column as hours
  std::vector<std::string> covariates;
};

// Header row required. Rows are sorted by timestamp, then the spacing is
// validated. Duplicate timestamps, gaps and unparsable rows raise DataError.
TimeSeries load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;  // DataError if absent
};

CsvTable read_csv_table(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(const std::string& line);

// "%.6g"; NaN is written as an empty field.
std::string format_value(double v);
// Empty field, "nan" or "NaN" parse to NaN; anything else unparsable raises.
double parse_value(const std::string& field, const std::string& where);

}  // namespace tsrnn::app
