#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tsrnn/features.hpp"

namespace tsrnn::testing {

// Hourly series starting 2020-01-01T00:00:00.
Timestamp hourly(std::size_t i);

// y_t = a1 y_{t-1} + a2 y_{t-2} + amp sin(2 pi t / 24) + level + sigma e_t.
struct Ar2Daily {
  double a1 = 0.6;
  double a2 = -0.2;
  double amplitude = 2.0;
  double level = 10.0;
  double sigma = 0.5;
};
TimeSeries ar2_daily(std::size_t n, std::uint64_t seed, const Ar2Daily& p = {});

// Target driven by its lag-1 value and a daily cycle, plus one covariate
// "noise" that is independent of everything.
TimeSeries driver_with_distractor(std::size_t n, std::uint64_t seed);

// Lags {1, 2, 24} and only the calendar features that vary within a few
// weeks, for short test series.
FeatureConfig short_series_features();

void write_csv(const std::filesystem::path& path, const TimeSeries& series);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

}  // namespace tsrnn::testing
