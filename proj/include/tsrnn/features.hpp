#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsrnn/numeric.hpp"

namespace tsrnn {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" and "YYYY-MM-DDTHH:MM[:SS]".
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

// One ISO-8601 date per line; blank lines and '#' comments are ignored.
std::set<Date> load_holidays(const std::filesystem::path& path);

struct TimeSeries {
  std::vector<Timestamp> timestamps;
  std::vector<double> values;
  // Optional exogenous columns (time x covariate). Not deterministic, so a
  // series carrying them cannot be forecast recursively.
  std::vector<std::string> covariate_names;
  Matrix covariates;

  std::size_t size() const noexcept { return values.size(); }
  std::chrono::seconds spacing() const;
  TimeSeries head(std::size_t n) const;
};

// Throws DataError on non-increasing timestamps, gaps or non-finite values.
void validate_series(const TimeSeries& series);

enum class FeatureKind { Lag, Trend, Calendar, Covariate };

struct FeatureInfo {
  std::string name;
  FeatureKind kind = FeatureKind::Calendar;
  int lag = 0;        // only for FeatureKind::Lag
  std::string group;  // importance grouping key
};

struct FeatureFrame {
  std::vector<FeatureInfo> features;
  Matrix columns;  // time x feature
  std::vector<double> target;
  std::vector<Timestamp> timestamps;
  std::size_t valid_from = 0;

  std::size_t rows() const noexcept { return columns.rows(); }
  std::size_t cols() const noexcept { return columns.cols(); }
  std::vector<std::string> names() const;
  // Throws DataError for an unknown name.
  std::size_t index_of(const std::string& name) const;
};

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
};

enum class ScalerKind { MinMax, Standard };

// Per-column statistics: (min, max) for MinMax, (mean, sample sd) for Standard.
struct ScalerState {
  ScalerKind kind = ScalerKind::MinMax;
  std::vector<std::string> names;
  std::vector<double> first;
  std::vector<double> second;

  // max - min, or sd: the linear factor between scaled and original units.
  double spread(std::size_t i) const;
  double scale(std::size_t i, double x) const;
  double unscale(std::size_t i, double x) const;
};

struct FrameScalers {
  ScalerState features;
  ScalerState target;  // single column named "target"
};

ScalerState fit_scaler(const FeatureFrame& frame, ScalerKind kind, IndexRange train_rows);
ScalerState fit_target_scaler(const FeatureFrame& frame, ScalerKind kind, IndexRange train_rows);
FeatureFrame apply_scaler(const ScalerState& state, const FeatureFrame& frame);
FeatureFrame inverse_scale(const ScalerState& state, const FeatureFrame& frame);
// Scales features and target together.
FeatureFrame apply_scalers(const FrameScalers& scalers, const FeatureFrame& frame);

// (sin(2 pi pos / P), cos(2 pi pos / P)) for pos in 1..P.
std::pair<double, double> encode_cyclical(int position, int period);

struct LagColumns {
  std::vector<std::string> names;
  Matrix columns;  // NaN where the lag reaches before the series start
  std::size_t valid_from = 0;
};

LagColumns build_lags(const TimeSeries& series, std::span<const int> lags);
std::vector<double> build_trend(const TimeSeries& series);

struct CalendarConfig {
  bool hour = true;
  bool day_of_week = true;
  bool month = true;
  bool season = true;
  bool week_of_year = true;
  bool afternoon = true;
  bool working_hour = true;
  bool holiday = false;
  bool working_day = true;
  bool quarter_start = true;
  bool month_start = true;
  int working_hour_begin = 9;  // [begin, end) on working days
  int working_hour_end = 17;
  int afternoon_begin = 12;
  int afternoon_end = 18;
  std::set<Date> holidays;
};

struct CalendarColumns {
  std::vector<FeatureInfo> features;
  Matrix columns;
};

CalendarColumns build_calendar_features(std::span<const Timestamp> timestamps,
                                        const CalendarConfig& config);

struct FeatureConfig {
  std::vector<int> lags{1, 2, 3, 24, 48, 168};
  int recent_lag_max = 3;  // lags up to this go to the "recent_lags" group
  bool trend = true;
  CalendarConfig calendar;
};

// Column layout: lags, trend, calendar (sin/cos pairs, then flags), covariates.
// build() and row() share the same scalar code so a row computed on its own
// is bit-identical to the corresponding row of a full build.
class FeatureBuilder {
 public:
  FeatureBuilder(FeatureConfig config, std::vector<std::string> covariate_names);

  const FeatureConfig& config() const noexcept { return config_; }
  const std::vector<FeatureInfo>& features() const noexcept { return features_; }
  std::size_t size() const noexcept { return features_.size(); }
  std::size_t max_lag() const noexcept;
  bool has_covariates() const noexcept { return !covariate_names_.empty(); }

  FeatureFrame build(const TimeSeries& series) const;

  // Raw features for time index t. Only values[t - lag] is read for each lag.
  void row(std::size_t t, Timestamp ts, std::span<const double> values,
           std::span<const double> covariates, std::span<double> out) const;

 private:
  FeatureConfig config_;
  std::vector<std::string> covariate_names_;
  std::vector<FeatureInfo> features_;
};

struct SequenceBatch {
  std::size_t seq_len = 0;
  std::size_t n_features = 0;
  std::vector<double> inputs;  // window-major, then step, then feature
  std::vector<double> targets;
  std::vector<std::size_t> window_start;

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> window(std::size_t w) const {
    return {inputs.data() + w * seq_len * n_features, seq_len * n_features};
  }
  std::span<double> window(std::size_t w) {
    return {inputs.data() + w * seq_len * n_features, seq_len * n_features};
  }
  std::size_t target_index(std::size_t w) const { return window_start[w] + seq_len; }
};

// One window per start s >= valid_from with s + seq_len < rows.
SequenceBatch window_sequences(const FeatureFrame& frame, std::size_t seq_len);
// Windows at the given starts only.
SequenceBatch window_sequences(const FeatureFrame& frame, std::size_t seq_len,
                               std::span<const std::size_t> starts);
SequenceBatch select_windows(const SequenceBatch& batch, std::span<const std::size_t> indices);

// Raw and scaled frames plus the chronological split at the window level:
// a window is a test window iff its target index is >= split_index.
struct PreparedData {
  FeatureFrame raw;
  FeatureFrame scaled;
  FrameScalers scalers;
  SequenceBatch windows;
  std::size_t split_index = 0;
  std::vector<std::size_t> train_windows;
  std::vector<std::size_t> test_windows;
};

PreparedData prepare_data(const TimeSeries& series, const FeatureBuilder& builder,
                          ScalerKind kind, std::size_t seq_len, double train_fraction);

}  // namespace tsrnn
