#include "tsrnn/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "tsrnn/errors.hpp"

namespace tsrnn {

namespace chr = std::chrono;

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) ||
      !parse_int(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (text.size() > 10) {
    if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
    const std::string_view time = text.substr(11);
    if (time.size() != 5 && time.size() != 8) return std::nullopt;
    if (time[2] != ':' || !parse_int(time.substr(0, 2), hh) || !parse_int(time.substr(3, 2), mm)) {
      return std::nullopt;
    }
    if (time.size() == 8 && (time[5] != ':' || !parse_int(time.substr(6, 2), ss))) return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;
  }
  return Timestamp{Date{ymd}} + chr::hours{hh} + chr::minutes{mm} + chr::seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  const auto day = chr::floor<chr::days>(ts);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::set<Date> load_holidays(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open holiday file " + path.string());
  std::set<Date> days;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto ts = text.size() == 10 ? parse_timestamp(text) : std::nullopt;
    if (!ts) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": not an ISO-8601 date");
    }
    days.insert(chr::floor<chr::days>(*ts));
  }
  return days;
}

chr::seconds TimeSeries::spacing() const {
  if (timestamps.size() < 2) return chr::seconds{0};
  return timestamps[1] - timestamps[0];
}

TimeSeries TimeSeries::head(std::size_t n) const {
  n = std::min(n, size());
  TimeSeries out;
  out.timestamps.assign(timestamps.begin(), timestamps.begin() + n);
  out.values.assign(values.begin(), values.begin() + n);
  out.covariate_names = covariate_names;
  out.covariates = Matrix(n, covariate_names.size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < covariate_names.size(); ++c) out.covariates(t, c) = covariates(t, c);
  }
  return out;
}

void validate_series(const TimeSeries& series) {
  if (series.timestamps.size() != series.values.size()) {
    throw DataError("time series has mismatched timestamp and value counts");
  }
  if (series.covariates.rows() != series.size() ||
      series.covariates.cols() != series.covariate_names.size()) {
    throw DataError("covariate matrix does not match the series length");
  }
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!std::isfinite(series.values[t])) {
      throw DataError("non-finite value at " + format_timestamp(series.timestamps[t]));
    }
  }
  if (series.size() < 2) return;
  const auto step = series.spacing();
  if (step <= chr::seconds{0}) {
    throw DataError("timestamps must be strictly increasing (first pair at " +
                    format_timestamp(series.timestamps[0]) + ")");
  }
  for (std::size_t t = 1; t < series.size(); ++t) {
    const auto delta = series.timestamps[t] - series.timestamps[t - 1];
    if (delta != step) {
      throw DataError("irregular spacing: gap between " + format_timestamp(series.timestamps[t - 1]) +
                      " and " + format_timestamp(series.timestamps[t]));
    }
  }
}

std::vector<std::string> FeatureFrame::names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

std::size_t FeatureFrame::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  throw DataError("unknown feature '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scalers

double ScalerState::spread(std::size_t i) const {
  return kind == ScalerKind::MinMax ? second[i] - first[i] : second[i];
}

double ScalerState::scale(std::size_t i, double x) const { return (x - first[i]) / spread(i); }

double ScalerState::unscale(std::size_t i, double x) const { return x * spread(i) + first[i]; }

namespace {

std::pair<double, double> column_stats(ScalerKind kind, const std::string& name,
                                       IndexRange rows, auto&& value_at) {
  if (rows.empty()) throw DataError("cannot fit scaler on an empty row range");
  if (kind == ScalerKind::MinMax) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = rows.begin; t < rows.end; ++t) {
      lo = std::min(lo, value_at(t));
      hi = std::max(hi, value_at(t));
    }
    if (!(hi > lo)) throw DataError("degenerate feature '" + name + "': constant over training rows "
                                    "(disable it or use a longer series)");
    return {lo, hi};
  }
  if (rows.size() < 2) throw DataError("standard scaler needs at least two training rows");
  double sum = 0.0;
  for (std::size_t t = rows.begin; t < rows.end; ++t) sum += value_at(t);
  const double mean = sum / static_cast<double>(rows.size());
  double ss = 0.0;
  for (std::size_t t = rows.begin; t < rows.end; ++t) {
    const double d = value_at(t) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(rows.size() - 1));
  if (!(sd > 0.0)) throw DataError("degenerate feature '" + name + "': zero standard deviation");
  return {mean, sd};
}

void check_rows(const FeatureFrame& frame, IndexRange rows) {
  if (rows.end > frame.rows() || rows.begin < frame.valid_from) {
    throw DataError("scaler row range outside the valid rows of the frame");
  }
}

}  // namespace

ScalerState fit_scaler(const FeatureFrame& frame, ScalerKind kind, IndexRange train_rows) {
  check_rows(frame, train_rows);
  ScalerState state;
  state.kind = kind;
  state.names = frame.names();
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    const auto [a, b] = column_stats(kind, state.names[c], train_rows,
                                     [&](std::size_t t) { return frame.columns(t, c); });
    state.first.push_back(a);
    state.second.push_back(b);
  }
  return state;
}

ScalerState fit_target_scaler(const FeatureFrame& frame, ScalerKind kind, IndexRange train_rows) {
  check_rows(frame, train_rows);
  ScalerState state;
  state.kind = kind;
  state.names = {"target"};
  const auto [a, b] =
      column_stats(kind, "target", train_rows, [&](std::size_t t) { return frame.target[t]; });
  state.first = {a};
  state.second = {b};
  return state;
}

namespace {

void check_schema(const ScalerState& state, const FeatureFrame& frame) {
  if (state.names.size() != frame.cols()) throw DataError("scaler/frame feature count mismatch");
  for (std::size_t c = 0; c < frame.cols(); ++c) {
    if (state.names[c] != frame.features[c].name) {
      throw DataError("scaler has no statistics for feature '" + frame.features[c].name + "'");
    }
  }
}

}  // namespace

FeatureFrame apply_scaler(const ScalerState& state, const FeatureFrame& frame) {
  check_schema(state, frame);
  FeatureFrame out = frame;
  for (std::size_t t = 0; t < out.rows(); ++t) {
    for (std::size_t c = 0; c < out.cols(); ++c) out.columns(t, c) = state.scale(c, frame.columns(t, c));
  }
  return out;
}

FeatureFrame inverse_scale(const ScalerState& state, const FeatureFrame& frame) {
  check_schema(state, frame);
  FeatureFrame out = frame;
  for (std::size_t t = 0; t < out.rows(); ++t) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out.columns(t, c) = state.unscale(c, frame.columns(t, c));
    }
  }
  return out;
}

FeatureFrame apply_scalers(const FrameScalers& scalers, const FeatureFrame& frame) {
  FeatureFrame out = apply_scaler(scalers.features, frame);
  for (double& y : out.target) y = scalers.target.scale(0, y);
  return out;
}

// ---------------------------------------------------------------------------
// Feature construction

std::pair<double, double> encode_cyclical(int position, int period) {
  if (period < 1 || position < 1 || position > period) {
    throw DomainError("cyclical position " + std::to_string(position) + " outside 1.." +
                      std::to_string(period));
  }
  const double angle = 2.0 * std::numbers::pi * position / period;
  return {std::sin(angle), std::cos(angle)};
}

namespace {

void check_lags(std::span<const int> lags) {
  for (int k : lags) {
    if (k <= 0) throw ConfigError("lag " + std::to_string(k) + " rejected: lags must be positive");
  }
}

}  // namespace

LagColumns build_lags(const TimeSeries& series, std::span<const int> lags) {
  check_lags(lags);
  LagColumns out;
  const std::size_t n = series.size();
  out.columns = Matrix(n, lags.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < lags.size(); ++j) {
    const auto k = static_cast<std::size_t>(lags[j]);
    if (k >= n) {
      throw DataError("insufficient history: lag " + std::to_string(k) + " needs more than " +
                      std::to_string(n) + " observations");
    }
    out.names.push_back("lag_" + std::to_string(k));
    for (std::size_t t = k; t < n; ++t) out.columns(t, j) = series.values[t - k];
    out.valid_from = std::max(out.valid_from, k);
  }
  return out;
}

std::vector<double> build_trend(const TimeSeries& series) {
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = static_cast<double>(t);
  return out;
}

namespace {

struct CyclicalComponent {
  const char* name;
  int period;
  bool CalendarConfig::*toggle;
};

constexpr CyclicalComponent kCyclical[] = {
    {"season", 4, &CalendarConfig::season},
    {"month", 12, &CalendarConfig::month},
    {"week", 53, &CalendarConfig::week_of_year},
    {"dow", 7, &CalendarConfig::day_of_week},
    {"hour", 24, &CalendarConfig::hour},
};

struct FlagComponent {
  const char* name;
  bool CalendarConfig::*toggle;
};

constexpr FlagComponent kFlags[] = {
    {"afternoon", &CalendarConfig::afternoon},
    {"working_hour", &CalendarConfig::working_hour},
    {"holiday", &CalendarConfig::holiday},
    {"working_day", &CalendarConfig::working_day},
    {"quarter_start", &CalendarConfig::quarter_start},
    {"month_start", &CalendarConfig::month_start},
};

int iso_week(Date day) {
  const unsigned iso_wd = chr::weekday{day}.iso_encoding();
  const Date thursday = day + chr::days{4 - static_cast<int>(iso_wd)};
  const chr::year_month_day ymd{thursday};
  const Date jan1 = Date{ymd.year() / chr::January / 1};
  return static_cast<int>((thursday - jan1).count() / 7) + 1;
}

struct CalendarFacts {
  int hour;       // 0..23
  int dow;        // ISO 1 (Mon) .. 7 (Sun)
  int month;      // 1..12
  int day;        // 1..31
  int week;       // ISO 1..53
  int season;     // 1 winter (Dec-Feb) .. 4 autumn
  bool holiday;
};

CalendarFacts calendar_facts(Timestamp ts, const CalendarConfig& config) {
  const Date day = chr::floor<chr::days>(ts);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{ts - day};
  CalendarFacts f{};
  f.hour = static_cast<int>(hms.hours().count());
  f.dow = static_cast<int>(chr::weekday{day}.iso_encoding());
  f.month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  f.day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  f.week = iso_week(day);
  f.season = (f.month % 12) / 3 + 1;
  f.holiday = config.holidays.contains(day);
  return f;
}

int cyclical_position(const CalendarFacts& f, std::string_view name) {
  if (name == "hour") return f.hour == 0 ? 24 : f.hour;
  if (name == "dow") return f.dow;
  if (name == "month") return f.month;
  if (name == "week") return f.week;
  return f.season;
}

double flag_value(const CalendarFacts& f, const CalendarConfig& config, std::string_view name) {
  const bool working_day = f.dow <= 5 && !f.holiday;
  bool v = false;
  if (name == "afternoon") {
    v = f.hour >= config.afternoon_begin && f.hour < config.afternoon_end;
  } else if (name == "working_hour") {
    v = working_day && f.hour >= config.working_hour_begin && f.hour < config.working_hour_end;
  } else if (name == "holiday") {
    v = f.holiday;
  } else if (name == "working_day") {
    v = working_day;
  } else if (name == "quarter_start") {
    v = f.day == 1 && (f.month - 1) % 3 == 0;
  } else if (name == "month_start") {
    v = f.day == 1;
  }
  return v ? 1.0 : 0.0;
}

std::vector<FeatureInfo> calendar_features(const CalendarConfig& config) {
  std::vector<FeatureInfo> out;
  for (const auto& c : kCyclical) {
    if (!(config.*c.toggle)) continue;
    out.push_back({std::string(c.name) + "_sin", FeatureKind::Calendar, 0, c.name});
    out.push_back({std::string(c.name) + "_cos", FeatureKind::Calendar, 0, c.name});
  }
  for (const auto& f : kFlags) {
    if (config.*f.toggle) out.push_back({f.name, FeatureKind::Calendar, 0, f.name});
  }
  return out;
}

// Writes the enabled calendar columns for one timestamp; layout matches calendar_features().
void calendar_row(Timestamp ts, const CalendarConfig& config, std::span<double> out) {
  const CalendarFacts facts = calendar_facts(ts, config);
  std::size_t j = 0;
  for (const auto& c : kCyclical) {
    if (!(config.*c.toggle)) continue;
    const auto [s, co] = encode_cyclical(cyclical_position(facts, c.name), c.period);
    out[j++] = s;
    out[j++] = co;
  }
  for (const auto& f : kFlags) {
    if (config.*f.toggle) out[j++] = flag_value(facts, config, f.name);
  }
}

}  // namespace

CalendarColumns build_calendar_features(std::span<const Timestamp> timestamps,
                                        const CalendarConfig& config) {
  CalendarColumns out;
  out.features = calendar_features(config);
  out.columns = Matrix(timestamps.size(), out.features.size());
  for (std::size_t t = 0; t < timestamps.size(); ++t) calendar_row(timestamps[t], config, out.columns.row(t));
  return out;
}

FeatureBuilder::FeatureBuilder(FeatureConfig config, std::vector<std::string> covariate_names)
    : config_(std::move(config)), covariate_names_(std::move(covariate_names)) {
  check_lags(config_.lags);
  for (int k : config_.lags) {
    const std::string group = k <= config_.recent_lag_max ? "recent_lags" : "distant_lags";
    features_.push_back({"lag_" + std::to_string(k), FeatureKind::Lag, k, group});
  }
  if (config_.trend) features_.push_back({"trend", FeatureKind::Trend, 0, "trend"});
  for (auto& f : calendar_features(config_.calendar)) features_.push_back(std::move(f));
  for (const auto& name : covariate_names_) {
    features_.push_back({name, FeatureKind::Covariate, 0, name});
  }
}

std::size_t FeatureBuilder::max_lag() const noexcept {
  std::size_t m = 0;
  for (int k : config_.lags) m = std::max(m, static_cast<std::size_t>(k));
  return m;
}

FeatureFrame FeatureBuilder::build(const TimeSeries& series) const {
  validate_series(series);
  const std::size_t n = series.size();
  FeatureFrame frame;
  frame.features = features_;
  frame.columns = Matrix(n, features_.size());
  frame.target = series.values;
  frame.timestamps = series.timestamps;

  const LagColumns lags = build_lags(series, config_.lags);
  frame.valid_from = lags.valid_from;
  const CalendarColumns calendar = build_calendar_features(series.timestamps, config_.calendar);
  const std::vector<double> trend = config_.trend ? build_trend(series) : std::vector<double>{};

  std::vector<std::size_t> covariate_cols;
  for (const auto& name : covariate_names_) {
    const auto it = std::find(series.covariate_names.begin(), series.covariate_names.end(), name);
    if (it == series.covariate_names.end()) throw DataError("series has no covariate '" + name + "'");
    covariate_cols.push_back(static_cast<std::size_t>(it - series.covariate_names.begin()));
  }

  for (std::size_t t = 0; t < n; ++t) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < lags.columns.cols(); ++k) frame.columns(t, j++) = lags.columns(t, k);
    if (config_.trend) frame.columns(t, j++) = trend[t];
    for (std::size_t k = 0; k < calendar.columns.cols(); ++k) frame.columns(t, j++) = calendar.columns(t, k);
    for (std::size_t c : covariate_cols) frame.columns(t, j++) = series.covariates(t, c);
  }
  return frame;
}

void FeatureBuilder::row(std::size_t t, Timestamp ts, std::span<const double> values,
                         std::span<const double> covariates, std::span<double> out) const {
  if (out.size() != features_.size()) throw ShapeError("feature row has the wrong width");
  if (covariates.size() != covariate_names_.size()) throw ShapeError("covariate row has the wrong width");
  std::size_t j = 0;
  for (int k : config_.lags) {
    const auto lag = static_cast<std::size_t>(k);
    if (lag > t || t - lag >= values.size()) {
      throw DataError("insufficient history: lag " + std::to_string(k) + " at index " + std::to_string(t));
    }
    out[j++] = values[t - lag];
  }
  if (config_.trend) out[j++] = static_cast<double>(t);
  const std::size_t n_calendar = features_.size() - j - covariate_names_.size();
  calendar_row(ts, config_.calendar, out.subspan(j, n_calendar));
  j += n_calendar;
  for (double c : covariates) out[j++] = c;
}

// ---------------------------------------------------------------------------
// Windowing

SequenceBatch window_sequences(const FeatureFrame& frame, std::size_t seq_len) {
  if (seq_len == 0) throw ConfigError("sequence length must be positive");
  const std::size_t valid_rows = frame.rows() > frame.valid_from ? frame.rows() - frame.valid_from : 0;
  if (valid_rows < seq_len + 1) {
    throw DataError("insufficient data: " + std::to_string(valid_rows) + " valid rows for sequences of " +
                    std::to_string(seq_len));
  }
  std::vector<std::size_t> starts;
  for (std::size_t s = frame.valid_from; s + seq_len < frame.rows(); ++s) starts.push_back(s);
  return window_sequences(frame, seq_len, starts);
}

SequenceBatch window_sequences(const FeatureFrame& frame, std::size_t seq_len,
                               std::span<const std::size_t> starts) {
  SequenceBatch batch;
  batch.seq_len = seq_len;
  batch.n_features = frame.cols();
  batch.inputs.resize(starts.size() * seq_len * frame.cols());
  batch.targets.reserve(starts.size());
  batch.window_start.assign(starts.begin(), starts.end());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const std::size_t s = starts[w];
    if (s < frame.valid_from || s + seq_len >= frame.rows()) {
      throw DataError("window start " + std::to_string(s) + " outside the valid rows");
    }
    auto dst = batch.window(w);
    for (std::size_t k = 0; k < seq_len; ++k) {
      const auto src = frame.columns.row(s + k);
      std::copy(src.begin(), src.end(), dst.begin() + k * frame.cols());
    }
    batch.targets.push_back(frame.target[s + seq_len]);
  }
  return batch;
}

SequenceBatch select_windows(const SequenceBatch& batch, std::span<const std::size_t> indices) {
  SequenceBatch out;
  out.seq_len = batch.seq_len;
  out.n_features = batch.n_features;
  out.inputs.resize(indices.size() * batch.seq_len * batch.n_features);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = batch.window(indices[i]);
    std::copy(src.begin(), src.end(), out.window(i).begin());
    out.targets.push_back(batch.targets[indices[i]]);
    out.window_start.push_back(batch.window_start[indices[i]]);
  }
  return out;
}

PreparedData prepare_data(const TimeSeries& series, const FeatureBuilder& builder, ScalerKind kind,
                          std::size_t seq_len, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  PreparedData data;
  data.raw = builder.build(series);
  const std::size_t n = series.size();
  data.split_index = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  if (data.split_index <= data.raw.valid_from + seq_len || data.split_index >= n) {
    throw DataError("insufficient data: split at row " + std::to_string(data.split_index) +
                    " leaves no training or no test windows");
  }
  const IndexRange train_rows{data.raw.valid_from, data.split_index};
  data.scalers.features = fit_scaler(data.raw, kind, train_rows);
  data.scalers.target = fit_target_scaler(data.raw, kind, train_rows);
  data.scaled = apply_scalers(data.scalers, data.raw);
  data.windows = window_sequences(data.scaled, seq_len);
  for (std::size_t w = 0; w < data.windows.size(); ++w) {
    (data.windows.target_index(w) < data.split_index ? data.train_windows : data.test_windows).push_back(w);
  }
  return data;
}

}  // namespace tsrnn
