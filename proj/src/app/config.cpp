#include "tsrnn/app/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "tsrnn/errors.hpp"

namespace tsrnn::app {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("invalid value '" + value + "' for " + key + ": expected " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    bad_value(key, value, std::is_floating_point_v<T> ? "a number" : "an integer");
  }
  return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  if (!value.empty() && value.front() == '-') bad_value(key, value, "a non-negative integer");
  return parse_number<std::size_t>(key, value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value, "true or false");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

struct Field {
  bool runtime;
  std::function<void(RunConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define TSRNN_COUNT(name, rt)                                                                   \
  {#name, {rt, [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_count(k, v); }, \
           [](const RunConfig& c) { return std::to_string(c.name); }}}
#define TSRNN_REAL(name, rt)                                                                      \
  {#name, {rt, [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_number<double>(k, v); }, \
           [](const RunConfig& c) { return format_double(c.name); }}}
#define TSRNN_FLAG(name)                                                                         \
  {#name, {false, [](RunConfig& c, const std::string& k, const std::string& v) { c.name = parse_bool(k, v); }, \
           [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }}}
#define TSRNN_TEXT(name, rt)                                                                     \
  {#name, {rt, [](RunConfig& c, const std::string&, const std::string& v) { c.name = v; },       \
           [](const RunConfig& c) { return c.name; }}}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"cell", {false, [](RunConfig& c, const std::string& k, const std::string& v) {
                  try {
                    c.cell = parse_cell_kind(v);
                  } catch (const Error&) {
                    bad_value(k, v, "LSTM or GRU");
                  }
                },
                [](const RunConfig& c) { return to_string(c.cell); }}},
      TSRNN_COUNT(units, false),
      TSRNN_COUNT(seq_len, false),
      TSRNN_COUNT(batch_size, false),
      TSRNN_COUNT(epochs, false),
      TSRNN_COUNT(residual_epochs, false),
      TSRNN_REAL(lr, false),
      TSRNN_REAL(dropout, false),
      TSRNN_COUNT(n_boot, false),
      TSRNN_REAL(train_fraction, false),
      TSRNN_FLAG(trend),
      TSRNN_FLAG(hour),
      TSRNN_FLAG(day_of_week),
      TSRNN_FLAG(month),
      TSRNN_FLAG(season),
      TSRNN_FLAG(week_of_year),
      TSRNN_FLAG(afternoon),
      TSRNN_FLAG(working_hour),
      TSRNN_FLAG(working_day),
      TSRNN_FLAG(quarter_start),
      TSRNN_FLAG(month_start),
      TSRNN_TEXT(holidays_file, false),
      TSRNN_TEXT(timestamp_column, false),
      TSRNN_TEXT(value_column, false),
      TSRNN_TEXT(hour_column, false),
      {"seed", {false, [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.seed = parse_number<std::uint64_t>(k, v);
                },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"lags", {false, [](RunConfig& c, const std::string& k, const std::string& v) {
                  c.lags.clear();
                  for (const auto& item : split_list(v)) c.lags.push_back(parse_number<int>(k, item));
                },
                [](const RunConfig& c) {
                  std::vector<std::string> s;
                  for (int l : c.lags) s.push_back(std::to_string(l));
                  return join(s);
                }}},
      {"recent_lag_max", {false, [](RunConfig& c, const std::string& k, const std::string& v) {
                            c.recent_lag_max = parse_number<int>(k, v);
                          },
                          [](const RunConfig& c) { return std::to_string(c.recent_lag_max); }}},
      {"holiday", {false, [](RunConfig& c, const std::string& k, const std::string& v) {
                     if (v == "auto") {
                       c.holiday.reset();
                     } else {
                       c.holiday = parse_bool(k, v);
                     }
                   },
                   [](const RunConfig& c) {
                     return c.holiday ? std::string(*c.holiday ? "true" : "false") : std::string("auto");
                   }}},
      {"scaler", {false, [](RunConfig& c, const std::string& k, const std::string& v) {
                    if (v == "minmax") {
                      c.scaler = ScalerKind::MinMax;
                    } else if (v == "standard") {
                      c.scaler = ScalerKind::Standard;
                    } else {
                      bad_value(k, v, "minmax or standard");
                    }
                  },
                  [](const RunConfig& c) {
                    return std::string(c.scaler == ScalerKind::MinMax ? "minmax" : "standard");
                  }}},
      {"covariates", {false, [](RunConfig& c, const std::string&, const std::string& v) {
                        c.covariates = split_list(v);
                      },
                      [](const RunConfig& c) { return join(c.covariates); }}},
      // Runtime keys.
      TSRNN_REAL(conf, true),
      TSRNN_REAL(cwc_mu, true),
      TSRNN_REAL(cwc_eta, true),
      TSRNN_COUNT(workers, true),
      TSRNN_COUNT(horizon, true),
      TSRNN_COUNT(importance_repeats, true),
      TSRNN_TEXT(data, true),
      TSRNN_TEXT(out, true),
      TSRNN_TEXT(checkpoint, true),
  };
  return table;
}

#undef TSRNN_COUNT
#undef TSRNN_REAL
#undef TSRNN_FLAG
#undef TSRNN_TEXT

}  // namespace

std::filesystem::path RunConfig::checkpoint_dir() const {
  return checkpoint.empty() ? std::filesystem::path(out) / "checkpoint" : std::filesystem::path(checkpoint);
}

FeatureConfig RunConfig::feature_config() const {
  FeatureConfig fc;
  fc.lags = lags;
  fc.recent_lag_max = recent_lag_max;
  fc.trend = trend;
  CalendarConfig& cal = fc.calendar;
  cal.hour = hour;
  cal.day_of_week = day_of_week;
  cal.month = month;
  cal.season = season;
  cal.week_of_year = week_of_year;
  cal.afternoon = afternoon;
  cal.working_hour = working_hour;
  cal.working_day = working_day;
  cal.quarter_start = quarter_start;
  cal.month_start = month_start;
  cal.holiday = holiday.value_or(!holidays_file.empty());
  if (!holidays_file.empty()) cal.holidays = load_holidays(holidays_file);
  if (cal.holiday && holidays_file.empty()) throw ConfigError("holiday = true needs holidays_file");
  return fc;
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig pc;
  pc.features = feature_config();
  pc.scaler = scaler;
  pc.shape.cell = cell;
  pc.shape.units = units;
  pc.shape.seq_len = seq_len;
  pc.shape.dropout = dropout;
  pc.train.batch_size = batch_size;
  pc.train.epochs = epochs;
  pc.train.lr = lr;
  pc.residual_train = pc.train;
  if (residual_epochs > 0) pc.residual_train.epochs = residual_epochs;
  pc.n_boot = n_boot;
  pc.train_fraction = train_fraction;
  pc.seed = seed;
  pc.workers = workers;
  return pc;
}

bool is_runtime_key(const std::string& key) {
  const auto it = fields().find(key);
  return it != fields().end() && it->second.runtime;
}

ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    out[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

void apply_config(RunConfig& config, const ConfigMap& entries) {
  for (const auto& [key, value] : entries) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(config, key, value);
  }
}

void validate(const RunConfig& c) {
  auto positive = [](const char* name, std::size_t v) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive("units", c.units);
  positive("seq_len", c.seq_len);
  positive("batch_size", c.batch_size);
  positive("n_boot", c.n_boot);
  positive("importance_repeats", c.importance_repeats);
  auto open_unit = [](const char* name, double v) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1)");
  };
  open_unit("conf", c.conf);
  open_unit("cwc_mu", c.cwc_mu);
  open_unit("train_fraction", c.train_fraction);
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(c.lr > 0.0)) throw ConfigError("lr must be positive");
  if (!(c.cwc_eta > 0.0)) throw ConfigError("cwc_eta must be positive");
  if (c.lags.empty()) throw ConfigError("at least one lag is required");
  for (int l : c.lags) {
    if (l <= 0) throw ConfigError("lags must be positive");
  }
}

ConfigMap to_map(const RunConfig& config, bool include_runtime) {
  ConfigMap out;
  for (const auto& [key, field] : fields()) {
    if (!include_runtime && field.runtime) continue;
    out[key] = field.get(config);
  }
  return out;
}

}  // namespace tsrnn::app
