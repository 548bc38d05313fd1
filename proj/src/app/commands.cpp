#include "tsrnn/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "tsrnn/app/csv.hpp"
#include "tsrnn/errors.hpp"
#include "tsrnn/importance.hpp"
#include "tsrnn/metrics.hpp"

namespace tsrnn::app {

namespace fs = std::filesystem;
using nlohmann::json;

ForecastMode parse_forecast_mode(const std::string& text) {
  std::string m = text;
  std::transform(m.begin(), m.end(), m.begin(), [](unsigned char c) { return std::tolower(c); });
  if (m == "one") return ForecastMode::One;
  if (m == "multi") return ForecastMode::Multi;
  if (m == "both") return ForecastMode::Both;
  throw ConfigError("invalid mode '" + text + "': expected ONE, MULTI or BOTH");
}

namespace {

constexpr int kManifestVersion = 1;

std::string member_file(std::size_t r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "member_%03zu.bin", r);
  return buf;
}

std::string member_column(std::size_t r) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "m%03zu", r);
  return buf;
}

RunConfig config_from(const ConfigMap& user) {
  RunConfig config;
  apply_config(config, user);
  validate(config);
  return config;
}

CsvOptions csv_options(const RunConfig& config) {
  CsvOptions o;
  o.timestamp_column = config.timestamp_column;
  o.value_column = config.value_column;
  o.hour_column = config.hour_column;
  o.covariates = config.covariates;
  return o;
}

TimeSeries load_series(const RunConfig& config) {
  if (config.data.empty()) throw ConfigError("no data file given (--data or data = ...)");
  return load_csv(config.data, csv_options(config));
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const RunConfig& config, const TrainedPipeline& fit) {
  fs::create_directories(dir);
  const EnsembleModel& e = fit.ensemble;
  json manifest;
  manifest["version"] = kManifestVersion;
  manifest["config"] = to_map(config, false);
  manifest["data"] = config.data;
  manifest["features"] = fit.data.raw.names();
  manifest["split_index"] = fit.data.split_index;
  manifest["n_train_windows"] = fit.data.train_windows.size();
  manifest["n_test_windows"] = fit.data.test_windows.size();
  manifest["n_run"] = e.n_run();
  manifest["residual_net"] = e.residual_net.has_value();
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
  save_plan(dir / "plan.txt", e.plan);
  for (std::size_t r = 0; r < e.n_run(); ++r) save_model(dir / member_file(r), e.members[r], e.scalers);
  if (e.residual_net) save_model(dir / "residual.bin", *e.residual_net, e.scalers);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("no checkpoint at " + dir.string() + " (run train first)");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw DataError("corrupt checkpoint manifest: " + std::string(e.what()));
  }
  if (manifest.value("version", 0) != kManifestVersion) throw DataError("unsupported checkpoint version");
  Checkpoint c;
  try {
    c.model_config = manifest.at("config").get<ConfigMap>();
    c.data = manifest.at("data").get<std::string>();
    c.features = manifest.at("features").get<std::vector<std::string>>();
    c.split_index = manifest.at("split_index").get<std::size_t>();
    c.n_train_windows = manifest.at("n_train_windows").get<std::size_t>();
    c.n_test_windows = manifest.at("n_test_windows").get<std::size_t>();
    const auto n_run = manifest.at("n_run").get<std::size_t>();
    c.ensemble.plan = load_plan(dir / "plan.txt");
    if (c.ensemble.plan.n_run() != n_run) throw DataError("checkpoint plan does not match its manifest");
    for (std::size_t r = 0; r < n_run; ++r) {
      c.ensemble.members.push_back(load_model(dir / member_file(r), &c.ensemble.scalers));
    }
    if (manifest.at("residual_net").get<bool>()) c.ensemble.residual_net = load_model(dir / "residual.bin");
  } catch (const json::exception& e) {
    throw DataError("corrupt checkpoint manifest: " + std::string(e.what()));
  }
  return c;
}

RunConfig resolve_against_checkpoint(const Checkpoint& checkpoint, const ConfigMap& user) {
  RunConfig base;
  apply_config(base, checkpoint.model_config);
  base.data = checkpoint.data;
  RunConfig merged = base;
  apply_config(merged, user);
  const ConfigMap before = to_map(base, false);
  const ConfigMap after = to_map(merged, false);
  for (const auto& [key, value] : after) {
    if (before.at(key) != value) {
      throw ConfigError("'" + key + "' differs from the checkpoint (" + before.at(key) + " vs " + value +
                        "); retrain to change it");
    }
  }
  validate(merged);
  return merged;
}

void write_forecast_csv(const fs::path& path, const ForecastResult& result) {
  std::ofstream out = open_out(path);
  out << "timestamp,y_true,y_hat,ci_lo,ci_hi,pi_lo,pi_hi\n";
  for (const auto& s : result.steps) {
    out << format_timestamp(s.timestamp) << ',' << (s.y_true ? format_value(*s.y_true) : std::string()) << ','
        << format_value(s.y_hat) << ',' << format_value(s.ci_lo) << ',' << format_value(s.ci_hi) << ','
        << format_value(s.pi_lo) << ',' << format_value(s.pi_hi) << '\n';
  }
}

void write_members_csv(const fs::path& path, const ForecastResult& result) {
  std::ofstream out = open_out(path);
  out << "timestamp";
  for (std::size_t r = 0; r < result.members.cols(); ++r) out << ',' << member_column(r);
  out << '\n';
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    out << format_timestamp(result.steps[i].timestamp);
    for (double v : result.members.row(i)) out << ',' << format_value(v);
    out << '\n';
  }
}

void cmd_train(const ConfigMap& user, std::ostream& log) {
  const RunConfig config = config_from(user);
  const TimeSeries series = load_series(config);
  const FeatureBuilder builder(config.feature_config(), config.covariates);
  if (config.n_boot == 1) {
    log << "warning: n_boot = 1 gives no variance estimate; confidence and prediction intervals are disabled\n";
  }
  log << "training " << config.n_boot << " " << to_string(config.cell) << " members on " << series.size()
      << " rows, " << builder.size() << " features\n";
  const TrainedPipeline fit = fit_pipeline(series, builder, config.pipeline_config());

  fs::create_directories(config.out);
  save_checkpoint(config.checkpoint_dir(), config, fit);

  std::ofstream train_log = open_out(fs::path(config.out) / "train.log");
  const EnsembleModel& e = fit.ensemble;
  char buf[160];
  std::snprintf(buf, sizeof buf, "rows %zu split %zu train_windows %zu test_windows %zu features %zu\n",
                series.size(), fit.data.split_index, fit.train_batch.size(), fit.test_batch.size(),
                builder.size());
  train_log << buf;
  double left_out_sum = 0.0;
  for (std::size_t r = 0; r < e.n_run(); ++r) {
    const double left_out = 1.0 - e.plan.unique_fraction(r);
    left_out_sum += left_out;
    const double loss = e.loss_traces[r].empty() ? std::nan("") : e.loss_traces[r].back();
    std::snprintf(buf, sizeof buf, "member %zu final_loss %.6g left_out_fraction %.4f\n", r, loss, left_out);
    train_log << buf;
  }
  std::snprintf(buf, sizeof buf, "mean_left_out_fraction %.4f\n", left_out_sum / static_cast<double>(e.n_run()));
  train_log << buf;
  const auto never = e.plan.never_left_out();
  if (!never.empty()) {
    std::snprintf(buf, sizeof buf, "never_left_out %zu\n", never.size());
    train_log << buf;
    log << "warning: " << never.size()
        << " training windows were drawn by every run and have no validation prediction\n";
  }
  if (e.residual_net) {
    const double loss = e.residual_loss_trace.empty() ? std::nan("") : e.residual_loss_trace.back();
    std::snprintf(buf, sizeof buf, "residual_net samples %zu final_loss %.6g\n",
                  fit.residuals->samples.size(), loss);
    train_log << buf;
  }
  log << "checkpoint written to " << config.checkpoint_dir().string() << '\n';
}

namespace {

struct Loaded {
  RunConfig config;
  Checkpoint checkpoint;
  TimeSeries series;
  PreparedData data;
  SequenceBatch train_batch;
  SequenceBatch test_batch;
};

Loaded load_for_inference(const ConfigMap& user) {
  const RunConfig located = config_from(user);
  Loaded l;
  l.checkpoint = load_checkpoint(located.checkpoint_dir());
  l.config = resolve_against_checkpoint(l.checkpoint, user);
  l.series = load_series(l.config);
  const FeatureBuilder builder(l.config.feature_config(), l.config.covariates);
  l.data = prepare_with_scalers(l.series, builder, l.checkpoint.ensemble.scalers, l.config.seq_len,
                                l.config.train_fraction);
  if (l.data.split_index != l.checkpoint.split_index ||
      l.data.train_windows.size() != l.checkpoint.n_train_windows) {
    throw DataError("data does not match the checkpoint (different split or training windows)");
  }
  l.train_batch = select_windows(l.data.windows, l.data.train_windows);
  l.test_batch = select_windows(l.data.windows, l.data.test_windows);
  return l;
}

}  // namespace

void cmd_forecast(const ConfigMap& user, ForecastMode mode, std::ostream& log) {
  const Loaded l = load_for_inference(user);
  const EnsembleModel& e = l.checkpoint.ensemble;
  const fs::path out(l.config.out);
  fs::create_directories(out);
  if (!e.residual_net || e.n_run() < 2) log << "warning: fewer than two runs, interval columns are empty\n";

  if (mode != ForecastMode::Multi) {
    const ForecastResult one = one_step_forecast(e, l.test_batch, l.data.raw.timestamps, l.config.conf,
                                                 l.config.workers);
    write_forecast_csv(out / "forecast_one.csv", one);
    write_members_csv(out / "members_one.csv", one);
    const ForecastResult val = validation_forecast(e, l.train_batch, l.data.raw.timestamps, l.config.conf,
                                                   l.config.workers);
    write_forecast_csv(out / "validation.csv", val);
    write_members_csv(out / "members_validation.csv", val);
    log << "one-step: " << one.steps.size() << " test rows, " << val.steps.size() << " validation rows\n";
  }
  if (mode != ForecastMode::One) {
    const FeatureBuilder builder(l.config.feature_config(), l.config.covariates);
    const std::size_t split = l.data.split_index;
    const std::size_t horizon = l.config.horizon > 0 ? l.config.horizon : l.series.size() - split;
    const TimeSeries history = l.series.head(split);
    ForecastResult multi = multi_step_forecast(e, builder, history, horizon, l.config.conf);
    multi.members = member_multi_step(e, builder, history, horizon, l.config.workers);
    for (std::size_t k = 0; k < multi.steps.size() && split + k < l.series.size(); ++k) {
      multi.steps[k].y_true = l.series.values[split + k];
    }
    write_forecast_csv(out / "forecast_multi.csv", multi);
    write_members_csv(out / "members_multi.csv", multi);
    log << "multi-step: " << horizon << " steps from " << format_timestamp(l.series.timestamps[split]) << '\n';
  }
}

namespace {

struct ForecastTable {
  std::vector<Timestamp> timestamps;
  std::vector<double> y_true, y_hat, ci_lo, ci_hi, pi_lo, pi_hi;
};

Timestamp parse_ts_field(const std::string& field, const std::string& where) {
  const auto ts = parse_timestamp(field);
  if (!ts) throw DataError(where + ": cannot parse timestamp '" + field + "'");
  return *ts;
}

ForecastTable read_forecast(const fs::path& path) {
  const CsvTable t = read_csv_table(path);
  const std::vector<std::string> names = {"timestamp", "y_true", "y_hat", "ci_lo", "ci_hi", "pi_lo", "pi_hi"};
  std::vector<std::size_t> col;
  for (const auto& n : names) col.push_back(t.column(n));
  ForecastTable f;
  std::vector<double>* series[] = {&f.y_true, &f.y_hat, &f.ci_lo, &f.ci_hi, &f.pi_lo, &f.pi_hi};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 2);
    f.timestamps.push_back(parse_ts_field(t.rows[i][col[0]], where));
    for (std::size_t k = 0; k < 6; ++k) series[k]->push_back(parse_value(t.rows[i][col[k + 1]], where));
  }
  return f;
}

struct MemberTable {
  std::vector<Timestamp> timestamps;
  Matrix values;  // rows x members, NaN where absent
};

MemberTable read_members(const fs::path& path) {
  const CsvTable t = read_csv_table(path);
  if (t.header.empty() || t.header[0] != "timestamp") throw DataError(path.string() + ": bad header");
  MemberTable m;
  m.values = Matrix(t.rows.size(), t.header.size() - 1);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 2);
    m.timestamps.push_back(parse_ts_field(t.rows[i][0], where));
    for (std::size_t r = 1; r < t.header.size(); ++r) m.values(i, r - 1) = parse_value(t.rows[i][r], where);
  }
  return m;
}

// Maps timestamps to the true previous value of the series.
class History {
 public:
  explicit History(const TimeSeries& s) : series_(s) {
    for (std::size_t i = 0; i < s.size(); ++i) index_[s.timestamps[i]] = i;
  }
  std::optional<double> previous(Timestamp ts) const {
    const auto it = index_.find(ts);
    if (it == index_.end() || it->second == 0) return std::nullopt;
    return series_.values[it->second - 1];
  }

 private:
  const TimeSeries& series_;
  std::map<Timestamp, std::size_t> index_;
};

struct Pairs {
  std::vector<double> prev, y, y_hat;
};

// Rows with ground truth, a prediction and (when `need_prev`) a known
// previous value.
Pairs collect(std::span<const Timestamp> ts, std::span<const double> y, std::span<const double> y_hat,
              const History& history, bool need_prev) {
  Pairs p;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(y_hat[i])) continue;
    double prev = std::nan("");
    if (need_prev) {
      const auto pv = history.previous(ts[i]);
      if (!pv) continue;
      prev = *pv;
    }
    p.prev.push_back(prev);
    p.y.push_back(y[i]);
    p.y_hat.push_back(y_hat[i]);
  }
  return p;
}

struct SetMetrics {
  json regression_bagged;
  json regression_individual;
  json direction_bagged;
  json direction_individual;
  json intervals;
};

SetMetrics evaluate_file(const fs::path& forecast_path, const fs::path& members_path, const History& history,
                         const RunConfig& config) {
  const ForecastTable f = read_forecast(forecast_path);
  SetMetrics out;
  const Pairs bagged = collect(f.timestamps, f.y_true, f.y_hat, history, false);
  if (bagged.y.empty()) throw DataError(forecast_path.string() + ": missing ground truth");
  out.regression_bagged = to_json(regression_metrics(bagged.y, bagged.y_hat));
  const Pairs dir = collect(f.timestamps, f.y_true, f.y_hat, history, true);
  if (!dir.y.empty()) {
    const DirectionLabels labels = direction_labels(dir.prev, dir.y, dir.y_hat);
    out.direction_bagged = to_json(classification_metrics(labels.actual, labels.predicted));
  }

  std::vector<double> y, lo, hi;
  for (std::size_t i = 0; i < f.timestamps.size(); ++i) {
    if (std::isfinite(f.y_true[i]) && std::isfinite(f.pi_lo[i]) && std::isfinite(f.pi_hi[i])) {
      y.push_back(f.y_true[i]);
      lo.push_back(f.pi_lo[i]);
      hi.push_back(f.pi_hi[i]);
    }
  }
  if (!y.empty()) {
    // NMPIW is normalised by the target range of the set being scored.
    const double range = target_range(y);
    if (range > 0.0) out.intervals = to_json(interval_metrics(y, lo, hi, config.cwc_mu, config.cwc_eta, range));
  }

  if (fs::exists(members_path)) {
    const MemberTable m = read_members(members_path);
    if (m.timestamps != f.timestamps) throw DataError(members_path.string() + ": rows do not match forecasts");
    std::vector<RegressionReport> reg;
    std::vector<DirectionReport> cls;
    std::vector<double> member(m.values.rows());
    for (std::size_t r = 0; r < m.values.cols(); ++r) {
      for (std::size_t i = 0; i < member.size(); ++i) member[i] = m.values(i, r);
      const Pairs p = collect(f.timestamps, f.y_true, member, history, false);
      if (!p.y.empty()) reg.push_back(regression_metrics(p.y, p.y_hat));
      const Pairs d = collect(f.timestamps, f.y_true, member, history, true);
      if (!d.y.empty()) {
        const DirectionLabels labels = direction_labels(d.prev, d.y, d.y_hat);
        cls.push_back(classification_metrics(labels.actual, labels.predicted));
      }
    }
    if (!reg.empty()) out.regression_individual = to_json(mean_report(reg));
    if (!cls.empty()) out.direction_individual = to_json(mean_report(cls));
  }
  return out;
}

}  // namespace

json cmd_evaluate(const ConfigMap& user, std::ostream& log) {
  RunConfig config = config_from(user);
  if (config.data.empty()) {
    const fs::path manifest = config.checkpoint_dir() / "manifest.json";
    if (fs::exists(manifest)) config = resolve_against_checkpoint(load_checkpoint(config.checkpoint_dir()), user);
  }
  const TimeSeries series = load_series(config);
  const History history(series);
  const fs::path out(config.out);
  if (!fs::exists(out / "forecast_one.csv") && !fs::exists(out / "forecast_multi.csv")) {
    throw DataError("no forecasts in " + out.string() + " (run forecast first)");
  }

  json regression = json::object();
  json classification = json::object();
  json intervals = json::object();
  auto add = [&](const std::string& set, const std::string& horizon, const SetMetrics& m, bool direction) {
    regression[set + "-b-" + horizon] = m.regression_bagged;
    if (!m.regression_individual.is_null()) regression[set + "-i-" + horizon] = m.regression_individual;
    if (direction) {
      if (!m.direction_bagged.is_null()) classification[set + "-b-" + horizon] = m.direction_bagged;
      if (!m.direction_individual.is_null()) classification[set + "-i-" + horizon] = m.direction_individual;
    }
    if (!m.intervals.is_null()) intervals[set + "-" + horizon] = m.intervals;
  };
  if (fs::exists(out / "validation.csv")) {
    add("v", "o", evaluate_file(out / "validation.csv", out / "members_validation.csv", history, config),
        false);
  }
  if (fs::exists(out / "forecast_one.csv")) {
    add("t", "o", evaluate_file(out / "forecast_one.csv", out / "members_one.csv", history, config), true);
  }
  if (fs::exists(out / "forecast_multi.csv")) {
    add("t", "m", evaluate_file(out / "forecast_multi.csv", out / "members_multi.csv", history, config),
        true);
  }
  json metrics;
  metrics["regression"] = regression;
  metrics["classification"] = classification;
  metrics["intervals"] = intervals;
  metrics["settings"] = {{"conf", config.conf}, {"cwc_mu", config.cwc_mu}, {"cwc_eta", config.cwc_eta}};
  open_out(out / "metrics.json") << metrics.dump(2) << '\n';
  log << "metrics written to " << (out / "metrics.json").string() << '\n';
  return metrics;
}

void cmd_importance(const ConfigMap& user, std::ostream& log) {
  const Loaded l = load_for_inference(user);
  const fs::path out(l.config.out);
  fs::create_directories(out);
  ImportanceInputs inputs{l.checkpoint.ensemble, l.data.scaled, l.train_batch.window_start,
                          l.test_batch.window_start};
  log << "permutation importance over " << l.data.scaled.cols() << " features, " << l.config.importance_repeats
      << " repeats\n";
  const RawImportance raw = permutation_importance(inputs, l.config.importance_repeats, l.config.seed,
                                                   l.config.workers);
  const ImportanceReport report = group_and_summarize(raw, groups_from_features(l.data.scaled.features));
  write_importance_csv(out / "importance_detailed.csv", report.detailed, "feature");
  write_importance_csv(out / "importance_summary.csv", report.summary, "group");
  open_out(out / "importance.json") << to_json(report).dump(2) << '\n';
  log << "importance written to " << out.string() << '\n';
}

}  // namespace tsrnn::app
