#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsrnn/features.hpp"
#include "tsrnn/pipeline.hpp"
#include "tsrnn/recurrent.hpp"

namespace tsrnn::app {

using ConfigMap = std::map<std::string, std::string>;

struct RunConfig {
  CellKind cell = CellKind::Lstm;
  std::size_t units = 32;
  std::size_t seq_len = 16;
  std::size_t batch_size = 128;
  std::size_t epochs = 128;
  std::size_t residual_epochs = 0;  // 0: same as epochs
  double lr = 0.001;
  double dropout = 0.5;
  std::size_t n_boot = 50;
  double conf = 0.9;
  double cwc_mu = 0.9;
  double cwc_eta = 50.0;
  double train_fraction = 0.7;

  std::vector<int> lags{1, 2, 3, 24, 48, 168};
  int recent_lag_max = 3;
  bool trend = true;
  bool hour = true;
  bool day_of_week = true;
  bool month = true;
  bool season = true;
  bool week_of_year = true;
  bool afternoon = true;
  bool working_hour = true;
  std::optional<bool> holiday;  // unset: on iff a holidays file is given
  bool working_day = true;
  bool quarter_start = true;
  bool month_start = true;
  std::string holidays_file;
  ScalerKind scaler = ScalerKind::MinMax;

  std::uint64_t seed = 42;
  std::size_t workers = 0;
  std::size_t horizon = 0;  // 0: the whole test span
  std::size_t importance_repeats = 5;

  std::string timestamp_column = "timestamp";
  std::string value_column = "value";
  std::string hour_column;  // optional: timestamp = date column + this many hours
  std::vector<std::string> covariates;

  std::string data;
  std::string out = "out";
  std::string checkpoint;  // default: <out>/checkpoint

  std::filesystem::path checkpoint_dir() const;
  FeatureConfig feature_config() const;
  PipelineConfig pipeline_config() const;
};

// Keys that only affect where and how fast a command runs. They are not
// stored in checkpoints and may differ between train and later commands.
bool is_runtime_key(const std::string& key);

// Flat "key = value" lines; '#' starts a comment.
ConfigMap parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigMap load_config_file(const std::filesystem::path& path);

// Applies entries over `base`; unknown keys and bad values raise ConfigError.
void apply_config(RunConfig& config, const ConfigMap& entries);
void validate(const RunConfig& config);

// Canonical key/value form; with include_runtime false only model keys.
ConfigMap to_map(const RunConfig& config, bool include_runtime = true);

}  // namespace tsrnn::app
