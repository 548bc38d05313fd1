#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tsrnn/app/config.hpp"
#include "tsrnn/ensemble.hpp"
#include "tsrnn/forecaster.hpp"
#include "tsrnn/pipeline.hpp"

namespace tsrnn::app {

enum class ForecastMode { One, Multi, Both };
ForecastMode parse_forecast_mode(const std::string& text);

struct Checkpoint {
  ConfigMap model_config;  // non-runtime keys only
  std::string data;
  std::vector<std::string> features;
  std::size_t split_index = 0;
  std::size_t n_train_windows = 0;
  std::size_t n_test_windows = 0;
  EnsembleModel ensemble;
};

void save_checkpoint(const std::filesystem::path& dir, const RunConfig& config, const TrainedPipeline& fit);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// The configuration a later command runs with: defaults, then the
// checkpoint's model keys, then `user`. Changing a model key is a ConfigError.
RunConfig resolve_against_checkpoint(const Checkpoint& checkpoint, const ConfigMap& user);

// Forecast CSV: timestamp,y_true,y_hat,ci_lo,ci_hi,pi_lo,pi_hi.
void write_forecast_csv(const std::filesystem::path& path, const ForecastResult& result);
// Member CSV: timestamp,m000,m001,...; empty fields where a member has no value.
void write_members_csv(const std::filesystem::path& path, const ForecastResult& result);

// Each command reads `user` (config file merged with flags) and writes into
// config.out. Progress goes to `log`.
void cmd_train(const ConfigMap& user, std::ostream& log);
void cmd_forecast(const ConfigMap& user, ForecastMode mode, std::ostream& log);
nlohmann::json cmd_evaluate(const ConfigMap& user, std::ostream& log);
void cmd_importance(const ConfigMap& user, std::ostream& log);

}  // namespace tsrnn::app
