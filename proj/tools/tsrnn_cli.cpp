#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsrnn/app/commands.hpp"
#include "tsrnn/app/config.hpp"
#include "tsrnn/errors.hpp"

using namespace tsrnn;

namespace {

struct Flags {
  std::string config;
  std::string data;
  std::string out;
  std::string seed;
  std::string cell;
  std::string n_boot;
  std::string conf;
  std::string workers;
  std::string checkpoint;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--data", f.data, "input CSV");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--cell", f.cell, "LSTM or GRU");
  cmd->add_option("--n-boot", f.n_boot, "number of bootstrap runs");
  cmd->add_option("--conf", f.conf, "interval confidence level");
  cmd->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint directory (default <out>/checkpoint)");
  cmd->add_option("--set", f.sets, "extra key=value override, repeatable");
}

app::ConfigMap merged_config(const Flags& f) {
  app::ConfigMap map;
  if (!f.config.empty()) map = app::load_config_file(f.config);
  for (const auto& kv : f.sets) {
    const auto entries = app::parse_config_text(kv, "--set");
    if (entries.size() != 1) throw ConfigError("--set expects key=value, got '" + kv + "'");
    for (const auto& [k, v] : entries) map[k] = v;
  }
  const std::pair<const char*, const std::string*> flags[] = {
      {"data", &f.data},       {"out", &f.out},         {"seed", &f.seed},
      {"cell", &f.cell},       {"n_boot", &f.n_boot},   {"conf", &f.conf},
      {"workers", &f.workers}, {"checkpoint", &f.checkpoint}};
  for (const auto& [key, value] : flags) {
    if (!value->empty()) map[key] = *value;
  }
  return map;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Bootstrap RNN ensembles for time series forecasting with prediction intervals"};
  cli.require_subcommand(1);
  Flags flags;
  std::string mode = "both";

  CLI::App* train = cli.add_subcommand("train", "train the ensemble and residual network");
  CLI::App* forecast = cli.add_subcommand("forecast", "write one-step and/or multi-step forecasts");
  CLI::App* evaluate = cli.add_subcommand("evaluate", "compute the metric grid from written forecasts");
  CLI::App* importance = cli.add_subcommand("importance", "permutation feature importance");
  for (CLI::App* cmd : {train, forecast, evaluate, importance}) add_common(cmd, flags);
  forecast->add_option("--mode", mode, "ONE, MULTI or BOTH");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const app::ConfigMap config = merged_config(flags);
    if (train->parsed()) {
      app::cmd_train(config, std::cerr);
    } else if (forecast->parsed()) {
      app::cmd_forecast(config, app::parse_forecast_mode(mode), std::cerr);
    } else if (evaluate->parsed()) {
      app::cmd_evaluate(config, std::cerr);
    } else if (importance->parsed()) {
      app::cmd_importance(config, std::cerr);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
