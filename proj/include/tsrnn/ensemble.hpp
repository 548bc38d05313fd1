#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tsrnn/features.hpp"
#include "tsrnn/optimizer.hpp"
#include "tsrnn/recurrent.hpp"

namespace tsrnn {

// Bootstrap over windows: each run draws n_windows window indices with
// replacement; the windows it never drew form its left-out (validation) set.
struct BootstrapPlan {
  std::size_t n_windows = 0;
  std::vector<std::vector<std::size_t>> sampled;
  std::vector<std::vector<std::size_t>> left_out;  // ascending

  std::size_t n_run() const noexcept { return sampled.size(); }
  double unique_fraction(std::size_t run) const;
  // Windows no run left out; their validation quantities are undefined.
  std::vector<std::size_t> never_left_out() const;
};

BootstrapPlan make_plan(std::uint64_t seed, std::size_t n_windows, std::size_t n_run);

void save_plan(const std::filesystem::path& path, const BootstrapPlan& plan);
BootstrapPlan load_plan(const std::filesystem::path& path);

struct EnsembleConfig {
  ModelShape shape;
  TrainConfig train;
  std::size_t workers = 0;  // 0 = hardware concurrency
};

struct EnsembleModel {
  std::vector<RnnModel> members;
  BootstrapPlan plan;
  std::optional<RnnModel> residual_net;
  FrameScalers scalers;
  std::vector<std::vector<double>> loss_traces;  // per member
  std::vector<double> residual_loss_trace;

  std::size_t n_run() const noexcept { return members.size(); }
};

// Member r is initialised from mix_seed(seed, r, Init) and trained on
// batch.window(plan.sampled[r][i]) with a mix_seed(seed, r, Training) stream.
EnsembleModel train_ensemble(const SequenceBatch& batch, const BootstrapPlan& plan,
                             const EnsembleConfig& config, std::uint64_t seed);

struct BaggedPrediction {
  double mean = 0.0;
  double variance = 0.0;  // unbiased across members; 0 with fewer than two
};

// Mean and (n-1)-denominator variance, summed in member order.
BaggedPrediction bag(std::span<const double> member_predictions);
BaggedPrediction bagged_predict(const EnsembleModel& ensemble, std::span<const double> window);

// windows x members, inference mode, scaled units.
Matrix member_predictions(const EnsembleModel& ensemble, const SequenceBatch& batch,
                          std::size_t workers = 0);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Two-sided t multiplier with n_run - 1 degrees of freedom.
double t_multiplier(double conf, std::size_t n_run);
Interval confidence_interval(double y_hat, double var_model, double conf, std::size_t n_run);

// Predictions of every run on the windows it left out.
struct ValidationPredictions {
  std::vector<std::size_t> windows;             // positions in the training batch, ascending
  std::vector<std::vector<std::size_t>> runs;   // runs that left each window out
  std::vector<std::vector<double>> predictions; // aligned with runs, scaled units
};

ValidationPredictions validation_predictions(const EnsembleModel& ensemble,
                                             const SequenceBatch& train_batch,
                                             std::size_t workers = 0);

}  // namespace tsrnn
