#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tsrnn/ensemble.hpp"

namespace tsrnn {

// max((y - y_hat)^2 - var_model, 0)
double residual_target(double y, double y_hat, double var_model);

// Training set for the noise-variance network: every window left out by at
// least one run, with y_hat and var_model taken over those runs only.
struct ResidualSet {
  SequenceBatch samples;                  // inputs = windows, targets = r^2
  std::vector<std::size_t> window_index;  // positions in the training batch
  std::vector<double> y_hat;
  std::vector<double> var_model;
};

ResidualSet residual_targets(const ValidationPredictions& validation, const SequenceBatch& train_batch);
ResidualSet residual_targets(const EnsembleModel& ensemble, const SequenceBatch& train_batch,
                             std::size_t workers = 0);

// 1/2 sum_i (ln s_i + r_i^2 / s_i); throws on a non-positive s_i.
double variance_loss(std::span<const double> noise_variance, std::span<const double> r2);

// Same cell, units, sequence length and dropout as `shape`, exponential
// output, trained on the noise-variance loss. The output bias starts at
// ln(mean r^2).
TrainResult train_residual_net(const SequenceBatch& samples, const ModelShape& shape,
                               const TrainConfig& config, std::uint64_t seed);

struct VarianceEstimate {
  double model = 0.0;
  double noise = 0.0;
  double total() const { return model + noise; }
};

Interval prediction_interval(double y_hat, double var_model, double var_noise, double conf,
                             std::size_t n_run);

}  // namespace tsrnn
