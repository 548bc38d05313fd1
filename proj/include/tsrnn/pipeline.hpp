#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "tsrnn/ensemble.hpp"
#include "tsrnn/features.hpp"
#include "tsrnn/forecaster.hpp"
#include "tsrnn/intervals.hpp"

namespace tsrnn {

struct PipelineConfig {
  FeatureConfig features;
  ScalerKind scaler = ScalerKind::MinMax;
  ModelShape shape;           // n_features is filled in from the builder
  TrainConfig train;          // ensemble members
  TrainConfig residual_train; // noise-variance network
  std::size_t n_boot = 50;
  double train_fraction = 0.7;
  std::uint64_t seed = 42;
  std::size_t workers = 0;
};

// Everything derived from one training run.
struct TrainedPipeline {
  PreparedData data;
  SequenceBatch train_batch;
  SequenceBatch test_batch;
  EnsembleModel ensemble;
  std::optional<ResidualSet> residuals;  // absent with fewer than two runs
};

// Splits, scales on the training rows, draws the bootstrap plan over the
// training windows, trains the members and then the residual network.
TrainedPipeline fit_pipeline(const TimeSeries& series, const FeatureBuilder& builder,
                             const PipelineConfig& config);

// Data prepared for an already trained ensemble, re-using its scalers so
// that the frames match the ones seen during training.
PreparedData prepare_with_scalers(const TimeSeries& series, const FeatureBuilder& builder,
                                  const FrameScalers& scalers, std::size_t seq_len,
                                  double train_fraction);

// Bagged one-step forecast for each training window that some run left out;
// the interval uses only those runs.
ForecastResult validation_forecast(const EnsembleModel& ensemble, const SequenceBatch& train_batch,
                                   std::span<const Timestamp> timestamps, double conf,
                                   std::size_t workers = 0);

}  // namespace tsrnn
