#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tsrnn/ensemble.hpp"
#include "tsrnn/features.hpp"

namespace tsrnn {

// All quantities on the original value scale.
struct ForecastStep {
  Timestamp timestamp{};
  std::optional<double> y_true;
  double y_hat = 0.0;
  double var_model = 0.0;
  double var_noise = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double pi_lo = 0.0;
  double pi_hi = 0.0;
};

struct ForecastResult {
  std::vector<ForecastStep> steps;
  Matrix members;          // steps x members, original scale
  bool intervals = false;  // false with fewer than two runs; bounds are NaN then
};

// Combines scaled member outputs and a scaled noise variance into a step.
ForecastStep assemble_step(std::span<const double> scaled_member_preds, double scaled_var_noise,
                           const ScalerState& target_scaler, double conf);

// One bagged forecast per window. `timestamps` is indexed by time row (the
// frame the windows were cut from); y_true comes from the window targets.
ForecastResult one_step_forecast(const EnsembleModel& ensemble, const SequenceBatch& windows,
                                 std::span<const Timestamp> timestamps, double conf,
                                 std::size_t workers = 0);

// Recursive forecast of `horizon` steps after the last observation of
// `history`. Lag features that reach past the history are filled with the
// bagged predictions; calendar and trend features come from the future
// timestamps. Only history is read, so results never see future targets.
ForecastResult multi_step_forecast(const EnsembleModel& ensemble, const FeatureBuilder& builder,
                                   const TimeSeries& history, std::size_t horizon, double conf);

// Per-member recursive trajectories (each member feeds back its own
// predictions): horizon x members, original scale.
Matrix member_multi_step(const EnsembleModel& ensemble, const FeatureBuilder& builder,
                         const TimeSeries& history, std::size_t horizon, std::size_t workers = 0);

}  // namespace tsrnn
