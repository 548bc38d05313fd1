#include "tsrnn/pipeline.hpp"

#include <cmath>
#include <limits>

#include "tsrnn/errors.hpp"
#include "tsrnn/parallel.hpp"

namespace tsrnn {

TrainedPipeline fit_pipeline(const TimeSeries& series, const FeatureBuilder& builder,
                             const PipelineConfig& config) {
  TrainedPipeline out;
  out.data = prepare_data(series, builder, config.scaler, config.shape.seq_len, config.train_fraction);
  out.train_batch = select_windows(out.data.windows, out.data.train_windows);
  out.test_batch = select_windows(out.data.windows, out.data.test_windows);

  EnsembleConfig ec;
  ec.shape = config.shape;
  ec.shape.n_features = builder.size();
  ec.shape.activation = OutputActivation::Linear;
  ec.train = config.train;
  ec.train.loss = LossKind::Mse;
  ec.workers = config.workers;

  const BootstrapPlan plan = make_plan(config.seed, out.train_batch.size(), config.n_boot);
  out.ensemble = train_ensemble(out.train_batch, plan, ec, config.seed);
  out.ensemble.scalers = out.data.scalers;

  if (out.ensemble.n_run() >= 2) {
    out.residuals = residual_targets(out.ensemble, out.train_batch, config.workers);
    TrainResult res = train_residual_net(out.residuals->samples, ec.shape, config.residual_train, config.seed);
    out.ensemble.residual_net = std::move(res.model);
    out.ensemble.residual_loss_trace = std::move(res.loss_trace);
  }
  return out;
}

PreparedData prepare_with_scalers(const TimeSeries& series, const FeatureBuilder& builder,
                                  const FrameScalers& scalers, std::size_t seq_len,
                                  double train_fraction) {
  PreparedData data = prepare_data(series, builder, scalers.features.kind, seq_len, train_fraction);
  if (scalers.features.names != data.scalers.features.names) {
    throw DataError("checkpoint features do not match the configured feature set");
  }
  data.scalers = scalers;
  data.scaled = apply_scalers(scalers, data.raw);
  data.windows = window_sequences(data.scaled, seq_len);
  return data;
}

ForecastResult validation_forecast(const EnsembleModel& ensemble, const SequenceBatch& train_batch,
                                   std::span<const Timestamp> timestamps, double conf,
                                   std::size_t workers) {
  const ValidationPredictions vp = validation_predictions(ensemble, train_batch, workers);
  const SequenceBatch windows = select_windows(train_batch, vp.windows);
  std::vector<double> noise(windows.size(), 0.0);
  if (ensemble.residual_net) noise = predict(*ensemble.residual_net, windows);

  const ScalerState& ts = ensemble.scalers.target;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ForecastResult result;
  result.intervals = ensemble.n_run() >= 2;
  // Members that did not leave a window out have no validation prediction.
  result.members = Matrix(windows.size(), ensemble.n_run(), nan);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    ForecastStep step = assemble_step(vp.predictions[i], noise[i], ts, conf);
    step.timestamp = timestamps[windows.target_index(i)];
    step.y_true = ts.unscale(0, windows.targets[i]);
    for (std::size_t k = 0; k < vp.runs[i].size(); ++k) {
      result.members(i, vp.runs[i][k]) = ts.unscale(0, vp.predictions[i][k]);
    }
    result.steps.push_back(step);
  }
  return result;
}

}  // namespace tsrnn
