#include "tsrnn/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "tsrnn/errors.hpp"

namespace tsrnn {

double residual_target(double y, double y_hat, double var_model) {
  const double e = y - y_hat;
  return std::max(e * e - var_model, 0.0);
}

ResidualSet residual_targets(const ValidationPredictions& validation, const SequenceBatch& train_batch) {
  if (validation.windows.empty()) {
    throw DataError("no bootstrap left-out windows: cannot build the residual network");
  }
  ResidualSet set;
  set.window_index = validation.windows;
  set.samples = select_windows(train_batch, validation.windows);
  for (std::size_t i = 0; i < validation.windows.size(); ++i) {
    const BaggedPrediction b = bag(validation.predictions[i]);
    set.y_hat.push_back(b.mean);
    set.var_model.push_back(b.variance);
    set.samples.targets[i] = residual_target(train_batch.targets[validation.windows[i]], b.mean, b.variance);
  }
  return set;
}

ResidualSet residual_targets(const EnsembleModel& ensemble, const SequenceBatch& train_batch,
                             std::size_t workers) {
  return residual_targets(validation_predictions(ensemble, train_batch, workers), train_batch);
}

double variance_loss(std::span<const double> noise_variance, std::span<const double> r2) {
  if (noise_variance.size() != r2.size()) throw ShapeError("variance_loss length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < r2.size(); ++i) {
    if (!(noise_variance[i] > 0.0)) {
      throw NumericalError("variance_loss: non-positive predicted variance at index " + std::to_string(i));
    }
    const double s = std::max(noise_variance[i], kVarianceFloor);
    sum += std::log(s) + r2[i] / s;
  }
  return 0.5 * sum;
}

TrainResult train_residual_net(const SequenceBatch& samples, const ModelShape& shape,
                               const TrainConfig& config, std::uint64_t seed) {
  if (samples.size() == 0) throw DataError("residual network needs at least one sample");
  ModelShape s = shape;
  s.activation = OutputActivation::Exponential;
  Rng init_rng(mix_seed(seed, 0, SeedPurpose::Residual));
  RnnModel model = init_params(init_rng, s);
  double mean_r2 = 0.0;
  for (double r : samples.targets) mean_r2 += r;
  mean_r2 /= static_cast<double>(samples.size());
  model.dense_b() = std::log(std::max(mean_r2, kVarianceFloor));

  TrainConfig c = config;
  c.loss = LossKind::NoiseVariance;
  Rng train_rng(mix_seed(seed, 1, SeedPurpose::Residual));
  return train(std::move(model), samples, c, train_rng);
}

Interval prediction_interval(double y_hat, double var_model, double var_noise, double conf,
                             std::size_t n_run) {
  if (!(var_model >= 0.0) || !(var_noise >= 0.0)) throw DomainError("variances must be non-negative");
  const double half = t_multiplier(conf, n_run) * std::sqrt(var_model + var_noise);
  return {y_hat - half, y_hat + half};
}

}  // namespace tsrnn
