#include "tsrnn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsrnn/errors.hpp"

namespace tsrnn {

double mse_loss(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw DomainError("mse_loss of an empty sequence");
  if (predictions.size() != targets.size()) throw ShapeError("mse_loss length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - targets[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

AdamState make_adam(const std::vector<Matrix>& params, double lr, double beta1, double beta2, double eps) {
  AdamState s;
  s.m = zero_like(params);
  s.v = zero_like(params);
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

void adam_step(AdamState& state, std::vector<Matrix>& params, const std::vector<Matrix>& grads,
               std::span<const std::string> names) {
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam_step: parameter/gradient/state counts differ");
  }
  for (std::size_t p = 0; p < grads.size(); ++p) {
    if (grads[p].rows() != params[p].rows() || grads[p].cols() != params[p].cols()) {
      throw ShapeError("adam_step: gradient shape mismatch for tensor " + std::to_string(p));
    }
    if (!grads[p].all_finite()) {
      const std::string name = p < names.size() ? names[p] : "tensor " + std::to_string(p);
      throw NumericalError("non-finite gradient in " + name + " at Adam step " +
                           std::to_string(state.t + 1));
    }
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto w = params[p].values();
    auto g = grads[p].values();
    auto m = state.m[p].values();
    auto v = state.v[p].values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

double clip_global_norm(std::vector<Matrix>& grads, double max_norm) {
  double ss = 0.0;
  for (const auto& g : grads) {
    for (double v : g.values()) ss += v * v;
  }
  const double norm = std::sqrt(ss);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& g : grads) {
      for (double& v : g.values()) v *= factor;
    }
  }
  return norm;
}

TrainResult train(RnnModel model, const SequenceBatch& batch, std::span<const std::size_t> rows,
                  const TrainConfig& config, Rng& rng) {
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(config.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch.seq_len != model.shape.seq_len || batch.n_features != model.shape.n_features) {
    throw ShapeError("training batch shape does not match the model");
  }
  TrainResult result;
  if (config.epochs == 0) {
    result.model = std::move(model);
    return result;
  }
  if (rows.empty()) throw DataError("training set is empty");

  const std::vector<std::string> names = parameter_names(model.shape);
  AdamState adam = make_adam(model.params, config.lr, config.beta1, config.beta2, config.eps);
  std::vector<Matrix> grads = zero_like(model.params);
  ForwardCache cache;
  const std::size_t nf = model.shape.n_features;
  const double drop = model.shape.dropout;
  std::vector<double> mask(drop > 0.0 ? nf : 0);
  std::vector<std::size_t> order(rows.begin(), rows.end());

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      const auto perm = shuffled_indices(rng, rows.size());
      for (std::size_t i = 0; i < perm.size(); ++i) order[i] = rows[perm[i]];
    }
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const double inv_n = 1.0 / static_cast<double>(end - begin);
      for (auto& g : grads) g.fill(0.0);
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t w = order[i];
        if (!mask.empty()) {
          const double keep = 1.0 - drop;
          for (double& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
        }
        const double out = forward(model, batch.window(w), mask, &cache);
        const double y = batch.targets[w];
        double d_out = 0.0;
        if (config.loss == LossKind::Mse) {
          const double err = out - y;
          epoch_loss += err * err;
          d_out = 2.0 * err * inv_n;
        } else {
          const double s = std::max(out, kVarianceFloor);
          epoch_loss += 0.5 * (std::log(s) + y / s);
          d_out = 0.5 * (1.0 / s - y / (s * s)) * inv_n;
        }
        backward(model, cache, d_out, grads);
      }
      clip_global_norm(grads, config.clip_norm);
      adam_step(adam, model.params, grads, names);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  result.model = std::move(model);
  return result;
}

TrainResult train(RnnModel model, const SequenceBatch& batch, const TrainConfig& config, Rng& rng) {
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train(std::move(model), batch, rows, config, rng);
}

}  // namespace tsrnn
