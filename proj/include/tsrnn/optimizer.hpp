#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsrnn/features.hpp"
#include "tsrnn/numeric.hpp"
#include "tsrnn/recurrent.hpp"

namespace tsrnn {

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::size_t t = 0;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(const std::vector<Matrix>& params, double lr, double beta1 = 0.9,
                    double beta2 = 0.999, double eps = 1e-8);

// Bias-corrected Adam update. Throws NumericalError naming the parameter and
// step when a gradient is not finite; parameters are untouched in that case.
void adam_step(AdamState& state, std::vector<Matrix>& params, const std::vector<Matrix>& grads,
               std::span<const std::string> names = {});

// Rescales grads in place so that their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(std::vector<Matrix>& grads, double max_norm);

enum class LossKind {
  Mse,            // mean squared error against the targets
  NoiseVariance,  // 1/2 (ln s + r^2 / s), output s is a variance, targets are r^2
};

inline constexpr double kVarianceFloor = 1e-12;

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t epochs = 128;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;
  bool shuffle = true;
  LossKind loss = LossKind::Mse;
};

struct TrainResult {
  RnnModel model;
  std::vector<double> loss_trace;  // mean per-window training loss, one entry per epoch
};

// Mini-batch training over batch.window(rows[i]). Each epoch reshuffles the
// order with `rng` and draws a fresh dropout mask per window; the last
// partial batch is kept.
TrainResult train(RnnModel model, const SequenceBatch& batch, std::span<const std::size_t> rows,
                  const TrainConfig& config, Rng& rng);
TrainResult train(RnnModel model, const SequenceBatch& batch, const TrainConfig& config, Rng& rng);

}  // namespace tsrnn
