#include "tsrnn/forecaster.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "tsrnn/errors.hpp"
#include "tsrnn/intervals.hpp"
#include "tsrnn/parallel.hpp"

namespace tsrnn {

ForecastStep assemble_step(std::span<const double> scaled_member_preds, double scaled_var_noise,
                           const ScalerState& target_scaler, double conf) {
  const BaggedPrediction b = bag(scaled_member_preds);
  const double spread = target_scaler.spread(0);
  ForecastStep step;
  step.y_hat = target_scaler.unscale(0, b.mean);
  step.var_model = b.variance * spread * spread;
  step.var_noise = scaled_var_noise * spread * spread;
  if (scaled_member_preds.size() >= 2) {
    const Interval ci = confidence_interval(b.mean, b.variance, conf, scaled_member_preds.size());
    const Interval pi =
        prediction_interval(b.mean, b.variance, scaled_var_noise, conf, scaled_member_preds.size());
    step.ci_lo = target_scaler.unscale(0, ci.lo);
    step.ci_hi = target_scaler.unscale(0, ci.hi);
    step.pi_lo = target_scaler.unscale(0, pi.lo);
    step.pi_hi = target_scaler.unscale(0, pi.hi);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    step.ci_lo = step.ci_hi = step.pi_lo = step.pi_hi = nan;
  }
  return step;
}

ForecastResult one_step_forecast(const EnsembleModel& ensemble, const SequenceBatch& windows,
                                 std::span<const Timestamp> timestamps, double conf, std::size_t workers) {
  const Matrix preds = member_predictions(ensemble, windows, workers);
  std::vector<double> noise(windows.size(), 0.0);
  if (ensemble.residual_net) noise = predict(*ensemble.residual_net, windows);

  const ScalerState& ts = ensemble.scalers.target;
  ForecastResult result;
  result.intervals = ensemble.n_run() >= 2;
  result.members = Matrix(windows.size(), ensemble.n_run());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    ForecastStep step = assemble_step(preds.row(w), noise[w], ts, conf);
    const std::size_t t = windows.target_index(w);
    if (t >= timestamps.size()) throw ShapeError("window target beyond the timestamp range");
    step.timestamp = timestamps[t];
    step.y_true = ts.unscale(0, windows.targets[w]);
    for (std::size_t r = 0; r < ensemble.n_run(); ++r) result.members(w, r) = ts.unscale(0, preds(w, r));
    result.steps.push_back(step);
  }
  return result;
}

namespace {

// Scaled feature rows for a recursive forecast; row j is computed once from
// values[0..j) and cached.
class RecursiveRows {
 public:
  RecursiveRows(const FeatureBuilder& builder, const ScalerState& scaler, const TimeSeries& history)
      : builder_(builder), scaler_(scaler), history_(history), values_(history.values) {
    if (builder.has_covariates()) {
      throw ConfigError("multi-step forecasting is unsupported with exogenous covariates: their future "
                        "values are unknown");
    }
    if (history.size() < 2) throw DataError("multi-step forecasting needs at least two observations");
    spacing_ = history.spacing();
  }

  std::size_t observed() const { return history_.size(); }
  Timestamp timestamp(std::size_t j) const {
    if (j < history_.size()) return history_.timestamps[j];
    return history_.timestamps.back() + spacing_ * static_cast<long long>(j - history_.size() + 1);
  }
  void push_value(double raw) { values_.push_back(raw); }

  // Fills `window` with rows [end - seq_len, end).
  void window(std::size_t end, std::size_t seq_len, std::span<double> out) {
    if (end < seq_len) throw DataError("insufficient history for a window ending at " + std::to_string(end));
    const std::size_t nf = builder_.size();
    for (std::size_t k = 0; k < seq_len; ++k) {
      const auto r = row(end - seq_len + k);
      std::copy(r.begin(), r.end(), out.begin() + k * nf);
    }
  }

 private:
  std::span<const double> row(std::size_t j) {
    auto it = cache_.find(j);
    if (it == cache_.end()) {
      std::vector<double> raw(builder_.size());
      builder_.row(j, timestamp(j), values_, {}, raw);
      for (std::size_t c = 0; c < raw.size(); ++c) raw[c] = scaler_.scale(c, raw[c]);
      it = cache_.emplace(j, std::move(raw)).first;
    }
    return it->second;
  }

  const FeatureBuilder& builder_;
  const ScalerState& scaler_;
  const TimeSeries& history_;
  std::vector<double> values_;
  std::chrono::seconds spacing_{};
  std::map<std::size_t, std::vector<double>> cache_;
};

}  // namespace

ForecastResult multi_step_forecast(const EnsembleModel& ensemble, const FeatureBuilder& builder,
                                   const TimeSeries& history, std::size_t horizon, double conf) {
  if (ensemble.members.empty()) throw DataError("ensemble has no members");
  const ModelShape& shape = ensemble.members.front().shape;
  const ScalerState& ts = ensemble.scalers.target;
  RecursiveRows rows(builder, ensemble.scalers.features, history);
  std::vector<double> window(shape.seq_len * shape.n_features);
  std::vector<double> preds(ensemble.n_run());
  ForwardCache cache;

  ForecastResult result;
  result.intervals = ensemble.n_run() >= 2;
  result.members = Matrix(horizon, ensemble.n_run());
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::size_t target = rows.observed() + k;
    rows.window(target, shape.seq_len, window);
    for (std::size_t r = 0; r < ensemble.n_run(); ++r) {
      preds[r] = forward(ensemble.members[r], window, {}, &cache);
      result.members(k, r) = ts.unscale(0, preds[r]);
    }
    const double noise = ensemble.residual_net ? forward(*ensemble.residual_net, window, {}, &cache) : 0.0;
    ForecastStep step = assemble_step(preds, noise, ts, conf);
    step.timestamp = rows.timestamp(target);
    rows.push_value(step.y_hat);
    result.steps.push_back(step);
  }
  return result;
}

Matrix member_multi_step(const EnsembleModel& ensemble, const FeatureBuilder& builder,
                         const TimeSeries& history, std::size_t horizon, std::size_t workers) {
  const ScalerState& ts = ensemble.scalers.target;
  Matrix out(horizon, ensemble.n_run());
  parallel_for(ensemble.n_run(), workers, [&](std::size_t r) {
    const RnnModel& member = ensemble.members[r];
    RecursiveRows rows(builder, ensemble.scalers.features, history);
    std::vector<double> window(member.shape.seq_len * member.shape.n_features);
    ForwardCache cache;
    for (std::size_t k = 0; k < horizon; ++k) {
      rows.window(rows.observed() + k, member.shape.seq_len, window);
      const double y = ts.unscale(0, forward(member, window, {}, &cache));
      out(k, r) = y;
      rows.push_value(y);
    }
  });
  return out;
}

}  // namespace tsrnn
