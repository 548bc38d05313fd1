#include "tsrnn/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tsrnn/errors.hpp"
#include "tsrnn/parallel.hpp"

namespace tsrnn {

double BootstrapPlan::unique_fraction(std::size_t run) const {
  return 1.0 - static_cast<double>(left_out[run].size()) / static_cast<double>(n_windows);
}

std::vector<std::size_t> BootstrapPlan::never_left_out() const {
  std::vector<bool> seen(n_windows, false);
  for (const auto& lo : left_out) {
    for (std::size_t w : lo) seen[w] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < n_windows; ++w) {
    if (!seen[w]) out.push_back(w);
  }
  return out;
}

BootstrapPlan make_plan(std::uint64_t seed, std::size_t n_windows, std::size_t n_run) {
  if (n_windows < 2) throw DataError("bootstrap needs at least two windows");
  if (n_run < 1) throw ConfigError("bootstrap needs at least one run");
  BootstrapPlan plan;
  plan.n_windows = n_windows;
  for (std::size_t r = 0; r < n_run; ++r) {
    Rng rng(mix_seed(seed, r, SeedPurpose::Resample));
    std::vector<std::size_t> sample(n_windows);
    std::vector<bool> drawn(n_windows, false);
    for (auto& s : sample) {
      s = rng.below(n_windows);
      drawn[s] = true;
    }
    std::vector<std::size_t> left;
    for (std::size_t w = 0; w < n_windows; ++w) {
      if (!drawn[w]) left.push_back(w);
    }
    plan.sampled.push_back(std::move(sample));
    plan.left_out.push_back(std::move(left));
  }
  return plan;
}

// Text format: "n_windows n_run" then one line per run with its sampled indices.
void save_plan(const std::filesystem::path& path, const BootstrapPlan& plan) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write plan " + path.string());
  out << plan.n_windows << ' ' << plan.n_run() << '\n';
  for (const auto& s : plan.sampled) {
    for (std::size_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
    out << '\n';
  }
}

BootstrapPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open plan " + path.string());
  BootstrapPlan plan;
  std::size_t n_run = 0;
  if (!(in >> plan.n_windows >> n_run)) throw DataError("bad plan header in " + path.string());
  for (std::size_t r = 0; r < n_run; ++r) {
    std::vector<std::size_t> sample(plan.n_windows);
    std::vector<bool> drawn(plan.n_windows, false);
    for (auto& s : sample) {
      if (!(in >> s) || s >= plan.n_windows) throw DataError("bad plan entry in " + path.string());
      drawn[s] = true;
    }
    std::vector<std::size_t> left;
    for (std::size_t w = 0; w < plan.n_windows; ++w) {
      if (!drawn[w]) left.push_back(w);
    }
    plan.sampled.push_back(std::move(sample));
    plan.left_out.push_back(std::move(left));
  }
  return plan;
}

EnsembleModel train_ensemble(const SequenceBatch& batch, const BootstrapPlan& plan,
                             const EnsembleConfig& config, std::uint64_t seed) {
  if (plan.n_windows != batch.size()) throw ShapeError("bootstrap plan does not match the batch");
  const std::size_t n_run = plan.n_run();
  EnsembleModel ensemble;
  ensemble.plan = plan;
  ensemble.members.resize(n_run);
  ensemble.loss_traces.resize(n_run);
  parallel_for(n_run, config.workers, [&](std::size_t r) {
    Rng init_rng(mix_seed(seed, r, SeedPurpose::Init));
    Rng train_rng(mix_seed(seed, r, SeedPurpose::Training));
    RnnModel model = init_params(init_rng, config.shape);
    TrainResult result = train(std::move(model), batch, plan.sampled[r], config.train, train_rng);
    ensemble.members[r] = std::move(result.model);
    ensemble.loss_traces[r] = std::move(result.loss_trace);
  });
  return ensemble;
}

BaggedPrediction bag(std::span<const double> member_predictions) {
  if (member_predictions.empty()) throw DomainError("cannot bag an empty set of predictions");
  const double n = static_cast<double>(member_predictions.size());
  double sum = 0.0;
  for (double p : member_predictions) sum += p;
  BaggedPrediction out;
  out.mean = sum / n;
  if (member_predictions.size() > 1) {
    double ss = 0.0;
    for (double p : member_predictions) {
      const double d = p - out.mean;
      ss += d * d;
    }
    out.variance = ss / (n - 1.0);
  }
  return out;
}

BaggedPrediction bagged_predict(const EnsembleModel& ensemble, std::span<const double> window) {
  std::vector<double> preds;
  preds.reserve(ensemble.n_run());
  ForwardCache cache;
  for (const auto& m : ensemble.members) preds.push_back(forward(m, window, {}, &cache));
  return bag(preds);
}

Matrix member_predictions(const EnsembleModel& ensemble, const SequenceBatch& batch, std::size_t workers) {
  Matrix out(batch.size(), ensemble.n_run());
  parallel_for(ensemble.n_run(), workers, [&](std::size_t r) {
    const std::vector<double> p = predict(ensemble.members[r], batch);
    for (std::size_t w = 0; w < p.size(); ++w) out(w, r) = p[w];
  });
  return out;
}

double t_multiplier(double conf, std::size_t n_run) {
  if (n_run < 2) throw DomainError("intervals need at least two bootstrap runs");
  if (!(conf > 0.0 && conf < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  return student_t_quantile(0.5 * (1.0 + conf), static_cast<double>(n_run - 1));
}

Interval confidence_interval(double y_hat, double var_model, double conf, std::size_t n_run) {
  if (!(var_model >= 0.0)) throw DomainError("model variance must be non-negative");
  const double half = t_multiplier(conf, n_run) * std::sqrt(var_model);
  return {y_hat - half, y_hat + half};
}

ValidationPredictions validation_predictions(const EnsembleModel& ensemble, const SequenceBatch& train_batch,
                                             std::size_t workers) {
  const BootstrapPlan& plan = ensemble.plan;
  if (plan.n_windows != train_batch.size()) throw ShapeError("plan does not match the training batch");
  const std::size_t n_run = ensemble.n_run();

  // per_run[r][k] = prediction of run r on plan.left_out[r][k]
  std::vector<std::vector<double>> per_run(n_run);
  parallel_for(n_run, workers, [&](std::size_t r) {
    ForwardCache cache;
    per_run[r].reserve(plan.left_out[r].size());
    for (std::size_t w : plan.left_out[r]) {
      per_run[r].push_back(forward(ensemble.members[r], train_batch.window(w), {}, &cache));
    }
  });

  std::vector<std::vector<std::size_t>> runs_of(plan.n_windows);
  std::vector<std::vector<double>> preds_of(plan.n_windows);
  for (std::size_t r = 0; r < n_run; ++r) {
    for (std::size_t k = 0; k < plan.left_out[r].size(); ++k) {
      const std::size_t w = plan.left_out[r][k];
      runs_of[w].push_back(r);
      preds_of[w].push_back(per_run[r][k]);
    }
  }
  ValidationPredictions out;
  for (std::size_t w = 0; w < plan.n_windows; ++w) {
    if (runs_of[w].empty()) continue;
    out.windows.push_back(w);
    out.runs.push_back(std::move(runs_of[w]));
    out.predictions.push_back(std::move(preds_of[w]));
  }
  return out;
}

}  // namespace tsrnn
