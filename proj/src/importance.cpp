#include "tsrnn/importance.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "tsrnn/errors.hpp"
#include "tsrnn/metrics.hpp"
#include "tsrnn/parallel.hpp"

namespace tsrnn {

FeatureFrame permute_feature(const FeatureFrame& frame, const std::string& feature, IndexRange rows,
                             Rng& rng) {
  const std::size_t c = frame.index_of(feature);
  if (rows.end > frame.rows() || rows.empty()) throw DataError("permutation row range out of bounds");
  FeatureFrame out = frame;
  const auto perm = shuffled_indices(rng, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.columns(rows.begin + i, c) = frame.columns(rows.begin + perm[i], c);
  }
  return out;
}

SetAccuracy evaluate_set(const EnsembleModel& ensemble, const FeatureFrame& scaled,
                         std::span<const std::size_t> starts, EvalSet set, std::size_t workers) {
  if (ensemble.members.empty()) throw DataError("ensemble has no members");
  const std::size_t seq_len = ensemble.members.front().shape.seq_len;
  const ScalerState& ts = ensemble.scalers.target;
  const SequenceBatch batch = window_sequences(scaled, seq_len, starts);

  std::vector<double> y, y_hat, y_prev;
  auto push = [&](std::size_t w, double scaled_pred) {
    const std::size_t t = batch.target_index(w);
    y.push_back(ts.unscale(0, batch.targets[w]));
    y_hat.push_back(ts.unscale(0, scaled_pred));
    y_prev.push_back(ts.unscale(0, scaled.target[t - 1]));
  };
  if (set == EvalSet::Validation) {
    const ValidationPredictions vp = validation_predictions(ensemble, batch, workers);
    for (std::size_t i = 0; i < vp.windows.size(); ++i) push(vp.windows[i], bag(vp.predictions[i]).mean);
  } else {
    const Matrix preds = member_predictions(ensemble, batch, workers);
    for (std::size_t w = 0; w < batch.size(); ++w) push(w, bag(preds.row(w)).mean);
  }
  const RegressionReport reg = regression_metrics(y, y_hat);
  if (!reg.r2) throw DataError("R^2 undefined: evaluation targets are constant");
  const DirectionLabels labels = direction_labels(y_prev, y, y_hat);
  return {*reg.r2, classification_metrics(labels.actual, labels.predicted).accuracy};
}

namespace {

IndexRange span_of(std::span<const std::size_t> starts, std::size_t seq_len) {
  if (starts.empty()) throw DataError("evaluation set has no windows");
  const auto [lo, hi] = std::minmax_element(starts.begin(), starts.end());
  return {*lo, *hi + seq_len};
}

// Mean accuracy drop per feature for one evaluation set, both metrics.
std::vector<SetAccuracy> drops_for_set(const ImportanceInputs& in, EvalSet set, std::size_t n_repeats,
                                       std::uint64_t seed, std::size_t workers) {
  if (n_repeats == 0) throw ConfigError("importance needs at least one repeat");
  const auto& starts = set == EvalSet::Validation ? in.train_starts : in.test_starts;
  const std::size_t seq_len = in.ensemble.members.front().shape.seq_len;
  const IndexRange rows = span_of(starts, seq_len);
  const SetAccuracy baseline = evaluate_set(in.ensemble, in.scaled, starts, set, workers);
  const std::size_t n_features = in.scaled.cols();
  std::vector<SetAccuracy> drops(n_features);
  parallel_for(n_features, workers, [&](std::size_t f) {
    Rng rng(mix_seed(mix_seed(seed, f, SeedPurpose::Permutation), static_cast<std::uint64_t>(set),
                     SeedPurpose::Permutation));
    double r2 = 0.0;
    double mda = 0.0;
    for (std::size_t k = 0; k < n_repeats; ++k) {
      const FeatureFrame corrupted = permute_feature(in.scaled, in.scaled.features[f].name, rows, rng);
      const SetAccuracy acc = evaluate_set(in.ensemble, corrupted, starts, set, 1);
      r2 += acc.r2;
      mda += acc.mda;
    }
    const double n = static_cast<double>(n_repeats);
    drops[f] = {baseline.r2 - r2 / n, baseline.mda - mda / n};
  });
  return drops;
}

}  // namespace

std::vector<double> importance_scores(const ImportanceInputs& inputs, AccuracyMetric metric, EvalSet set,
                                      std::size_t n_repeats, std::uint64_t seed, std::size_t workers) {
  const auto drops = drops_for_set(inputs, set, n_repeats, seed, workers);
  std::vector<double> out;
  for (const auto& d : drops) out.push_back(metric == AccuracyMetric::R2 ? d.r2 : d.mda);
  return out;
}

RawImportance permutation_importance(const ImportanceInputs& inputs, std::size_t n_repeats,
                                     std::uint64_t seed, std::size_t workers) {
  RawImportance raw;
  raw.features = inputs.scaled.names();
  const auto val = drops_for_set(inputs, EvalSet::Validation, n_repeats, seed, workers);
  const auto test = drops_for_set(inputs, EvalSet::Test, n_repeats, seed, workers);
  for (std::size_t f = 0; f < raw.features.size(); ++f) {
    raw.scores[0].push_back(val[f].r2);
    raw.scores[1].push_back(test[f].r2);
    raw.scores[2].push_back(val[f].mda);
    raw.scores[3].push_back(test[f].mda);
  }
  return raw;
}

FeatureGroups groups_from_features(const std::vector<FeatureInfo>& features) {
  FeatureGroups groups;
  for (const auto& f : features) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == f.group; });
    if (it == groups.end()) {
      groups.push_back({f.group, {f.name}});
    } else {
      it->second.push_back(f.name);
    }
  }
  return groups;
}

namespace {

void summarize(std::vector<ImportanceRow>& rows) {
  double total = 0.0;
  for (auto& r : rows) {
    r.mean = (r.scores[0] + r.scores[1] + r.scores[2] + r.scores[3]) / 4.0;
    total += std::max(r.mean, 0.0);
  }
  for (auto& r : rows) r.normalized = total > 0.0 ? std::max(r.mean, 0.0) / total : 0.0;
}

}  // namespace

ImportanceReport group_and_summarize(const RawImportance& raw, const FeatureGroups& groups) {
  std::map<std::string, std::size_t> index;
  for (std::size_t f = 0; f < raw.features.size(); ++f) index[raw.features[f]] = f;
  std::vector<int> covered(raw.features.size(), 0);

  ImportanceReport report;
  for (std::size_t f = 0; f < raw.features.size(); ++f) {
    ImportanceRow row;
    row.name = raw.features[f];
    for (std::size_t s = 0; s < 4; ++s) row.scores[s] = raw.scores[s].at(f);
    report.detailed.push_back(row);
  }
  for (const auto& [group, members] : groups) {
    if (members.empty()) throw ConfigError("importance group '" + group + "' has no members");
    ImportanceRow row;
    row.name = group;
    row.scores.fill(-std::numeric_limits<double>::infinity());
    for (const auto& m : members) {
      const auto it = index.find(m);
      if (it == index.end()) throw ConfigError("importance group '" + group + "' names unknown feature " + m);
      ++covered[it->second];
      for (std::size_t s = 0; s < 4; ++s) row.scores[s] = std::max(row.scores[s], raw.scores[s][it->second]);
    }
    report.summary.push_back(row);
  }
  for (std::size_t f = 0; f < covered.size(); ++f) {
    if (covered[f] != 1) {
      throw ConfigError("feature " + raw.features[f] + " must belong to exactly one importance group");
    }
  }
  summarize(report.detailed);
  summarize(report.summary);
  return report;
}

void write_importance_csv(const std::filesystem::path& path, const std::vector<ImportanceRow>& rows,
                          const std::string& name_column) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << name_column;
  for (const char* s : kImportanceSettings) out << ',' << s;
  out << ",mean,normalized\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.name;
    for (double v : r.scores) {
      std::snprintf(buf, sizeof buf, ",%.6g", v);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6g,%.6g\n", r.mean, r.normalized);
    out << buf;
  }
}

nlohmann::json to_json(const ImportanceReport& report) {
  auto rows_json = [](const std::vector<ImportanceRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json o;
      o["name"] = r.name;
      for (std::size_t s = 0; s < 4; ++s) o[kImportanceSettings[s]] = r.scores[s];
      o["mean"] = r.mean;
      o["normalized"] = r.normalized;
      arr.push_back(o);
    }
    return arr;
  };
  return {{"detailed", rows_json(report.detailed)}, {"summary", rows_json(report.summary)}};
}

}  // namespace tsrnn
