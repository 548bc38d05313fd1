#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tsrnn/ensemble.hpp"
#include "tsrnn/features.hpp"

namespace tsrnn {

enum class AccuracyMetric { R2, Mda };
enum class EvalSet { Validation, Test };

// Copy of `frame` with one column shuffled across rows [rows.begin, rows.end).
FeatureFrame permute_feature(const FeatureFrame& frame, const std::string& feature, IndexRange rows,
                             Rng& rng);

struct SetAccuracy {
  double r2 = 0.0;
  double mda = 0.0;
};

// Bagged one-step accuracy on the original scale. For Validation, `starts`
// must be the starts of the whole training batch the plan was drawn on, and
// each window is predicted by the runs that left it out. For Test, every
// member predicts every window.
SetAccuracy evaluate_set(const EnsembleModel& ensemble, const FeatureFrame& scaled,
                         std::span<const std::size_t> starts, EvalSet set, std::size_t workers = 1);

struct ImportanceInputs {
  const EnsembleModel& ensemble;
  const FeatureFrame& scaled;
  std::vector<std::size_t> train_starts;
  std::vector<std::size_t> test_starts;
};

// baseline accuracy - mean accuracy with the feature permuted, per feature.
std::vector<double> importance_scores(const ImportanceInputs& inputs, AccuracyMetric metric, EvalSet set,
                                      std::size_t n_repeats, std::uint64_t seed, std::size_t workers = 0);

// The four settings in column order r-v, r-t, c-v, c-t.
inline constexpr std::array<const char*, 4> kImportanceSettings = {"r-v", "r-t", "c-v", "c-t"};

struct RawImportance {
  std::vector<std::string> features;
  std::array<std::vector<double>, 4> scores;
};

RawImportance permutation_importance(const ImportanceInputs& inputs, std::size_t n_repeats,
                                     std::uint64_t seed, std::size_t workers = 0);

struct ImportanceRow {
  std::string name;
  std::array<double, 4> scores{};
  double mean = 0.0;
  double normalized = 0.0;  // max(mean, 0) / sum of max(mean, 0)
};

struct ImportanceReport {
  std::vector<ImportanceRow> detailed;  // per feature
  std::vector<ImportanceRow> summary;   // per group
};

using FeatureGroups = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Groups in order of first appearance of FeatureInfo::group.
FeatureGroups groups_from_features(const std::vector<FeatureInfo>& features);

ImportanceReport group_and_summarize(const RawImportance& raw, const FeatureGroups& groups);

// Columns: name, r-v, r-t, c-v, c-t, mean, normalized.
void write_importance_csv(const std::filesystem::path& path, const std::vector<ImportanceRow>& rows,
                          const std::string& name_column);
nlohmann::json to_json(const ImportanceReport& report);

}  // namespace tsrnn
