#pragma once

#include <optional>
#include <vector>

namespace tsrnn::testing {

// Small hand-computed cases for the evaluation metrics.
struct RegressionCase {
  std::vector<double> y, y_hat;
  double rmse, mae, smape, medae;
};

struct ClassificationCase {
  std::vector<int> actual, predicted;
  double accuracy;
  std::optional<double> precision, recall, f1;
};

struct IntervalCase {
  std::vector<double> y, lo, hi;
  double range, picp, mpiw;
};

const std::vector<RegressionCase>& regression_cases();
const std::vector<ClassificationCase>& classification_cases();
const std::vector<IntervalCase>& interval_cases();

}  // namespace tsrnn::testing
