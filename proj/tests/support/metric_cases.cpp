#include "support/metric_cases.hpp"

#include <cmath>

namespace tsrnn::testing {

const std::vector<RegressionCase>& regression_cases() {
  static const std::vector<RegressionCase> cases = {
      {{100}, {50}, 50, 50, 200.0 / 3.0, 50},
      {{1, 2, 3}, {1, 2, 3}, 0, 0, 0, 0},
      {{1, 2, 3}, {2, 3, 4}, 1, 1, 100.0 * (2.0 / 3 + 2.0 / 5 + 2.0 / 7) / 3, 1},
      {{0, 0}, {0, 0}, 0, 0, 0, 0},
      {{0, 0}, {1, -1}, 1, 1, 200, 1},
      {{3, -3}, {-3, 3}, 6, 6, 200, 6},
      {{1, 1, 1, 1}, {2, 0, 1, 1}, std::sqrt(0.5), 0.5, 100.0 * (2.0 / 3 + 2.0) / 4, 0.5},
      {{10, 20, 30, 40}, {11, 18, 33, 36}, std::sqrt((1 + 4 + 9 + 16) / 4.0), 2.5,
       100.0 * (1 / 10.5 + 2 / 19.0 + 3 / 31.5 + 4 / 38.0) / 4, 2.5},
      {{5, 5, 5}, {4, 7, 5}, std::sqrt(5 / 3.0), 1, 100.0 * (1 / 4.5 + 2 / 6.0) / 3, 1},
      {{2}, {2}, 0, 0, 0, 0},
      {{-1, -2}, {-2, -1}, 1, 1, 100.0 * (1 / 1.5 + 1 / 1.5) / 2, 1},
  };
  return cases;
}

const std::vector<ClassificationCase>& classification_cases() {
  static const std::vector<ClassificationCase> cases = {
      {{1, 1, 0, 0}, {1, 0, 0, 1}, 0.5, 0.5, 0.5, 0.5},
      {{1, 1, 1}, {1, 1, 1}, 1.0, 1.0, 1.0, 1.0},
      {{0, 0, 0}, {0, 0, 0}, 1.0, std::nullopt, std::nullopt, std::nullopt},
      {{1, 0}, {0, 0}, 0.5, std::nullopt, 0.0, std::nullopt},
      {{0, 0}, {1, 1}, 0.0, 0.0, std::nullopt, std::nullopt},
      {{1, 0}, {0, 1}, 0.0, 0.0, 0.0, std::nullopt},
      {{1, 1, 1, 0}, {1, 0, 0, 0}, 0.5, 1.0, 1.0 / 3, 0.5},
      {{1, 0, 0, 0}, {1, 1, 1, 1}, 0.25, 0.25, 1.0, 0.4},
      {{1, 1, 0, 0, 1}, {1, 1, 1, 0, 0}, 0.6, 2.0 / 3, 2.0 / 3, 2.0 / 3},
      {{0}, {1}, 0.0, 0.0, std::nullopt, std::nullopt},
      {{1}, {1}, 1.0, 1.0, 1.0, 1.0},
  };
  return cases;
}

const std::vector<IntervalCase>& interval_cases() {
  static const std::vector<IntervalCase> cases = {
      {{0, 10}, {-1, 0}, {1, 9}, 10, 0.5, 5.5},
      {{1, 2, 3}, {0, 1, 2}, {2, 3, 4}, 2, 1.0, 2.0},
      {{1}, {1}, {1}, 1, 1.0, 0.0},
      {{1}, {2}, {3}, 1, 0.0, 1.0},
      {{0, 1, 2, 3}, {0, 0, 0, 0}, {1, 1, 1, 1}, 3, 0.5, 1.0},
      {{5, 6}, {5, 6}, {5, 6}, 1, 1.0, 0.0},
      {{0, 0, 0, 0, 0}, {-1, -1, -1, -1, 1}, {1, 1, 1, 1, 2}, 4, 0.8, 1.8},
      {{-5, 5}, {-6, 4}, {-4, 6}, 10, 1.0, 2.0},
      {{2, 4}, {0, 0}, {1, 3}, 2, 0.0, 2.0},
      {{3, 3, 3}, {2, 2, 4}, {4, 4, 5}, 1, 2.0 / 3, 5.0 / 3},
  };
  return cases;
}

}  // namespace tsrnn::testing
