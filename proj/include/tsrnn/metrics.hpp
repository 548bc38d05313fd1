#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace tsrnn {

struct RegressionReport {
  std::size_t n = 0;
  double rmse = 0.0;
  double mae = 0.0;
  double smape = 0.0;  // percent, in [0, 200]
  double medae = 0.0;
  std::optional<double> r2;  // undefined for constant y
};

RegressionReport regression_metrics(std::span<const double> y, std::span<const double> y_hat);

struct DirectionLabels {
  std::vector<int> actual;
  std::vector<int> predicted;
};

// actual[t] = 1{y_t > y_{t-1}}, predicted[t] = 1{y_hat_t > y_{t-1}} for t >= 1;
// the first point has no predecessor and is dropped.
DirectionLabels direction_labels(std::span<const double> y, std::span<const double> y_hat);
// Same labels with the true previous values given explicitly (non-contiguous sets).
DirectionLabels direction_labels(std::span<const double> y_prev, std::span<const double> y,
                                 std::span<const double> y_hat);

struct Confusion {
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;
  std::size_t total() const { return tn + fp + fn + tp; }
};

struct DirectionReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  std::optional<double> precision;  // undefined without predicted positives
  std::optional<double> recall;     // undefined without actual positives
  std::optional<double> f1;
  Confusion confusion;
};

DirectionReport classification_metrics(std::span<const int> actual, std::span<const int> predicted);

struct IntervalReport {
  std::size_t n = 0;
  double picp = 0.0;
  double mpiw = 0.0;
  double nmpiw = 0.0;
  double cwc = 0.0;
  double mu = 0.9;
  double eta = 50.0;
};

// `range` normalises the width; see target_range().
IntervalReport interval_metrics(std::span<const double> y, std::span<const double> lo,
                                std::span<const double> hi, double mu, double eta, double range);
double target_range(std::span<const double> y);

// Field-wise means over individual estimators. Optional fields average the
// members where they are defined; confusion matrices are summed.
RegressionReport mean_report(std::span<const RegressionReport> reports);
DirectionReport mean_report(std::span<const DirectionReport> reports);

// Flat objects keyed by metric name; undefined values serialise as null and
// the confusion matrix as [[tn, fp], [fn, tp]].
nlohmann::json to_json(const RegressionReport& r);
nlohmann::json to_json(const DirectionReport& r);
nlohmann::json to_json(const IntervalReport& r);

}  // namespace tsrnn
