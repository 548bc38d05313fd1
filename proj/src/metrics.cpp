#include "tsrnn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tsrnn/errors.hpp"

namespace tsrnn {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ShapeError(std::string(what) + ": length mismatch");
  if (a == 0) throw DomainError(std::string(what) + ": empty input");
}

}  // namespace

RegressionReport regression_metrics(std::span<const double> y, std::span<const double> y_hat) {
  check_lengths(y.size(), y_hat.size(), "regression_metrics");
  const std::size_t n = y.size();
  const double dn = static_cast<double>(n);
  RegressionReport r;
  r.n = n;
  double sse = 0.0;
  double sae = 0.0;
  double smape = 0.0;
  double mean_y = 0.0;
  std::vector<double> abs_err(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - y_hat[i];
    sse += e * e;
    abs_err[i] = std::fabs(e);
    sae += abs_err[i];
    const double denom = (std::fabs(y[i]) + std::fabs(y_hat[i])) / 2.0;
    if (denom > 0.0) smape += abs_err[i] / denom;
    mean_y += y[i];
  }
  mean_y /= dn;
  r.rmse = std::sqrt(sse / dn);
  r.mae = sae / dn;
  r.smape = 100.0 * smape / dn;
  std::sort(abs_err.begin(), abs_err.end());
  r.medae = n % 2 == 1 ? abs_err[n / 2] : 0.5 * (abs_err[n / 2 - 1] + abs_err[n / 2]);
  double sst = 0.0;
  for (double v : y) sst += (v - mean_y) * (v - mean_y);
  if (sst > 0.0) r.r2 = 1.0 - sse / sst;
  return r;
}

DirectionLabels direction_labels(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw ShapeError("direction_labels: length mismatch");
  if (y.size() < 2) throw DomainError("direction_labels: need at least two points");
  return direction_labels(y.first(y.size() - 1), y.subspan(1), y_hat.subspan(1));
}

DirectionLabels direction_labels(std::span<const double> y_prev, std::span<const double> y,
                                 std::span<const double> y_hat) {
  if (y_prev.size() != y.size() || y.size() != y_hat.size()) {
    throw ShapeError("direction_labels: length mismatch");
  }
  DirectionLabels out;
  out.actual.reserve(y.size());
  out.predicted.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.actual.push_back(y[i] - y_prev[i] > 0.0 ? 1 : 0);
    out.predicted.push_back(y_hat[i] - y_prev[i] > 0.0 ? 1 : 0);
  }
  return out;
}

DirectionReport classification_metrics(std::span<const int> actual, std::span<const int> predicted) {
  check_lengths(actual.size(), predicted.size(), "classification_metrics");
  DirectionReport r;
  r.n = actual.size();
  std::size_t agree = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const bool a = actual[i] != 0;
    const bool p = predicted[i] != 0;
    if (a == p) ++agree;
    if (a && p) ++r.confusion.tp;
    if (!a && p) ++r.confusion.fp;
    if (a && !p) ++r.confusion.fn;
    if (!a && !p) ++r.confusion.tn;
  }
  r.accuracy = static_cast<double>(agree) / static_cast<double>(r.n);
  const std::size_t pred_pos = r.confusion.tp + r.confusion.fp;
  const std::size_t act_pos = r.confusion.tp + r.confusion.fn;
  if (pred_pos > 0) r.precision = static_cast<double>(r.confusion.tp) / static_cast<double>(pred_pos);
  if (act_pos > 0) r.recall = static_cast<double>(r.confusion.tp) / static_cast<double>(act_pos);
  if (r.precision && r.recall && *r.precision + *r.recall > 0.0) {
    r.f1 = 2.0 * (*r.precision * *r.recall) / (*r.precision + *r.recall);
  }
  return r;
}

double target_range(std::span<const double> y) {
  if (y.empty()) throw DomainError("target_range of an empty sequence");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo;
}

IntervalReport interval_metrics(std::span<const double> y, std::span<const double> lo,
                                std::span<const double> hi, double mu, double eta, double range) {
  check_lengths(y.size(), lo.size(), "interval_metrics");
  check_lengths(y.size(), hi.size(), "interval_metrics");
  if (!(range > 0.0)) throw DomainError("interval_metrics: target range must be positive");
  IntervalReport r;
  r.n = y.size();
  r.mu = mu;
  r.eta = eta;
  std::size_t covered = 0;
  double width = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (lo[i] > hi[i]) throw DomainError("interval_metrics: lower bound above upper bound");
    if (y[i] >= lo[i] && y[i] <= hi[i]) ++covered;
    width += hi[i] - lo[i];
  }
  const double dn = static_cast<double>(r.n);
  r.picp = static_cast<double>(covered) / dn;
  r.mpiw = width / dn;
  r.nmpiw = r.mpiw / range;
  const double penalty = r.picp < mu ? std::exp(-eta * (r.picp - mu)) : 0.0;
  r.cwc = r.nmpiw * (1.0 + penalty);
  return r;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const RegressionReport& r) {
  return {{"n", r.n},         {"rmse", r.rmse},   {"mae", r.mae},
          {"smape", r.smape}, {"r2", optional_json(r.r2)}, {"medae", r.medae}};
}

nlohmann::json to_json(const DirectionReport& r) {
  const Confusion& c = r.confusion;
  return {{"n", r.n},
          {"accuracy", r.accuracy},
          {"precision", optional_json(r.precision)},
          {"recall", optional_json(r.recall)},
          {"f1", optional_json(r.f1)},
          {"confusion", {{c.tn, c.fp}, {c.fn, c.tp}}}};
}

nlohmann::json to_json(const IntervalReport& r) {
  return {{"n", r.n},         {"picp", r.picp}, {"mpiw", r.mpiw}, {"nmpiw", r.nmpiw},
          {"cwc", r.cwc},     {"mu", r.mu},     {"eta", r.eta}};
}

namespace {

std::optional<double> mean_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

RegressionReport mean_report(std::span<const RegressionReport> reports) {
  if (reports.empty()) throw DataError("no reports to average");
  RegressionReport out;
  std::vector<std::optional<double>> r2;
  for (const auto& r : reports) {
    out.n += r.n;
    out.rmse += r.rmse;
    out.mae += r.mae;
    out.smape += r.smape;
    out.medae += r.medae;
    r2.push_back(r.r2);
  }
  const double k = static_cast<double>(reports.size());
  out.n = static_cast<std::size_t>(std::llround(static_cast<double>(out.n) / k));
  out.rmse /= k;
  out.mae /= k;
  out.smape /= k;
  out.medae /= k;
  out.r2 = mean_defined(r2);
  return out;
}

DirectionReport mean_report(std::span<const DirectionReport> reports) {
  if (reports.empty()) throw DataError("no reports to average");
  DirectionReport out;
  std::vector<std::optional<double>> precision, recall, f1;
  for (const auto& r : reports) {
    out.n += r.n;
    out.accuracy += r.accuracy;
    precision.push_back(r.precision);
    recall.push_back(r.recall);
    f1.push_back(r.f1);
    out.confusion.tn += r.confusion.tn;
    out.confusion.fp += r.confusion.fp;
    out.confusion.fn += r.confusion.fn;
    out.confusion.tp += r.confusion.tp;
  }
  const double k = static_cast<double>(reports.size());
  out.n = static_cast<std::size_t>(std::llround(static_cast<double>(out.n) / k));
  out.accuracy /= k;
  out.precision = mean_defined(precision);
  out.recall = mean_defined(recall);
  out.f1 = mean_defined(f1);
  return out;
}

}  // namespace tsrnn
