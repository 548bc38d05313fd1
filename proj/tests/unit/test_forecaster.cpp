#include <catch_amalgamated.hpp>

#include <cmath>

#include "support/synthetic.hpp"
#include "tsrnn/errors.hpp"
#include "tsrnn/forecaster.hpp"
#include "tsrnn/pipeline.hpp"

using namespace tsrnn;
using Catch::Approx;

namespace {

PipelineConfig small_pipeline(std::size_t n_boot = 3) {
  PipelineConfig pc;
  pc.features = testing::short_series_features();
  pc.shape.units = 4;
  pc.shape.seq_len = 8;
  pc.train.epochs = 3;
  pc.train.batch_size = 32;
  pc.train.lr = 0.01;
  pc.residual_train = pc.train;
  pc.n_boot = n_boot;
  pc.train_fraction = 0.8;
  pc.workers = 1;
  return pc;
}

FeatureConfig lag1_only() {
  FeatureConfig fc;
  fc.lags = {1};
  fc.trend = false;
  CalendarConfig& c = fc.calendar;
  c.hour = c.day_of_week = c.month = c.season = c.week_of_year = false;
  c.afternoon = c.working_hour = c.working_day = c.quarter_start = c.month_start = false;
  return fc;
}

ScalerState scaler(const std::string& name, double lo, double hi) {
  ScalerState s;
  s.names = {name};
  s.first = {lo};
  s.second = {hi};
  return s;
}

}  // namespace

TEST_CASE("assemble_step rescales variances by the squared spread") {
  const ScalerState ts = scaler("target", 0, 10);
  const double a = 0.1 / std::sqrt(2.0);
  const std::vector<double> preds{0.5 - a, 0.5 + a};  // sample sd 0.1
  const ForecastStep s = assemble_step(preds, 0.0004, ts, 0.9);
  CHECK(s.y_hat == Approx(5.0));
  CHECK(s.var_model == Approx(1.0).epsilon(1e-12));
  CHECK(s.var_noise == Approx(0.04).epsilon(1e-12));
  CHECK(s.ci_lo <= s.y_hat);
  CHECK(s.pi_lo <= s.ci_lo);
  CHECK(s.pi_hi >= s.ci_hi);
  const ForecastStep one = assemble_step(std::vector<double>{0.5}, 0.0, ts, 0.9);
  CHECK(std::isnan(one.ci_lo));
}

TEST_CASE("one-step forecast matches a hand computation") {
  const TimeSeries s = testing::ar2_daily(600, 51);
  const FeatureBuilder b(testing::short_series_features(), {});
  const TrainedPipeline fit = fit_pipeline(s, b, small_pipeline());
  const ForecastResult r = one_step_forecast(fit.ensemble, fit.test_batch, fit.data.raw.timestamps, 0.9, 1);
  REQUIRE(r.steps.size() == fit.test_batch.size());
  const ScalerState& ts = fit.ensemble.scalers.target;
  const double spread = ts.spread(0);
  const double t = student_t_quantile(0.95, 2);
  for (std::size_t w = 0; w < r.steps.size(); w += 11) {
    double p[3];
    for (int m = 0; m < 3; ++m) p[m] = forward(fit.ensemble.members[m], fit.test_batch.window(w));
    const double mean = (p[0] + p[1] + p[2]) / 3;
    const double var = ((p[0] - mean) * (p[0] - mean) + (p[1] - mean) * (p[1] - mean) +
                        (p[2] - mean) * (p[2] - mean)) / 2;
    const double noise = forward(*fit.ensemble.residual_net, fit.test_batch.window(w));
    const ForecastStep& st = r.steps[w];
    CHECK(st.y_hat == Approx(ts.unscale(0, mean)).epsilon(1e-12));
    CHECK(st.var_model == Approx(var * spread * spread).epsilon(1e-10));
    CHECK(st.ci_hi == Approx(ts.unscale(0, mean + t * std::sqrt(var))).epsilon(1e-10));
    CHECK(st.pi_hi == Approx(ts.unscale(0, mean + t * std::sqrt(var + noise))).epsilon(1e-10));
    CHECK(*st.y_true == Approx(s.values[fit.test_batch.target_index(w)]).epsilon(1e-12));
    CHECK(st.timestamp == s.timestamps[fit.test_batch.target_index(w)]);
    CHECK(st.pi_lo <= st.ci_lo);
    CHECK(st.ci_hi <= st.pi_hi);
  }
}

TEST_CASE("multi-step step 1 equals the one-step forecast bit for bit") {
  const TimeSeries s = testing::ar2_daily(600, 52);
  const FeatureBuilder b(testing::short_series_features(), {});
  const TrainedPipeline fit = fit_pipeline(s, b, small_pipeline());
  const ForecastResult one = one_step_forecast(fit.ensemble, fit.test_batch, fit.data.raw.timestamps, 0.9, 1);
  const TimeSeries history = s.head(fit.data.split_index);
  const ForecastResult multi = multi_step_forecast(fit.ensemble, b, history, 5, 0.9);
  REQUIRE(multi.steps.size() == 5);
  CHECK(multi.steps[0].timestamp == one.steps[0].timestamp);
  CHECK(multi.steps[0].y_hat == one.steps[0].y_hat);
  CHECK(multi.steps[0].pi_lo == one.steps[0].pi_lo);
  CHECK(multi.steps[0].ci_hi == one.steps[0].ci_hi);
  const Matrix members = member_multi_step(fit.ensemble, b, history, 5, 2);
  for (std::size_t r = 0; r < 3; ++r) CHECK(members(0, r) == one.members(0, r));
  // Step 2 already differs from one-step because the lag reads a prediction.
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(multi.steps[k].ci_lo <= multi.steps[k].y_hat);
    CHECK(multi.steps[k].pi_lo <= multi.steps[k].ci_lo);
  }
}

TEST_CASE("multi-step recursion matches a hand unroll") {
  const FeatureBuilder b(lag1_only(), {});
  EnsembleModel e;
  e.scalers.features = scaler("lag_1", -2, 2);
  e.scalers.target = scaler("target", -2, 2);
  Rng rng(3);
  ModelShape shape;
  shape.units = 3;
  shape.seq_len = 4;
  shape.n_features = 1;
  for (int m = 0; m < 2; ++m) e.members.push_back(init_params(rng, shape));

  TimeSeries h;
  for (std::size_t t = 0; t < 10; ++t) {
    h.timestamps.push_back(testing::hourly(t));
    h.values.push_back(std::sin(0.7 * static_cast<double>(t)));
  }
  h.covariates = Matrix(10, 0);
  const ForecastResult r = multi_step_forecast(e, b, h, 3, 0.9);

  std::vector<double> vals = h.values;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t target = 10 + k;
    std::vector<double> window;
    for (std::size_t j = target - 4; j < target; ++j) window.push_back((vals[j - 1] + 2) / 4);
    const double m0 = forward(e.members[0], window), m1 = forward(e.members[1], window);
    const double y = (m0 + m1) / 2 * 4 - 2;
    CHECK(r.steps[k].y_hat == Approx(y).epsilon(1e-14));
    CHECK(r.steps[k].timestamp == testing::hourly(target));
    vals.push_back(r.steps[k].y_hat);
  }
}

TEST_CASE("constant series with a perfect model stays constant") {
  const FeatureBuilder b(lag1_only(), {});
  EnsembleModel e;
  e.scalers.features = scaler("lag_1", 0, 10);
  e.scalers.target = scaler("target", 0, 10);
  ModelShape shape;
  shape.units = 2;
  shape.seq_len = 3;
  shape.n_features = 1;
  for (int m = 0; m < 3; ++m) {
    RnnModel z = zero_model(shape);
    z.dense_b() = 0.5;
    e.members.push_back(z);
  }
  TimeSeries h;
  for (std::size_t t = 0; t < 6; ++t) {
    h.timestamps.push_back(testing::hourly(t));
    h.values.push_back(5.0);
  }
  h.covariates = Matrix(6, 0);
  for (const auto& st : multi_step_forecast(e, b, h, 20, 0.9).steps) {
    CHECK(st.y_hat == 5.0);
    CHECK(st.ci_lo == 5.0);
    CHECK(st.ci_hi == 5.0);
  }
}

TEST_CASE("multi-step errors") {
  EnsembleModel e;
  e.scalers.features = scaler("lag_1", 0, 1);
  e.scalers.target = scaler("target", 0, 1);
  ModelShape shape;
  shape.units = 2;
  shape.seq_len = 4;
  shape.n_features = 1;
  e.members.push_back(zero_model(shape));
  TimeSeries h;
  for (std::size_t t = 0; t < 3; ++t) {
    h.timestamps.push_back(testing::hourly(t));
    h.values.push_back(1.0);
  }
  h.covariates = Matrix(3, 0);
  CHECK_THROWS_AS(multi_step_forecast(e, FeatureBuilder(lag1_only(), {}), h, 2, 0.9), DataError);
  CHECK_THROWS_AS(multi_step_forecast(e, FeatureBuilder(lag1_only(), {"temp"}), h, 2, 0.9), ConfigError);
}

TEST_CASE("validation forecast covers every left-out window") {
  const TimeSeries s = testing::ar2_daily(600, 53);
  const FeatureBuilder b(testing::short_series_features(), {});
  const TrainedPipeline fit = fit_pipeline(s, b, small_pipeline(4));
  const ForecastResult v = validation_forecast(fit.ensemble, fit.train_batch, fit.data.raw.timestamps, 0.9, 1);
  CHECK(v.steps.size() == fit.residuals->samples.size());
  for (std::size_t i = 0; i < v.steps.size(); ++i) {
    std::size_t present = 0;
    for (std::size_t r = 0; r < 4; ++r) present += !std::isnan(v.members(i, r));
    REQUIRE(present >= 1);
    REQUIRE(std::isnan(v.steps[i].ci_lo) == (present < 2));
  }
}

TEST_CASE("fit_pipeline keeps test rows out of scaling and training") {
  const TimeSeries s = testing::ar2_daily(600, 54);
  TimeSeries spoiled = s;
  for (std::size_t t = 480; t < 600; ++t) spoiled.values[t] += 1000.0;
  const FeatureBuilder b(testing::short_series_features(), {});
  const TrainedPipeline a = fit_pipeline(s, b, small_pipeline(2));
  const TrainedPipeline c = fit_pipeline(spoiled, b, small_pipeline(2));
  REQUIRE(a.data.split_index == 480);
  CHECK(a.data.scalers.target.first == c.data.scalers.target.first);
  CHECK(a.data.scalers.target.second == c.data.scalers.target.second);
  CHECK(a.data.scalers.features.second == c.data.scalers.features.second);
  for (std::size_t r = 0; r < 2; ++r) CHECK(a.ensemble.members[r].params == c.ensemble.members[r].params);
  CHECK(a.ensemble.residual_net->params == c.ensemble.residual_net->params);
}
