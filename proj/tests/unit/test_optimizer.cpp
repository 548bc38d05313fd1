#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "support/synthetic.hpp"
#include "tsrnn/errors.hpp"
#include "tsrnn/optimizer.hpp"

using namespace tsrnn;
using Catch::Approx;

namespace {

SequenceBatch sine_batch(std::size_t n, std::size_t seq_len) {
  TimeSeries s;
  for (std::size_t t = 0; t < n; ++t) {
    s.timestamps.push_back(testing::hourly(t));
    s.values.push_back(std::sin(2 * std::numbers::pi * static_cast<double>(t) / 20.0));
  }
  s.covariates = Matrix(n, 0);
  FeatureConfig cfg;
  cfg.lags = {1};
  cfg.trend = false;
  cfg.calendar = CalendarConfig{};
  for (bool CalendarConfig::*flag :
       {&CalendarConfig::hour, &CalendarConfig::day_of_week, &CalendarConfig::month, &CalendarConfig::season,
        &CalendarConfig::week_of_year, &CalendarConfig::afternoon, &CalendarConfig::working_hour,
        &CalendarConfig::working_day, &CalendarConfig::quarter_start, &CalendarConfig::month_start}) {
    cfg.calendar.*flag = false;
  }
  const FeatureBuilder b(cfg, {});
  FeatureFrame raw = b.build(s);
  FrameScalers sc;
  const IndexRange rows{raw.valid_from, n};
  sc.features = fit_scaler(raw, ScalerKind::MinMax, rows);
  sc.target = fit_target_scaler(raw, ScalerKind::MinMax, rows);
  return window_sequences(apply_scalers(sc, raw), seq_len);
}

ModelShape small_shape(std::size_t features, std::size_t seq_len) {
  ModelShape s;
  s.units = 8;
  s.n_features = features;
  s.seq_len = seq_len;
  s.dropout = 0.0;
  return s;
}

}  // namespace

TEST_CASE("mse_loss") {
  const std::vector<double> a{1, 2}, z1{0}, t1{3}, z2{0, 0}, t2{3, 4};
  CHECK(mse_loss(a, a) == 0.0);
  CHECK(mse_loss(z1, t1) == 9.0);
  CHECK(mse_loss(z2, t2) == 12.5);
  CHECK_THROWS(mse_loss(std::vector<double>{}, std::vector<double>{}));
  CHECK_THROWS(mse_loss(a, t1));
}

TEST_CASE("Adam with zero gradient is a no-op") {
  std::vector<Matrix> params{Matrix{{1.5, -2}}, Matrix{{3}}};
  const auto before = params;
  AdamState st = make_adam(params, 0.01);
  const std::vector<Matrix> grads{Matrix(1, 2), Matrix(1, 1)};
  for (int i = 0; i < 5; ++i) adam_step(st, params, grads);
  CHECK(params == before);
  CHECK(st.t == 5);
}

TEST_CASE("first Adam step moves by lr against the gradient sign") {
  std::vector<Matrix> params{Matrix{{0.0, 0.0}}};
  AdamState st = make_adam(params, 0.001);
  adam_step(st, params, {Matrix{{4.0, -0.25}}});
  CHECK(params[0](0, 0) == Approx(-0.001).epsilon(1e-6));
  CHECK(params[0](0, 1) == Approx(0.001).epsilon(1e-6));
}

TEST_CASE("Adam matches an independent scalar recursion") {
  std::vector<Matrix> params{Matrix{{0.0}}};
  AdamState st = make_adam(params, 0.1);
  double w = 0, m = 0, v = 0;
  for (int t = 1; t <= 200; ++t) {
    const double g = 2 * (w - 3);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    adam_step(st, params, {Matrix{{2 * (params[0](0, 0) - 3)}}});
    REQUIRE(params[0](0, 0) == Approx(w).epsilon(1e-12));
  }
  CHECK(std::abs(params[0](0, 0) - 3) < 0.05);
  for (double x : st.v[0].values()) CHECK(x >= 0);
}

TEST_CASE("non-finite gradient aborts with the parameter name and step") {
  std::vector<Matrix> params{Matrix{{1.0}}, Matrix{{2.0}}};
  const auto before = params;
  AdamState st = make_adam(params, 0.1);
  const std::vector<std::string> names{"W_i", "dense_b"};
  try {
    adam_step(st, params, {Matrix{{0.5}}, Matrix{{std::nan("")}}}, names);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dense_b") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
  CHECK(params == before);
}

TEST_CASE("clip_global_norm") {
  std::vector<Matrix> g{Matrix{{3.0}}, Matrix{{4.0}}};
  CHECK(clip_global_norm(g, 5.0) == 5.0);
  CHECK(g[0](0, 0) == 3.0);
  CHECK(clip_global_norm(g, 1.0) == Approx(5.0));
  CHECK(g[0](0, 0) == Approx(0.6));
  CHECK(g[1](0, 0) == Approx(0.8));
}

TEST_CASE("train: zero epochs, trace length and determinism") {
  const SequenceBatch batch = sine_batch(120, 8);
  Rng init(1);
  ModelShape shape = small_shape(1, 8);
  shape.dropout = 0.5;
  const RnnModel m0 = init_params(init, shape);
  TrainConfig cfg;
  cfg.epochs = 0;
  Rng r0(2);
  CHECK(train(m0, batch, cfg, r0).model.params == m0.params);

  cfg.epochs = 7;
  cfg.batch_size = 16;
  Rng a(3), b(3);
  const TrainResult ra = train(m0, batch, cfg, a);
  const TrainResult rb = train(m0, batch, cfg, b);
  CHECK(ra.loss_trace.size() == 7);
  CHECK(ra.model.params == rb.model.params);
  CHECK(ra.loss_trace == rb.loss_trace);
  CHECK_FALSE(ra.model.params == m0.params);
}

TEST_CASE("training fits a sine wave") {
  const SequenceBatch batch = sine_batch(200, 16);
  Rng init(21);
  const RnnModel m0 = init_params(init, small_shape(1, 16));
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 32;
  cfg.lr = 0.01;
  Rng rng(22);
  const TrainResult r = train(m0, batch, cfg, rng);
  const std::vector<double> pred = predict(r.model, batch);
  CHECK(mse_loss(pred, batch.targets) < 0.01);
  CHECK(r.loss_trace.back() < r.loss_trace.front());
}
