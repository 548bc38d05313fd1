#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support/synthetic.hpp"
#include "tsrnn/errors.hpp"
#include "tsrnn/importance.hpp"
#include "tsrnn/pipeline.hpp"

using namespace tsrnn;
using Catch::Approx;

namespace {

FeatureConfig covariates_only() {
  FeatureConfig f;
  f.lags.clear();
  f.trend = false;
  f.calendar = CalendarConfig{};
  f.calendar.hour = f.calendar.day_of_week = f.calendar.month = f.calendar.season = false;
  f.calendar.week_of_year = f.calendar.afternoon = f.calendar.working_hour = false;
  f.calendar.working_day = f.calendar.quarter_start = f.calendar.month_start = false;
  return f;
}

// y_t = a_{t-1}: the last input row of each window carries the target exactly.
TimeSeries copy_of_a(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TimeSeries s;
  s.covariate_names = {"a", "b"};
  s.covariates = Matrix(n, 2);
  for (std::size_t t = 0; t < n; ++t) {
    s.timestamps.push_back(testing::hourly(t));
    s.covariates(t, 0) = u(gen);
    s.covariates(t, 1) = u(gen);
  }
  s.values.push_back(0.5);
  for (std::size_t t = 1; t < n; ++t) s.values.push_back(s.covariates(t - 1, 0));
  return s;
}

struct Fitted {
  TrainedPipeline fit;
  std::vector<std::size_t> train_starts, test_starts;
  ImportanceInputs inputs() const {
    return {fit.ensemble, fit.data.scaled, train_starts, test_starts};
  }
};

Fitted fit_copy_model() {
  const TimeSeries s = copy_of_a(700, 3);
  const FeatureBuilder b(covariates_only(), s.covariate_names);
  PipelineConfig cfg;
  cfg.features = covariates_only();
  cfg.shape.units = 6;
  cfg.shape.seq_len = 4;
  cfg.shape.dropout = 0.0;
  cfg.train.epochs = 60;
  cfg.train.batch_size = 32;
  cfg.train.lr = 0.01;
  cfg.residual_train = cfg.train;
  cfg.residual_train.epochs = 2;
  cfg.n_boot = 3;
  cfg.train_fraction = 0.7;
  cfg.seed = 11;
  cfg.workers = 1;
  Fitted f{fit_pipeline(s, b, cfg), {}, {}};
  f.train_starts = f.fit.train_batch.window_start;
  f.test_starts = f.fit.test_batch.window_start;
  return f;
}

const Fitted& copy_model() {
  static const Fitted f = fit_copy_model();
  return f;
}

FeatureFrame small_frame() {
  FeatureFrame f;
  f.features = {{"x", FeatureKind::Covariate, 0, "x"}, {"z", FeatureKind::Covariate, 0, "z"}};
  f.columns = Matrix(20, 2);
  for (std::size_t t = 0; t < 20; ++t) {
    f.columns(t, 0) = static_cast<double>(t);
    f.columns(t, 1) = 100.0 + 0.5 * static_cast<double>(t);
    f.target.push_back(static_cast<double>(t));
    f.timestamps.push_back(testing::hourly(t));
  }
  return f;
}

}  // namespace

TEST_CASE("permutation preserves the multiset and leaves other columns alone") {
  const FeatureFrame f = small_frame();
  Rng rng(5);
  const FeatureFrame p = permute_feature(f, "x", {4, 16}, rng);
  std::vector<double> before, after;
  for (std::size_t t = 4; t < 16; ++t) {
    before.push_back(f.columns(t, 0));
    after.push_back(p.columns(t, 0));
  }
  CHECK(before != after);
  std::sort(after.begin(), after.end());
  CHECK(before == after);
  for (std::size_t t = 0; t < 20; ++t) {
    CHECK(p.columns(t, 1) == f.columns(t, 1));
    CHECK(p.target[t] == f.target[t]);
    if (t < 4 || t >= 16) CHECK(p.columns(t, 0) == f.columns(t, 0));
  }
}

TEST_CASE("permutation is reproducible from the seed") {
  const FeatureFrame f = small_frame();
  Rng r1(9), r2(9), r3(10);
  const FeatureFrame a = permute_feature(f, "z", {0, 20}, r1);
  const FeatureFrame b = permute_feature(f, "z", {0, 20}, r2);
  const FeatureFrame c = permute_feature(f, "z", {0, 20}, r3);
  bool differs = false;
  for (std::size_t t = 0; t < 20; ++t) {
    CHECK(a.columns(t, 1) == b.columns(t, 1));
    differs = differs || a.columns(t, 1) != c.columns(t, 1);
  }
  CHECK(differs);
}

TEST_CASE("permutation rejects unknown features and bad ranges") {
  const FeatureFrame f = small_frame();
  Rng rng(1);
  CHECK_THROWS_AS(permute_feature(f, "nope", {0, 5}, rng), DataError);
  CHECK_THROWS_AS(permute_feature(f, "x", {0, 21}, rng), DataError);
}

TEST_CASE("copy of a feature: permuting it destroys accuracy") {
  const Fitted& m = copy_model();
  const SetAccuracy base = evaluate_set(m.fit.ensemble, m.fit.data.scaled, m.test_starts, EvalSet::Test);
  REQUIRE(base.r2 > 0.95);
  const auto r2 = importance_scores(m.inputs(), AccuracyMetric::R2, EvalSet::Test, 3, 7, 1);
  const std::size_t a = m.fit.data.scaled.index_of("a");
  const std::size_t b = m.fit.data.scaled.index_of("b");
  // An exact copy permuted against itself leaves R^2 near -1, so the drop is
  // at least 1.
  CHECK(r2[a] > 0.9);
  CHECK(std::fabs(r2[b]) < 0.1);
  const auto mda = importance_scores(m.inputs(), AccuracyMetric::Mda, EvalSet::Validation, 3, 7, 1);
  CHECK(mda[a] > 0.2);
  CHECK(mda[a] > mda[b]);
}

TEST_CASE("a feature with zeroed input weights scores exactly zero") {
  const Fitted& m = copy_model();
  EnsembleModel ens = m.fit.ensemble;
  const std::size_t b = m.fit.data.scaled.index_of("b");
  for (auto& member : ens.members) {
    for (std::size_t g = 0; g < member.gates(); ++g) {
      for (std::size_t u = 0; u < member.w(g).rows(); ++u) member.w(g)(u, b) = 0.0;
    }
  }
  const ImportanceInputs in{ens, m.fit.data.scaled, m.train_starts, m.test_starts};
  const RawImportance raw = permutation_importance(in, 2, 3, 1);
  for (std::size_t s = 0; s < 4; ++s) CHECK(raw.scores[s][b] == 0.0);
}

TEST_CASE("importance is deterministic across reruns and worker counts") {
  const Fitted& m = copy_model();
  const RawImportance one = permutation_importance(m.inputs(), 1, 21, 1);
  const RawImportance again = permutation_importance(m.inputs(), 1, 21, 1);
  const RawImportance two = permutation_importance(m.inputs(), 1, 21, 2);
  CHECK(one.features == std::vector<std::string>{"a", "b"});
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(one.scores[s] == again.scores[s]);
    CHECK(one.scores[s] == two.scores[s]);
  }
}

TEST_CASE("grouping takes the max and normalises clipped means") {
  RawImportance raw;
  raw.features = {"a", "b", "c"};
  raw.scores = {std::vector<double>{0.2, 0.5, -0.1}, {0.1, 0.3, -0.2}, {0.0, 0.1, 0.4}, {0.4, 0.0, -0.3}};
  const FeatureGroups groups{{"ab", {"a", "b"}}, {"c", {"c"}}};
  const ImportanceReport r = group_and_summarize(raw, groups);
  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[0].scores == std::array<double, 4>{0.5, 0.3, 0.1, 0.4});
  CHECK(r.summary[0].mean == Approx(1.3 / 4));
  CHECK(r.summary[1].mean == Approx(-0.2 / 4));
  CHECK(r.summary[0].normalized == 1.0);
  CHECK(r.summary[1].normalized == 0.0);
  // detailed rows keep negative scores
  CHECK(r.detailed[2].scores[0] == -0.1);
  double total = 0.0;
  for (const auto& row : r.detailed) total += row.normalized;
  CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("singleton groups reproduce the detailed rows") {
  RawImportance raw;
  raw.features = {"p", "q", "r", "s"};
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(-0.2, 1.0);
  for (auto& col : raw.scores) {
    for (std::size_t i = 0; i < 4; ++i) col.push_back(u(gen));
  }
  FeatureGroups g;
  for (const auto& f : raw.features) g.push_back({f, {f}});
  const ImportanceReport r = group_and_summarize(raw, g);
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(r.summary[i].name == r.detailed[i].name);
    CHECK(r.summary[i].scores == r.detailed[i].scores);
    CHECK(r.summary[i].normalized == r.detailed[i].normalized);
    total += r.summary[i].normalized;
  }
  CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("grouping errors") {
  RawImportance raw;
  raw.features = {"a", "b"};
  raw.scores = {std::vector<double>{1, 2}, {1, 2}, {1, 2}, {1, 2}};
  CHECK_THROWS_AS(group_and_summarize(raw, {{"a", {"a"}}}), ConfigError);
  CHECK_THROWS_AS(group_and_summarize(raw, {{"a", {"a", "b"}}, {"b", {"b"}}}), ConfigError);
  CHECK_THROWS_AS(group_and_summarize(raw, {{"a", {"a", "b", "c"}}}), ConfigError);
  CHECK_THROWS_AS(group_and_summarize(raw, {{"a", {"a", "b"}}, {"none", {}}}), ConfigError);
}

TEST_CASE("groups follow the builder's group keys") {
  const FeatureBuilder b(testing::short_series_features(), {});
  const FeatureGroups g = groups_from_features(b.features());
  REQUIRE(!g.empty());
  CHECK(g[0].first == "recent_lags");
  CHECK(g[0].second == std::vector<std::string>{"lag_1", "lag_2"});
  std::size_t total = 0;
  for (const auto& [name, members] : g) total += members.size();
  CHECK(total == b.size());
  const auto hour = std::find_if(g.begin(), g.end(), [](const auto& x) { return x.first == "hour"; });
  REQUIRE(hour != g.end());
  CHECK(hour->second.size() == 2);
}

TEST_CASE("all-negative scores normalise to zero, and csv/json agree") {
  RawImportance raw;
  raw.features = {"a"};
  raw.scores = {std::vector<double>{-1}, {-1}, {-1}, {-1}};
  const ImportanceReport r = group_and_summarize(raw, {{"a", {"a"}}});
  CHECK(r.summary[0].normalized == 0.0);
  const auto dir = testing::scratch_dir("importance_csv");
  write_importance_csv(dir / "s.csv", r.summary, "group");
  CHECK(testing::read_file(dir / "s.csv") == "group,r-v,r-t,c-v,c-t,mean,normalized\na,-1,-1,-1,-1,-1,0\n");
  const auto j = to_json(r);
  CHECK(j["summary"][0]["name"] == "a");
  CHECK(j["summary"][0]["c-t"] == -1.0);
  CHECK(j["detailed"].size() == 1);
}
