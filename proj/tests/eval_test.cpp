#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tte/eval.hpp"
#include "tte/synth.hpp"

using namespace tte;
using namespace tte::eval;

namespace {

std::vector<corpus::LabeledTweet> synthetic(int events, int per_event, std::uint64_t seed) {
  synth::SynthSpec spec;
  spec.events = events;
  spec.tweets_per_event = per_event;
  spec.seed = seed;
  const auto c = synth::synthesize(spec);
  return corpus::label_and_window(c.tweets, c.events).labeled;
}

estimator::Estimate est(std::optional<double> final, double actual) {
  estimator::Estimate e;
  e.final_hours = final;
  e.raw_hours = final;
  e.actual_hours = actual;
  e.source = final ? estimator::Source::Word : estimator::Source::None;
  return e;
}

const pipeline::Resources &resources() {
  static const auto res = pipeline::load_resources({});
  return res;
}

}  // namespace

TEST(Metrics, WorkedExamples) {
  const std::vector<double> p{2, 4}, a{1, 1};
  EXPECT_DOUBLE_EQ(mae(p, a), 2.0);
  EXPECT_DOUBLE_EQ(rmse(p, a), std::sqrt(5.0));
  EXPECT_EQ(mae(std::vector<double>{3}, std::vector<double>{3}), 0.0);
  EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(rmse(std::vector<double>{1}, std::vector<double>{}), std::invalid_argument);
}

TEST(Metrics, EstimatesSkipUncovered) {
  const std::vector<estimator::Estimate> es{est(5, 3), est(std::nullopt, 100), est(1, 2), est(std::nullopt, 0)};
  EXPECT_DOUBLE_EQ(mae(es), 1.5);
  EXPECT_DOUBLE_EQ(coverage(es), 0.5);
  EXPECT_DOUBLE_EQ(coverage({est(std::nullopt, 1)}), 0.0);
  EXPECT_THROW(coverage({}), std::invalid_argument);
  const auto m = summarize({5.0, std::nullopt, 1.0, std::nullopt}, {3, 100, 2, 0});
  EXPECT_EQ(m.total, 4u);
  EXPECT_EQ(m.estimated, 2u);
  EXPECT_DOUBLE_EQ(*m.mae, 1.5);
  const auto none = summarize({std::nullopt}, {1});
  EXPECT_FALSE(none.mae);
  EXPECT_TRUE(to_json(none)["mae"].is_null());
}

TEST(Metrics, AgreeWithReferenceAndOrdering) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 192);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + rng() % 50;
    std::vector<double> p(n), a(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = u(rng);
      a[i] = u(rng);
    }
    const double m = mae(p, a), r = rmse(p, a);
    EXPECT_NEAR(m, oracle::mae(p, a), 1e-9);
    EXPECT_NEAR(r, oracle::rmse(p, a), 1e-9);
    EXPECT_LE(m, r + 1e-12);
  }
}

TEST(Breakdowns, RangeBins) {
  EXPECT_EQ(range_bins()[range_bin_index(0.5)].label, "0");
  EXPECT_EQ(range_bins()[range_bin_index(1.0)].label, "1-4");
  EXPECT_EQ(range_bins()[range_bin_index(4.99)].label, "1-4");
  EXPECT_EQ(range_bins()[range_bin_index(24.5)].label, "13-24");
  EXPECT_EQ(range_bins()[range_bin_index(150)].label, ">144");
  const auto rows = range_table(std::vector<double>{1, 3, 160}, std::vector<double>{0.5, 2, 150});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].label, "0");
  EXPECT_DOUBLE_EQ(rows[0].mae, 0.5);
  EXPECT_EQ(rows[2].label, ">144");
  EXPECT_DOUBLE_EQ(rows[2].mae, 10.0);
}

TEST(Breakdowns, HourlyCurve) {
  const auto c = hourly_curve(std::vector<double>{1, 3, 10}, std::vector<double>{0, 2, 9}, 4.0);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], std::make_pair(2.0, 1.0));
  EXPECT_EQ(c[1], std::make_pair(10.0, 1.0));
  EXPECT_THROW(hourly_curve(std::vector<double>{1}, std::vector<double>{1}, 0.0), std::invalid_argument);
}

TEST(Kde, IntegratesToOneAndIsSymmetric) {
  const std::vector<double> xs{1, 2, 3, 4, 5};
  std::vector<double> grid;
  for (double x = -20; x <= 26; x += 0.01) grid.push_back(x);
  const auto d = kde(xs, grid);
  double integral = 0;
  for (double v : d) integral += v * 0.01;
  EXPECT_NEAR(integral, 1.0, 0.01);
  const auto sym = kde(xs, std::vector<double>{3 - 1.7, 3 + 1.7});
  EXPECT_NEAR(sym[0], sym[1], 1e-12);
  const double sd = std::sqrt(2.5);
  EXPECT_NEAR(silverman_bandwidth(xs), 1.06 * sd * std::pow(5.0, -0.2), 1e-12);
  EXPECT_THROW(kde(std::vector<double>{2, 2, 2}, grid), std::invalid_argument);
  EXPECT_THROW(kde(std::vector<double>{2}, grid), std::invalid_argument);
}

TEST(Report, TsvFromJson) {
  EvalReport r;
  r.event_ids = {"a"};
  TweetRecord t;
  t.event_id = "a";
  t.actual_hours = 2;
  t.final[RFeats] = 3;
  t.final[MeanBaseline] = 5;
  r.records.push_back(t);
  const auto tsv = to_tsv(r);
  std::istringstream in(tsv);
  std::string header, rmse_row, mae_row, cov_row;
  std::getline(in, header);
  std::getline(in, rmse_row);
  std::getline(in, mae_row);
  std::getline(in, cov_row);
  EXPECT_EQ(header, "\tRFeats\tTFeats\tWFeats\tAll\tMean Baseline\tMedian Baseline");
  EXPECT_EQ(rmse_row, "RMSE\t1.00\tNA\tNA\tNA\t3.00\tNA");
  EXPECT_EQ(cov_row, "Coverage\t1.00\t0.00\t0.00\t0.00\t1.00\t0.00");
  EXPECT_THROW(tsv_from_json(nlohmann::json::object()), DataError);
}

TEST(Loeo, FoldsPartitionTheCorpus) {
  const auto tweets = synthetic(3, 80, 5);
  config::PipelineConfig cfg;
  cfg.workers = 2;
  std::vector<std::string> held;
  LoeoOptions opts;
  const auto prepared = prepare(tweets, features::FeatureExtractor(resources().patterns, resources().words, 2));
  std::vector<std::size_t> event_of;
  for (std::size_t e = 0; e < prepared.events.size(); ++e)
    for (std::size_t i = 0; i < prepared.events[e].size(); ++i) event_of.push_back(e);
  opts.observer = [&](std::size_t fold, const std::string &id, const std::vector<std::size_t> &contrib) {
    held.push_back(id);
    for (auto i : contrib) EXPECT_NE(event_of[i], fold);
  };
  const auto report = loeo(prepared, resources().rules, cfg, opts);
  EXPECT_EQ(report.event_ids.size(), 3u);
  EXPECT_EQ(held.size(), 3u);
  EXPECT_EQ(report.records.size(), tweets.size());
  std::set<std::string> ids;
  for (const auto &r : report.records) ids.insert(r.tweet_id);
  EXPECT_EQ(ids.size(), tweets.size());
  const auto j = to_json(report);
  EXPECT_EQ(j["events"].size(), 3u);
  EXPECT_TRUE(j["columns"].contains("RFeats"));
}

TEST(Loeo, NeedsTwoEvents) {
  const auto tweets = synthetic(1, 30, 1);
  EXPECT_THROW(loeo(tweets, resources(), {}), ConfigError);
}

TEST(Loeo, FoldTrainerMatchesDirectTraining) {
  const auto tweets = synthetic(4, 120, 9);
  const features::FeatureExtractor ex(resources().patterns, resources().words, 2);
  const auto prepared = prepare(tweets, ex);
  config::PipelineConfig cfg;
  const auto opt = pipeline::train_options(cfg);
  const FoldTrainer trainer(prepared, opt);
  for (std::uint32_t held = 0; held < prepared.events.size(); ++held) {
    std::vector<features::TrainingTweet> training;
    for (std::size_t e = 0; e < prepared.events.size(); ++e) {
      if (e == held) continue;
      for (std::size_t i = 0; i < prepared.events[e].size(); ++i)
        training.push_back(pipeline::training_tweet(prepared.events[e][i].tte_hours, prepared.feats[e][i]));
    }
    const auto direct = features::train(training, opt);
    const auto fast = trainer.train(held);
    ASSERT_EQ(direct.values.size(), fast.values.size());
    for (const auto &[k, v] : direct.values) {
      const auto *f = fast.find(k);
      ASSERT_TRUE(f) << k.surface;
      EXPECT_EQ(f->value, v.value);
      EXPECT_EQ(f->support, v.support);
    }
  }
}

TEST(Loeo, DeterministicAcrossWorkerCounts) {
  const auto tweets = synthetic(5, 60, 3);
  config::PipelineConfig one, many;
  one.workers = 1;
  many.workers = 4;
  auto a = to_json(loeo(tweets, resources(), one));
  auto b = to_json(loeo(tweets, resources(), many));
  a.erase("config");
  b.erase("config");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Loeo, RuleColumnTracksExactCarriers) {
  const auto tweets = synthetic(6, 100, 2);
  const auto report = loeo(tweets, resources(), {});
  const auto raw = report.metrics(RFeats, true);
  ASSERT_TRUE(raw.mae);
  EXPECT_LE(*raw.mae, 0.51);
  for (const auto &r : report.records)
    if (r.raw[RFeats]) {
      EXPECT_EQ(r.source, estimator::Source::Rule);
    }
  const auto macro = report.macro(All);
  EXPECT_TRUE(macro.mae);
}

TEST(Transfer, TrainsOnOneSetEvaluatesAnother) {
  const auto train = synthetic(3, 80, 11);
  const auto test = synthetic(2, 50, 12);
  const auto r = transfer(train, test, resources(), {});
  EXPECT_EQ(r.mode, "transfer");
  EXPECT_EQ(r.records.size(), test.size());
  EXPECT_THROW(transfer({}, test, resources(), {}), ConfigError);
}

TEST(Regressors, LoeoProducesAllColumns) {
  synth::SynthSpec spec;
  spec.events = 3;
  spec.tweets_per_event = 150;
  spec.seed = 4;
  const auto c = synth::synthesize(spec);
  const auto tweets = corpus::label_and_window(c.tweets, c.events).labeled;
  config::PipelineConfig cfg;
  cfg.prune_min_count = 5;
  const auto s = evaluate_regressors(tweets, corpus::index_events(c.events), {}, cfg);
  for (const char *col : {"linear", "local", "time_series", "mean_baseline", "median_baseline"})
    ASSERT_TRUE(s.columns.count(col)) << col;
  EXPECT_DOUBLE_EQ(s.columns.at("mean_baseline").coverage, 1.0);
  EXPECT_TRUE(s.columns.at("local").mae);
}
