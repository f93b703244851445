#pragma once

// Evaluation: error metrics, leave-one-event-out cross-validation, model
// transfer, per-range and per-hour breakdowns, KDE, and report output.

#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tte/config.hpp"
#include "tte/corpus.hpp"
#include "tte/errors.hpp"
#include "tte/estimator.hpp"
#include "tte/features.hpp"
#include "tte/pipeline.hpp"
#include "tte/regressors.hpp"
#include "tte/stats.hpp"

namespace tte::eval {

// ---------------------------------------------------------------------------
// Metrics.

inline double mae(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("mae: size mismatch");
  if (predicted.empty()) throw std::invalid_argument("mae of empty estimate set");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
  return sum / static_cast<double>(predicted.size());
}

inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("rmse: size mismatch");
  if (predicted.empty()) throw std::invalid_argument("rmse of empty estimate set");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

namespace detail {
inline void estimated_pairs(const std::vector<estimator::Estimate> &es, std::vector<double> &p,
                            std::vector<double> &a) {
  for (const auto &e : es) {
    if (!e.estimated()) continue;
    p.push_back(*e.final_hours);
    a.push_back(e.actual_hours);
  }
}
}  // namespace detail

// Over estimated tweets only.
inline double mae(const std::vector<estimator::Estimate> &es) {
  std::vector<double> p, a;
  detail::estimated_pairs(es, p, a);
  return mae(p, a);
}

inline double rmse(const std::vector<estimator::Estimate> &es) {
  std::vector<double> p, a;
  detail::estimated_pairs(es, p, a);
  return rmse(p, a);
}

inline double coverage(const std::vector<estimator::Estimate> &es) {
  if (es.empty()) throw std::invalid_argument("coverage of empty tweet set");
  std::size_t n = 0;
  for (const auto &e : es) n += e.estimated();
  return static_cast<double>(n) / static_cast<double>(es.size());
}

struct Metrics {
  std::size_t total = 0;
  std::size_t estimated = 0;
  std::optional<double> mae;
  std::optional<double> rmse;
  double coverage = 0.0;
};

// `predicted[i]` empty means tweet i was not estimated.
inline Metrics summarize(const std::vector<std::optional<double>> &predicted,
                         const std::vector<double> &actual) {
  Metrics m;
  m.total = predicted.size();
  std::vector<double> p, a;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!predicted[i]) continue;
    p.push_back(*predicted[i]);
    a.push_back(actual[i]);
  }
  m.estimated = p.size();
  if (!p.empty()) {
    m.mae = mae(p, a);
    m.rmse = rmse(p, a);
  }
  m.coverage = m.total ? static_cast<double>(m.estimated) / static_cast<double>(m.total) : 0.0;
  return m;
}

inline nlohmann::json to_json(const Metrics &m) {
  nlohmann::json j{{"total", m.total}, {"estimated", m.estimated}, {"coverage", m.coverage},
                   {"mae", nullptr}, {"rmse", nullptr}};
  if (m.mae) j["mae"] = *m.mae;
  if (m.rmse) j["rmse"] = *m.rmse;
  return j;
}

// ---------------------------------------------------------------------------
// Breakdowns.

struct RangeBin {
  std::string label;
  int lo;  // inclusive floor(actual) bounds
  int hi;  // -1: unbounded
};

inline const std::array<RangeBin, 9> &range_bins() {
  static const std::array<RangeBin, 9> bins{{{"0", 0, 0},
                                             {"1-4", 1, 4},
                                             {"5-8", 5, 8},
                                             {"9-12", 9, 12},
                                             {"13-24", 13, 24},
                                             {"25-48", 25, 48},
                                             {"49-96", 49, 96},
                                             {"97-144", 97, 144},
                                             {">144", 145, -1}}};
  return bins;
}

inline std::size_t range_bin_index(double actual_hours) {
  const double f = std::floor(actual_hours);
  const auto &bins = range_bins();
  for (std::size_t i = 0; i + 1 < bins.size(); ++i)
    if (f <= bins[i].hi) return i;
  return bins.size() - 1;
}

struct RangeRow {
  std::string label;
  std::size_t count = 0;
  double mae = 0.0;
};

// MAE per actual-TTE range over (predicted, actual) pairs; empty bins are
// omitted.
inline std::vector<RangeRow> range_table(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw std::invalid_argument("range_table: size mismatch");
  std::array<double, 9> sum{};
  std::array<std::size_t, 9> count{};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto b = range_bin_index(actual[i]);
    sum[b] += std::abs(predicted[i] - actual[i]);
    ++count[b];
  }
  std::vector<RangeRow> out;
  for (std::size_t b = 0; b < 9; ++b)
    if (count[b]) out.push_back({range_bins()[b].label, count[b], sum[b] / static_cast<double>(count[b])});
  return out;
}

inline std::vector<RangeRow> range_table(const std::vector<estimator::Estimate> &es) {
  std::vector<double> p, a;
  detail::estimated_pairs(es, p, a);
  return range_table(p, a);
}

// (bin center, MAE) for each populated bin of actual TTE.
inline std::vector<std::pair<double, double>> hourly_curve(std::span<const double> predicted,
                                                           std::span<const double> actual,
                                                           double bin_hours = 4.0) {
  if (!(bin_hours > 0.0)) throw std::invalid_argument("bin_hours must be > 0");
  if (predicted.size() != actual.size()) throw std::invalid_argument("hourly_curve: size mismatch");
  std::map<long long, std::pair<double, std::size_t>> bins;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    auto &b = bins[static_cast<long long>(std::floor(actual[i] / bin_hours))];
    b.first += std::abs(predicted[i] - actual[i]);
    ++b.second;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto &[idx, b] : bins)
    out.emplace_back((static_cast<double>(idx) + 0.5) * bin_hours, b.first / static_cast<double>(b.second));
  return out;
}

inline std::vector<std::pair<double, double>> hourly_curve(const std::vector<estimator::Estimate> &es,
                                                           double bin_hours = 4.0) {
  std::vector<double> p, a;
  detail::estimated_pairs(es, p, a);
  return hourly_curve(p, a, bin_hours);
}

inline double silverman_bandwidth(std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("kde needs at least two values");
  const double sd = stats::sample_stddev(series);
  if (!(sd > 0.0)) throw std::invalid_argument("kde of a zero-variance series is a degenerate spike");
  return 1.06 * sd * std::pow(static_cast<double>(series.size()), -0.2);
}

// Gaussian kernel density at each grid point.
inline std::vector<double> kde(std::span<const double> series, std::span<const double> grid) {
  const double h = silverman_bandwidth(series);
  const double norm = 1.0 / (static_cast<double>(series.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out;
  out.reserve(grid.size());
  for (double x : grid) {
    double s = 0.0;
    for (double xi : series) {
      const double u = (x - xi) / h;
      s += std::exp(-0.5 * u * u);
    }
    out.push_back(s * norm);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-tweet evaluation records and the report.

enum Column { RFeats, TFeats, WFeats, All, MeanBaseline, MedianBaseline, kColumnCount };

inline constexpr std::array<const char *, kColumnCount> kColumnNames{
    "RFeats", "TFeats", "WFeats", "All", "Mean Baseline", "Median Baseline"};

struct TweetRecord {
  std::string tweet_id;
  std::string event_id;
  double actual_hours = 0.0;
  corpus::HashtagPosition position = corpus::HashtagPosition::Absent;
  estimator::Source source = estimator::Source::None;  // of the combined estimate
  std::array<std::optional<double>, kColumnCount> raw;
  std::array<std::optional<double>, kColumnCount> final;
};

struct EvalReport {
  nlohmann::json config = nlohmann::json::object();
  std::string mode = "loeo";
  std::vector<std::string> event_ids;  // in fold order
  std::vector<TweetRecord> records;    // grouped by event, posting order
  double hourly_bin_hours = 4.0;

  Metrics metrics(Column c, bool raw = false,
                  const std::function<bool(const TweetRecord &)> &keep = {}) const {
    std::vector<std::optional<double>> p;
    std::vector<double> a;
    for (const auto &r : records) {
      if (keep && !keep(r)) continue;
      p.push_back(raw ? r.raw[c] : r.final[c]);
      a.push_back(r.actual_hours);
    }
    return summarize(p, a);
  }

  Metrics event_metrics(Column c, const std::string &event_id) const {
    return metrics(c, false, [&](const TweetRecord &r) { return r.event_id == event_id; });
  }

  // Unweighted mean of per-event values; events without estimates are skipped.
  Metrics macro(Column c) const {
    Metrics m;
    std::vector<double> maes, rmses, covs;
    for (const auto &id : event_ids) {
      const Metrics e = event_metrics(c, id);
      if (e.total == 0) continue;
      m.total += e.total;
      m.estimated += e.estimated;
      covs.push_back(e.coverage);
      if (e.mae) maes.push_back(*e.mae);
      if (e.rmse) rmses.push_back(*e.rmse);
    }
    if (!maes.empty()) m.mae = stats::mean(maes);
    if (!rmses.empty()) m.rmse = stats::mean(rmses);
    if (!covs.empty()) m.coverage = stats::mean(covs);
    return m;
  }

  std::pair<std::vector<double>, std::vector<double>> pairs(Column c) const {
    std::vector<double> p, a;
    for (const auto &r : records) {
      if (!r.final[c]) continue;
      p.push_back(*r.final[c]);
      a.push_back(r.actual_hours);
    }
    return {p, a};
  }
};

inline nlohmann::json to_json(const EvalReport &r) {
  using nlohmann::json;
  json columns = json::object(), ranges = json::object(), curves = json::object();
  for (int c = 0; c < kColumnCount; ++c) {
    const auto col = static_cast<Column>(c);
    columns[kColumnNames[c]] = {{"micro", to_json(r.metrics(col))},
                                {"raw", to_json(r.metrics(col, true))},
                                {"macro", to_json(r.macro(col))}};
    auto [p, a] = r.pairs(col);
    json rows = json::array();
    for (const auto &row : range_table(p, a))
      rows.push_back({{"range", row.label}, {"count", row.count}, {"mae", row.mae}});
    ranges[kColumnNames[c]] = rows;
    json curve = json::array();
    for (const auto &[x, y] : hourly_curve(p, a, r.hourly_bin_hours)) curve.push_back({x, y});
    curves[kColumnNames[c]] = curve;
  }
  json events = json::array();
  for (const auto &id : r.event_ids) {
    json cols = json::object();
    for (int c = 0; c < kColumnCount; ++c)
      cols[kColumnNames[c]] = to_json(r.event_metrics(static_cast<Column>(c), id));
    events.push_back({{"event_id", id}, {"columns", cols}});
  }
  json positions = json::object();
  for (auto pos : {corpus::HashtagPosition::Final, corpus::HashtagPosition::NonFinal}) {
    json cols = json::object();
    for (int c = 0; c < kColumnCount; ++c)
      cols[kColumnNames[c]] = to_json(r.metrics(static_cast<Column>(c), false,
                                                [pos](const TweetRecord &t) { return t.position == pos; }));
    positions[std::string(corpus::to_string(pos))] = cols;
  }
  return {{"mode", r.mode},
          {"config", r.config},
          {"columns", columns},
          {"events", events},
          {"hashtag_position", positions},
          {"range_table", ranges},
          {"hourly_curve", {{"bin_hours", r.hourly_bin_hours}, {"columns", curves}}}};
}

inline std::string format_cell(const nlohmann::json &v) {
  if (v.is_null()) return "NA";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v.get<double>();
  return os.str();
}

// Tab-separated summary: one column per feature set, rows RMSE, MAE and
// Coverage (micro averaged), then the macro rows.
inline std::string tsv_from_json(const nlohmann::json &report) {
  std::ostringstream os;
  try {
    const auto &cols = report.at("columns");
    for (const char *name : kColumnNames) os << '\t' << name;
    os << '\n';
    const std::array<std::pair<const char *, std::pair<const char *, const char *>>, 5> rows{{
        {"RMSE", {"micro", "rmse"}},
        {"MAE", {"micro", "mae"}},
        {"Coverage", {"micro", "coverage"}},
        {"RMSE (macro)", {"macro", "rmse"}},
        {"MAE (macro)", {"macro", "mae"}},
    }};
    for (const auto &[label, path] : rows) {
      os << label;
      for (const char *name : kColumnNames) os << '\t' << format_cell(cols.at(name).at(path.first).at(path.second));
      os << '\n';
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  return os.str();
}

inline std::string to_tsv(const EvalReport &r) { return tsv_from_json(to_json(r)); }

// ---------------------------------------------------------------------------
// Leave-one-event-out.

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn &&fn) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto &th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// All tweets of a dataset with features extracted once, grouped by event.
struct PreparedCorpus {
  std::vector<std::vector<corpus::LabeledTweet>> events;   // posting order
  std::vector<std::vector<features::TweetFeatures>> feats;  // parallel to events
  std::vector<double> training_ttes;                        // flat, event-major

  std::size_t tweet_count() const { return training_ttes.size(); }
};

inline PreparedCorpus prepare(const std::vector<corpus::LabeledTweet> &tweets,
                              const features::FeatureExtractor &extractor) {
  PreparedCorpus p;
  p.events = corpus::group_by_event(tweets);
  for (const auto &group : p.events) {
    auto &fs = p.feats.emplace_back();
    fs.reserve(group.size());
    for (const auto &t : group) {
      fs.push_back(extractor.extract(t.tweet.text));
      p.training_ttes.push_back(t.tte_hours);
    }
  }
  return p;
}

// Trains one model per held-out event without rebuilding string-keyed
// tables: every key is interned once with its occurrence list, and a fold
// filters out the held-out event's occurrences. The result equals
// features::train on the fold's training tweets in corpus order.
class FoldTrainer {
 public:
  FoldTrainer(const PreparedCorpus &corpus, features::TrainOptions options)
      : options_(std::move(options)) {
    std::unordered_map<FeatureKey, std::uint32_t, FeatureKeyHash> ids;
    std::uint32_t flat = 0;
    for (std::uint32_t e = 0; e < corpus.events.size(); ++e) {
      for (std::size_t i = 0; i < corpus.events[e].size(); ++i, ++flat) {
        const auto &f = corpus.feats[e][i];
        const double tte = corpus.events[e][i].tte_hours;
        for (const auto *family : {&f.temporal, &f.words}) {
          for (const auto &k : *family) {
            auto [it, fresh] = ids.emplace(k, static_cast<std::uint32_t>(keys_.size()));
            if (fresh) {
              keys_.push_back(k);
              occ_.emplace_back();
            }
            occ_[it->second].push_back({tte, e, flat});
          }
        }
      }
    }
  }

  struct Occurrence {
    double tte;
    std::uint32_t event;
    std::uint32_t tweet;  // flat index
  };

  // `contributors`, when given, receives the flat index of every tweet that
  // contributed an occurrence to the fold's feature table.
  features::TrainedModel train(std::uint32_t held_out, std::vector<char> *contributors = nullptr) const {
    std::array<std::vector<double>, 2> devs;  // by kind
    std::vector<double> sd(keys_.size(), -1.0);
    std::vector<double> series;
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      gather(k, held_out, series, contributors);
      if (series.size() < 2) continue;
      sd[k] = stats::population_stddev(series);
      devs[static_cast<int>(keys_[k].kind)].push_back(sd[k]);
    }
    std::array<double, 2> threshold{};
    const std::array<double, 2> q{options_.quantile_cutoff_temporal, options_.quantile_cutoff_word};
    for (int kind = 0; kind < 2; ++kind) {
      if (!(q[kind] >= 0.0 && q[kind] < 1.0)) throw std::invalid_argument("quantile cutoff must be in [0, 1)");
      if (devs[kind].empty()) continue;
      std::sort(devs[kind].begin(), devs[kind].end());
      threshold[kind] = stats::nearest_rank_quantile(devs[kind], 1.0 - q[kind]);
    }
    features::TrainedModel model;
    model.training_function = options_.training_function;
    model.estimation_function = options_.estimation_function;
    model.quantile_cutoff_word = options_.quantile_cutoff_word;
    model.quantile_cutoff_temporal = options_.quantile_cutoff_temporal;
    model.feature_length = options_.feature_length;
    model.window_size = options_.window_size;
    model.config = options_.config;
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      if (sd[k] < 0.0 || sd[k] > threshold[static_cast<int>(keys_[k].kind)]) continue;
      gather(k, held_out, series, nullptr);
      model.values.emplace(keys_[k], features::ModelEntry{stats::aggregate(series, options_.training_function),
                                                          series.size()});
    }
    return model;
  }

  std::size_t key_count() const { return keys_.size(); }

 private:
  void gather(std::size_t k, std::uint32_t held_out, std::vector<double> &series,
              std::vector<char> *contributors) const {
    series.clear();
    for (const auto &o : occ_[k]) {
      if (o.event == held_out) continue;
      series.push_back(o.tte);
      if (contributors) (*contributors)[o.tweet] = 1;
    }
  }

  features::TrainOptions options_;
  std::vector<FeatureKey> keys_;
  std::vector<std::vector<Occurrence>> occ_;
};

// Streams one event through the model: combined and single-family runs,
// each with its own history buffer, plus the constant baselines.
inline std::vector<TweetRecord> evaluate_event(const std::vector<corpus::LabeledTweet> &tweets,
                                               const std::vector<features::TweetFeatures> &feats,
                                               const rules::RuleSet &rules,
                                               const features::TrainedModel &model,
                                               const estimator::StreamOptions &options,
                                               const regressors::ConstantBaseline &baseline) {
  using estimator::FamilyMask;
  const std::array<FamilyMask, 4> masks{FamilyMask{true, false, false}, FamilyMask{false, true, false},
                                        FamilyMask{false, false, true}, FamilyMask{true, true, true}};
  estimator::StreamOptions all = options;
  all.families = {};
  const estimator::StreamEstimator scorer(rules, model, all);
  std::array<estimator::HistoryBuffer, 4> buffers;
  std::vector<TweetRecord> out;
  out.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    if (i > 0 && tweets[i].tweet.posted_at < tweets[i - 1].tweet.posted_at)
      throw std::invalid_argument("evaluate_event needs tweets in posting order");
    const auto cand = estimator::masked(scorer.candidates(tweets[i], feats[i]), options.families);
    TweetRecord r;
    r.tweet_id = tweets[i].tweet.id;
    r.event_id = tweets[i].tweet.event_id;
    r.actual_hours = tweets[i].tte_hours;
    r.position = tweets[i].hashtag_position;
    for (int c = 0; c < 4; ++c) {
      const auto e = estimator::resolve(tweets[i], estimator::masked(cand, masks[c]), buffers[c], options.window);
      r.raw[c] = e.raw_hours;
      r.final[c] = e.final_hours;
      if (c == All) r.source = e.source;
    }
    r.raw[MeanBaseline] = r.final[MeanBaseline] = baseline.mean_hours;
    r.raw[MedianBaseline] = r.final[MedianBaseline] = baseline.median_hours;
    out.push_back(std::move(r));
  }
  return out;
}

// Called once per fold with the held-out event and the flat indices of the
// tweets that contributed to the fold's feature table.
using FoldObserver = std::function<void(std::size_t fold, const std::string &held_out_event,
                                        const std::vector<std::size_t> &contributing_tweets)>;

struct LoeoOptions {
  int workers = 0;  // 0: from the config
  FoldObserver observer;
};

inline EvalReport loeo(const PreparedCorpus &corpus, const rules::RuleSet &rules,
                       const config::PipelineConfig &cfg, const LoeoOptions &opts = {}) {
  const std::size_t n_events = corpus.events.size();
  if (n_events < 2) throw ConfigError("leave-one-event-out needs at least 2 events");
  const FoldTrainer trainer(corpus, pipeline::train_options(cfg));
  const auto stream = pipeline::stream_options(cfg);

  // Offsets of each event in the flat TTE list, for baseline training sets.
  std::vector<std::size_t> offset(n_events + 1, 0);
  for (std::size_t e = 0; e < n_events; ++e) offset[e + 1] = offset[e] + corpus.events[e].size();

  std::vector<std::vector<TweetRecord>> folds(n_events);
  std::mutex observer_mutex;
  const int workers = opts.workers > 0 ? opts.workers : config::effective_workers(cfg);
  detail::parallel_for(n_events, workers, [&](std::size_t e) {
    std::vector<char> contributors;
    if (opts.observer) contributors.assign(corpus.tweet_count(), 0);
    const auto model = trainer.train(static_cast<std::uint32_t>(e), opts.observer ? &contributors : nullptr);
    std::vector<double> training_ttes;
    training_ttes.reserve(corpus.tweet_count() - corpus.events[e].size());
    training_ttes.insert(training_ttes.end(), corpus.training_ttes.begin(),
                         corpus.training_ttes.begin() + static_cast<std::ptrdiff_t>(offset[e]));
    training_ttes.insert(training_ttes.end(),
                         corpus.training_ttes.begin() + static_cast<std::ptrdiff_t>(offset[e + 1]),
                         corpus.training_ttes.end());
    const auto baseline = regressors::baseline_fit(training_ttes);
    folds[e] = evaluate_event(corpus.events[e], corpus.feats[e], rules, model, stream, baseline);
    if (opts.observer) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < contributors.size(); ++i)
        if (contributors[i]) idx.push_back(i);
      std::lock_guard lock(observer_mutex);
      opts.observer(e, corpus.events[e].front().tweet.event_id, idx);
    }
  });

  EvalReport report;
  report.config = config::to_json(cfg);
  report.hourly_bin_hours = cfg.hourly_bin_hours;
  for (std::size_t e = 0; e < n_events; ++e) {
    report.event_ids.push_back(corpus.events[e].front().tweet.event_id);
    for (auto &r : folds[e]) report.records.push_back(std::move(r));
  }
  return report;
}

inline EvalReport loeo(const std::vector<corpus::LabeledTweet> &tweets, const pipeline::Resources &res,
                       const config::PipelineConfig &cfg, const LoeoOptions &opts = {}) {
  const features::FeatureExtractor extractor(res.patterns, res.words, cfg.feature_length);
  return loeo(prepare(tweets, extractor), res.rules, cfg, opts);
}

// Trains on one dataset and evaluates on every event of another.
inline EvalReport transfer(const std::vector<corpus::LabeledTweet> &train_tweets,
                           const std::vector<corpus::LabeledTweet> &test_tweets,
                           const pipeline::Resources &res, const config::PipelineConfig &cfg) {
  if (train_tweets.empty()) throw ConfigError("transfer needs training tweets");
  if (test_tweets.empty()) throw ConfigError("transfer needs test tweets");
  const auto model = pipeline::train_model(train_tweets, res, cfg);
  std::vector<double> ttes;
  for (const auto &t : train_tweets) ttes.push_back(t.tte_hours);
  const auto baseline = regressors::baseline_fit(ttes);
  const features::FeatureExtractor extractor(res.patterns, res.words, cfg.feature_length);
  const auto test = prepare(test_tweets, extractor);
  EvalReport report;
  report.mode = "transfer";
  report.config = config::to_json(cfg);
  report.hourly_bin_hours = cfg.hourly_bin_hours;
  std::vector<std::vector<TweetRecord>> per_event(test.events.size());
  detail::parallel_for(test.events.size(), config::effective_workers(cfg), [&](std::size_t e) {
    per_event[e] = evaluate_event(test.events[e], test.feats[e], res.rules, model,
                                  pipeline::stream_options(cfg), baseline);
  });
  for (std::size_t e = 0; e < test.events.size(); ++e) {
    report.event_ids.push_back(test.events[e].front().tweet.event_id);
    for (auto &r : per_event[e]) report.records.push_back(std::move(r));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Hourly regressors under leave-one-event-out.

struct RegressorScores {
  std::map<std::string, Metrics> columns;  // linear, local, time_series, mean/median baseline
};

inline nlohmann::json to_json(const RegressorScores &s) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto &[name, m] : s.columns) j[name] = to_json(m);
  return j;
}

// Training instances come from minute-shifted windows, test instances are
// the held-out event's hour frames. A linear fit that is underdetermined
// for a fold leaves that fold's frames unestimated.
inline RegressorScores evaluate_regressors(const std::vector<corpus::LabeledTweet> &tweets,
                                           const corpus::EventIndex &events,
                                           const features::WordFilter &filter,
                                           const config::PipelineConfig &cfg) {
  namespace rg = regressors;
  const auto groups = corpus::group_by_event(tweets);
  const std::size_t n_events = groups.size();
  if (n_events < 2) throw ConfigError("leave-one-event-out needs at least 2 events");

  rg::Vocabulary vocab;
  std::vector<std::vector<rg::SparseInstance>> minute(n_events);
  std::vector<std::vector<rg::HourFrame>> frames(n_events);
  for (std::size_t e = 0; e < n_events; ++e) {
    minute[e] = rg::minute_shift_instances(groups[e], vocab, filter);
    frames[e] = rg::build_frames(groups[e], events, filter);
  }

  std::vector<std::optional<double>> linear, local, series, mean_b, median_b;
  std::vector<double> actual_frames, actual_series;
  std::vector<std::optional<double>> ts_pred;
  for (std::size_t e = 0; e < n_events; ++e) {
    std::vector<rg::SparseInstance> train;
    std::vector<double> ttes;
    std::vector<rg::HourFrame> train_frames;
    for (std::size_t o = 0; o < n_events; ++o) {
      if (o == e) continue;
      train.insert(train.end(), minute[o].begin(), minute[o].end());
      train_frames.insert(train_frames.end(), frames[o].begin(), frames[o].end());
      for (const auto &t : groups[o]) ttes.push_back(t.tte_hours);
    }
    train = rg::prune(train, cfg.prune_min_count);
    const auto baseline = rg::baseline_fit(ttes);

    std::optional<rg::OlsModel> ols;
    try {
      ols = rg::ols_fit(train);
    } catch (const std::invalid_argument &) {
    }
    std::vector<rg::SparseInstance> binary = train;
    for (auto &inst : binary)
      for (auto &f : inst.features) f.second = 1.0;
    const rg::KnnRegressor knn(binary, rg::ig_weights(binary), cfg.knn_k);

    for (const auto &f : frames[e]) {
      const auto inst = rg::frame_instance(f, vocab);
      actual_frames.push_back(f.tte_hours);
      linear.push_back(ols ? std::optional(ols->predict(inst)) : std::nullopt);
      local.push_back(f.tweet_count ? std::optional(knn.predict(inst)) : std::nullopt);
      mean_b.push_back(baseline.mean_hours);
      median_b.push_back(baseline.median_hours);
    }

    const auto ts_vocab = rg::ts_vocabulary(train_frames, static_cast<std::size_t>(cfg.ts_vocabulary_size));
    std::vector<rg::FrameSequence> train_seq;
    for (std::size_t o = 0; o < n_events; ++o) {
      if (o == e) continue;
      auto s = rg::build_sequences(frames[o], ts_vocab, cfg.ts_sequence_length);
      train_seq.insert(train_seq.end(), s.begin(), s.end());
    }
    for (const auto &q : rg::build_sequences(frames[e], ts_vocab, cfg.ts_sequence_length)) {
      actual_series.push_back(q.tte_hours);
      ts_pred.push_back(train_seq.empty() ? std::nullopt : std::optional(rg::ts_knn_predict(q, train_seq)));
    }
  }
  RegressorScores s;
  s.columns["linear"] = summarize(linear, actual_frames);
  s.columns["local"] = summarize(local, actual_frames);
  s.columns["time_series"] = summarize(ts_pred, actual_series);
  s.columns["mean_baseline"] = summarize(mean_b, actual_frames);
  s.columns["median_baseline"] = summarize(median_b, actual_frames);
  return s;
}

}  // namespace tte::eval
