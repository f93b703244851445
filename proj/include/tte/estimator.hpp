#pragma once

// Per-tweet time-to-event estimation: three feature families combined by
// priority (rules, temporal expressions, words), then adjusted by a
// priority-aware history window over the event's earlier estimates.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tte/corpus.hpp"
#include "tte/features.hpp"
#include "tte/rules.hpp"
#include "tte/stats.hpp"

namespace tte::estimator {

enum class Source { Rule, Temporal, Word, None };

inline std::string_view to_string(Source s) {
  switch (s) {
    case Source::Rule: return "RULE";
    case Source::Temporal: return "TEMPORAL";
    case Source::Word: return "WORD";
    case Source::None: return "NONE";
  }
  return "NONE";
}

struct Estimate {
  std::string tweet_id;
  std::string event_id;
  Source source = Source::None;
  std::optional<double> raw_hours;
  std::optional<double> final_hours;
  double actual_hours = 0.0;

  bool estimated() const { return final_hours.has_value(); }
};

inline nlohmann::json to_json(const Estimate &e) {
  nlohmann::json j{{"tweet_id", e.tweet_id},
                   {"source", to_string(e.source)},
                   {"raw", nullptr},
                   {"final", nullptr},
                   {"actual", e.actual_hours},
                   {"error", nullptr}};
  if (e.raw_hours) j["raw"] = *e.raw_hours;
  if (e.final_hours) {
    j["final"] = *e.final_hours;
    j["error"] = std::abs(*e.final_hours - e.actual_hours);
  }
  return j;
}

// Applies `fn` to the model values of the keys the model knows.
inline std::optional<double> estimate_features(const std::vector<FeatureKey> &keys,
                                               const features::TrainedModel &model,
                                               Aggregate fn) {
  std::vector<double> values;
  for (const auto &k : keys)
    if (const auto *entry = model.find(k)) values.push_back(entry->value);
  if (values.empty()) return std::nullopt;
  return stats::aggregate(values, fn);
}

// First present value in the order RULE, TEMPORAL, WORD.
inline std::pair<Source, std::optional<double>> combine(std::optional<double> rule,
                                                        std::optional<double> temporal,
                                                        std::optional<double> word) {
  if (rule) return {Source::Rule, rule};
  if (temporal) return {Source::Temporal, temporal};
  if (word) return {Source::Word, word};
  return {Source::None, std::nullopt};
}

// Whether an earlier estimate from `past` may inform an estimate from
// `current`: rules see rules, temporal sees rules and temporal, words see all.
inline bool history_visible(Source current, Source past) {
  switch (current) {
    case Source::Rule: return past == Source::Rule;
    case Source::Temporal: return past == Source::Rule || past == Source::Temporal;
    case Source::Word: return past != Source::None;
    case Source::None: return false;
  }
  return false;
}

// Raw (pre-history) estimates of one event in posting order.
class HistoryBuffer {
 public:
  void push(Source source, double raw) {
    if (source != Source::None) entries_.emplace_back(source, raw);
  }
  const std::vector<std::pair<Source, double>> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<Source, double>> entries_;
};

// Median of the last W-1 visible raws plus `raw`. W <= 1 or nothing visible
// leaves `raw` unchanged.
inline double apply_history(const HistoryBuffer &buffer, Source source, double raw, int window) {
  if (window <= 1) return raw;
  std::vector<double> values;
  const auto &entries = buffer.entries();
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (values.size() + 1 >= static_cast<std::size_t>(window)) break;
    if (history_visible(source, it->first)) values.push_back(it->second);
  }
  if (values.empty()) return raw;
  values.push_back(raw);
  return stats::median(std::move(values));
}

struct FamilyMask {
  bool rule = true;
  bool temporal = true;
  bool word = true;
};

struct StreamOptions {
  int window = 15;
  Aggregate estimation_function = Aggregate::Median;
  bool clamp_rules = true;
  FamilyMask families;
};

struct Candidates {
  std::optional<double> rule;
  std::optional<double> temporal;
  std::optional<double> word;
};

inline Candidates masked(Candidates c, const FamilyMask &m) {
  if (!m.rule) c.rule.reset();
  if (!m.temporal) c.temporal.reset();
  if (!m.word) c.word.reset();
  return c;
}

// Combines candidates, applies the history window and records the raw value.
inline Estimate resolve(const corpus::LabeledTweet &tweet, const Candidates &c,
                        HistoryBuffer &buffer, int window) {
  auto [source, raw] = combine(c.rule, c.temporal, c.word);
  Estimate e;
  e.tweet_id = tweet.tweet.id;
  e.event_id = tweet.tweet.event_id;
  e.actual_hours = tweet.tte_hours;
  e.source = source;
  e.raw_hours = raw;
  if (raw) {
    e.final_hours = apply_history(buffer, source, *raw, window);
    buffer.push(source, *raw);
  }
  return e;
}

// Estimates tweets one at a time, keeping one history buffer per event, so
// it can sit in a live pipeline. Tweets of each event must arrive in posting
// order.
class StreamEstimator {
 public:
  StreamEstimator(const rules::RuleSet &rules, const features::TrainedModel &model,
                  StreamOptions options)
      : rules_(&rules), model_(&model), options_(options) {}

  Candidates candidates(const corpus::LabeledTweet &tweet, const features::TweetFeatures &f) const {
    Candidates c;
    if (options_.families.rule) {
      if (auto r = rules_->estimate(f.spans, tweet.tweet.posted_at, options_.clamp_rules))
        c.rule = r->value_hours;
    }
    if (options_.families.temporal)
      c.temporal = estimate_features(f.temporal, *model_, options_.estimation_function);
    if (options_.families.word)
      c.word = estimate_features(f.words, *model_, options_.estimation_function);
    return c;
  }

  Estimate push(const corpus::LabeledTweet &tweet, const features::TweetFeatures &f) {
    return push(tweet, candidates(tweet, f));
  }

  // Candidates computed elsewhere; the family mask is applied here.
  Estimate push(const corpus::LabeledTweet &tweet, const Candidates &c) {
    auto &state = events_[tweet.tweet.event_id];
    if (state.seen && tweet.tweet.posted_at < state.last_posted)
      throw std::invalid_argument("tweets of event " + tweet.tweet.event_id +
                                  " are not in posting order");
    state.seen = true;
    state.last_posted = tweet.tweet.posted_at;
    return resolve(tweet, masked(c, options_.families), state.buffer, options_.window);
  }

  const HistoryBuffer *history(const std::string &event_id) const {
    auto it = events_.find(event_id);
    return it == events_.end() ? nullptr : &it->second.buffer;
  }

 private:
  struct EventState {
    HistoryBuffer buffer;
    Timestamp last_posted{};
    bool seen = false;
  };
  const rules::RuleSet *rules_;
  const features::TrainedModel *model_;
  StreamOptions options_;
  std::unordered_map<std::string, EventState> events_;
};

// One event's tweets with precomputed features, in posting order.
inline std::vector<Estimate> estimate_stream(const std::vector<corpus::LabeledTweet> &tweets,
                                             const std::vector<features::TweetFeatures> &feats,
                                             const rules::RuleSet &rules,
                                             const features::TrainedModel &model,
                                             const StreamOptions &options) {
  if (tweets.size() != feats.size()) throw std::invalid_argument("tweets/features size mismatch");
  StreamEstimator est(rules, model, options);
  std::vector<Estimate> out;
  out.reserve(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) out.push_back(est.push(tweets[i], feats[i]));
  return out;
}

inline std::vector<Estimate> estimate_stream(const std::vector<corpus::LabeledTweet> &tweets,
                                             const features::FeatureExtractor &extractor,
                                             const rules::RuleSet &rules,
                                             const features::TrainedModel &model,
                                             const StreamOptions &options) {
  std::vector<features::TweetFeatures> feats;
  feats.reserve(tweets.size());
  for (const auto &t : tweets) feats.push_back(extractor.extract(t.tweet.text));
  return estimate_stream(tweets, feats, rules, model, options);
}

}  // namespace tte::estimator
