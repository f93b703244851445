#pragma once

// Word skipgram features, feature time series, selection by frequency and
// standard-deviation quantile, and value assignment.

#include <algorithm>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "tte/corpus.hpp"
#include "tte/errors.hpp"
#include "tte/feature_key.hpp"
#include "tte/stats.hpp"
#include "tte/texpr.hpp"
#include "tte/text.hpp"

namespace tte::features {

// Which tokens count as words. Without a word list, any plain alphabetic
// token (no digits, no hashtag or mention prefix) is accepted.
struct WordFilter {
  std::optional<std::unordered_set<std::string>> wordlist;
  std::unordered_set<std::string> stoplist;

  bool accepts(const std::string &tok) const {
    if (stoplist.count(tok)) return false;
    if (wordlist) return wordlist->count(tok) > 0;
    bool letter = false;
    for (unsigned char c : tok) {
      if (c >= 0x80 || std::isalpha(c)) letter = true;
      else if (c != '-' && c != '\'') return false;
    }
    return letter;
  }
};

inline std::vector<std::string> tokenize_words(const std::vector<std::string> &tokens,
                                               const WordFilter &filter) {
  std::vector<std::string> out;
  for (const auto &t : tokens)
    if (filter.accepts(t)) out.push_back(t);
  return out;
}

inline std::vector<std::string> tokenize_words(std::string_view text, const WordFilter &filter) {
  return tokenize_words(tokenize(text), filter);
}

inline std::vector<FeatureKey> word_skipgrams(const std::vector<std::string> &words, int n) {
  if (n < 1 || n > 7) throw std::invalid_argument("feature length must be in [1,7]");
  return skipgrams(words, n, FeatureKind::Word, " ");
}

struct FeatureTimeSeries {
  std::vector<double> occurrences;  // tte_hours of each training tweet with the feature
};

using FeatureTable = std::unordered_map<FeatureKey, FeatureTimeSeries, FeatureKeyHash>;

// Adds one tweet: each distinct key gains one occurrence, however often it
// appears in the tweet.
inline void accumulate_into(FeatureTable &table, double tte_hours,
                            const std::vector<FeatureKey> &keys) {
  std::vector<const FeatureKey *> distinct;
  distinct.reserve(keys.size());
  for (const auto &k : keys) distinct.push_back(&k);
  std::sort(distinct.begin(), distinct.end(), [](auto *a, auto *b) { return *a < *b; });
  distinct.erase(std::unique(distinct.begin(), distinct.end(), [](auto *a, auto *b) { return *a == *b; }),
                 distinct.end());
  for (const auto *k : distinct) table[*k].occurrences.push_back(tte_hours);
}

struct TrainingTweet {
  double tte_hours = 0.0;
  std::vector<FeatureKey> keys;
};

inline FeatureTable accumulate(const std::vector<TrainingTweet> &training) {
  FeatureTable table;
  for (const auto &t : training) accumulate_into(table, t.tte_hours, t.keys);
  return table;
}

// Drops hapax series, then drops series whose population standard deviation
// exceeds the nearest-rank (1 - q) quantile of all remaining deviations.
// Ties at the threshold are kept. Only keys of `kind` are considered when a
// kind is given; other keys pass through untouched.
inline FeatureTable select(FeatureTable table, double quantile_cutoff,
                           std::optional<FeatureKind> kind = std::nullopt) {
  if (!(quantile_cutoff >= 0.0 && quantile_cutoff < 1.0))
    throw std::invalid_argument("quantile cutoff must be in [0, 1)");
  std::vector<double> devs;
  std::unordered_map<const FeatureKey *, double> dev_of;
  for (auto it = table.begin(); it != table.end();) {
    if (kind && it->first.kind != *kind) { ++it; continue; }
    if (it->second.occurrences.size() < 2) {
      it = table.erase(it);
      continue;
    }
    const double sd = stats::population_stddev(it->second.occurrences);
    devs.push_back(sd);
    dev_of.emplace(&it->first, sd);
    ++it;
  }
  if (devs.empty()) return table;
  std::sort(devs.begin(), devs.end());
  const double threshold = stats::nearest_rank_quantile(devs, 1.0 - quantile_cutoff);
  for (auto it = table.begin(); it != table.end();) {
    auto d = dev_of.find(&it->first);
    if (d != dev_of.end() && d->second > threshold) it = table.erase(it);
    else ++it;
  }
  return table;
}

inline double assign_value(const FeatureTimeSeries &series, Aggregate fn) {
  if (series.occurrences.size() < 2)
    throw std::invalid_argument("feature value needs a non-hapax series");
  return stats::aggregate(series.occurrences, fn);
}

struct ModelEntry {
  double value = 0.0;
  std::size_t support = 0;
};

struct TrainedModel {
  std::unordered_map<FeatureKey, ModelEntry, FeatureKeyHash> values;
  Aggregate training_function = Aggregate::Median;
  Aggregate estimation_function = Aggregate::Median;
  double quantile_cutoff_word = 0.20;
  double quantile_cutoff_temporal = 0.25;
  int feature_length = 2;
  int window_size = 15;
  nlohmann::json config = nlohmann::json::object();  // full pipeline snapshot

  const ModelEntry *find(const FeatureKey &k) const {
    auto it = values.find(k);
    return it == values.end() ? nullptr : &it->second;
  }

  std::size_t count(FeatureKind kind) const {
    std::size_t n = 0;
    for (const auto &[k, v] : values) n += k.kind == kind;
    return n;
  }
};

struct TrainOptions {
  Aggregate training_function = Aggregate::Median;
  Aggregate estimation_function = Aggregate::Median;
  double quantile_cutoff_word = 0.20;
  double quantile_cutoff_temporal = 0.25;
  int feature_length = 2;
  int window_size = 15;
  nlohmann::json config = nlohmann::json::object();
};

inline TrainedModel train_from_table(FeatureTable table, const TrainOptions &opt) {
  table = select(std::move(table), opt.quantile_cutoff_temporal, FeatureKind::Temporal);
  table = select(std::move(table), opt.quantile_cutoff_word, FeatureKind::Word);
  TrainedModel model;
  model.training_function = opt.training_function;
  model.estimation_function = opt.estimation_function;
  model.quantile_cutoff_word = opt.quantile_cutoff_word;
  model.quantile_cutoff_temporal = opt.quantile_cutoff_temporal;
  model.feature_length = opt.feature_length;
  model.window_size = opt.window_size;
  model.config = opt.config;
  model.values.reserve(table.size());
  for (auto &[key, series] : table)
    model.values.emplace(key, ModelEntry{assign_value(series, opt.training_function),
                                         series.occurrences.size()});
  return model;
}

inline TrainedModel train(const std::vector<TrainingTweet> &training, const TrainOptions &opt) {
  return train_from_table(accumulate(training), opt);
}

// Per-tweet extraction shared by training and estimation.
struct TweetFeatures {
  std::vector<texpr::ExprSpan> spans;
  std::vector<FeatureKey> temporal;  // distinct
  std::vector<FeatureKey> words;     // distinct
};

class FeatureExtractor {
 public:
  FeatureExtractor(const texpr::CompiledPatternSet &patterns, const WordFilter &words,
                   int feature_length)
      : patterns_(&patterns), words_(&words), n_(feature_length) {
    if (n_ < 1 || n_ > 7) throw std::invalid_argument("feature length must be in [1,7]");
  }

  TweetFeatures extract(std::string_view text) const {
    TweetFeatures f;
    const auto tokens = tokenize(text);
    f.spans = texpr::extract(tokens, *patterns_);
    f.temporal = distinct(texpr::tfeat_skipgrams(f.spans, n_));
    f.words = distinct(word_skipgrams(tokenize_words(tokens, *words_), n_));
    return f;
  }

  int feature_length() const { return n_; }

 private:
  static std::vector<FeatureKey> distinct(std::vector<FeatureKey> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
  }

  const texpr::CompiledPatternSet *patterns_;
  const WordFilter *words_;
  int n_;
};

inline nlohmann::json to_json(const TrainedModel &m) {
  std::vector<std::pair<const FeatureKey *, const ModelEntry *>> rows;
  rows.reserve(m.values.size());
  for (const auto &[k, v] : m.values) rows.emplace_back(&k, &v);
  std::sort(rows.begin(), rows.end(), [](auto &a, auto &b) { return *a.first < *b.first; });
  nlohmann::json features = nlohmann::json::array();
  for (const auto &[k, v] : rows) {
    features.push_back({{"kind", to_string(k->kind)}, {"surface", k->surface},
                        {"value", v->value}, {"support_count", v->support}});
  }
  return {{"config", m.config},
          {"model",
           {{"training_function", to_string(m.training_function)},
            {"estimation_function", to_string(m.estimation_function)},
            {"quantile_word", m.quantile_cutoff_word},
            {"quantile_temporal", m.quantile_cutoff_temporal},
            {"feature_length", m.feature_length},
            {"history_window", m.window_size}}},
          {"features", features}};
}

inline TrainedModel model_from_json(const nlohmann::json &j) {
  TrainedModel m;
  try {
    const auto &meta = j.at("model");
    m.training_function = parse_aggregate(meta.at("training_function").get<std::string>());
    m.estimation_function = parse_aggregate(meta.at("estimation_function").get<std::string>());
    m.quantile_cutoff_word = meta.at("quantile_word").get<double>();
    m.quantile_cutoff_temporal = meta.at("quantile_temporal").get<double>();
    m.feature_length = meta.at("feature_length").get<int>();
    m.window_size = meta.at("history_window").get<int>();
    m.config = j.value("config", nlohmann::json::object());
    for (const auto &row : j.at("features")) {
      const std::string kind = row.at("kind").get<std::string>();
      if (kind != "TEMPORAL" && kind != "WORD") throw DataError("unknown feature kind: " + kind);
      FeatureKey key{kind == "TEMPORAL" ? FeatureKind::Temporal : FeatureKind::Word,
                     row.at("surface").get<std::string>()};
      m.values[key] = {row.at("value").get<double>(), row.value("support_count", std::size_t{0})};
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed model: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw DataError(std::string("malformed model: ") + e.what());
  }
  if (m.feature_length < 1 || m.feature_length > 7) throw DataError("model feature_length out of range");
  return m;
}

inline TrainedModel load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read model: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed model JSON: ") + e.what());
  }
  return model_from_json(j);
}

}  // namespace tte::features
