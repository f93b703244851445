#pragma once

// Glue between configuration, resources, training and estimation.

#include <string>
#include <vector>

#include "tte/config.hpp"
#include "tte/corpus.hpp"
#include "tte/estimator.hpp"
#include "tte/features.hpp"
#include "tte/rules.hpp"
#include "tte/texpr.hpp"

namespace tte::pipeline {

inline std::string default_data_dir() {
#ifdef TTE_DEFAULT_DATA_DIR
  return TTE_DEFAULT_DATA_DIR;
#else
  return "data";
#endif
}

inline std::string resource_path(const std::string &configured, const char *bundled_name) {
  return configured.empty() ? default_data_dir() + "/" + bundled_name : configured;
}

struct Resources {
  texpr::CompiledPatternSet patterns;
  rules::RuleSet rules;
  features::WordFilter words;
};

inline Resources load_resources(const config::PipelineConfig &c) {
  Resources r;
  const auto lexicon = texpr::load_lexicon(resource_path(c.lexicon, "lexicon.txt"));
  const auto grammar = texpr::load_grammar(resource_path(c.grammar, "grammar.txt"));
  r.patterns = texpr::expand(lexicon, grammar);
  r.rules = rules::RuleSet::load(resource_path(c.rules, "rules.txt"));
  if (!c.wordlist.empty()) r.words.wordlist = read_word_set(c.wordlist);
  r.words.stoplist = read_word_set(resource_path(c.stoplist, "stoplist.txt"));
  return r;
}

struct Dataset {
  std::vector<corpus::Event> events;
  std::vector<corpus::LabeledTweet> tweets;
};

inline features::TrainOptions train_options(const config::PipelineConfig &c) {
  features::TrainOptions o;
  o.training_function = c.training_function;
  o.estimation_function = c.estimation_function;
  o.quantile_cutoff_word = c.quantile_word;
  o.quantile_cutoff_temporal = c.quantile_temporal;
  o.feature_length = c.feature_length;
  o.window_size = c.history_window;
  o.config = config::to_json(c);
  return o;
}

inline estimator::StreamOptions stream_options(const config::PipelineConfig &c) {
  estimator::StreamOptions o;
  o.window = c.history_window;
  o.estimation_function = c.estimation_function;
  o.clamp_rules = c.rule_clamp_nonnegative;
  return o;
}

// Stream options recorded in a model; used when no config is supplied.
inline estimator::StreamOptions stream_options(const features::TrainedModel &m, bool clamp_rules) {
  estimator::StreamOptions o;
  o.window = m.window_size;
  o.estimation_function = m.estimation_function;
  o.clamp_rules = clamp_rules;
  return o;
}

inline features::TrainingTweet training_tweet(double tte_hours, const features::TweetFeatures &f) {
  features::TrainingTweet t;
  t.tte_hours = tte_hours;
  t.keys.reserve(f.temporal.size() + f.words.size());
  t.keys.insert(t.keys.end(), f.temporal.begin(), f.temporal.end());
  t.keys.insert(t.keys.end(), f.words.begin(), f.words.end());
  return t;
}

inline features::TrainedModel train_model(const std::vector<corpus::LabeledTweet> &tweets,
                                          const Resources &res, const config::PipelineConfig &c) {
  const features::FeatureExtractor extractor(res.patterns, res.words, c.feature_length);
  features::FeatureTable table;
  for (const auto &t : tweets) {
    const auto f = extractor.extract(t.tweet.text);
    features::accumulate_into(table, t.tte_hours, f.temporal);
    features::accumulate_into(table, t.tte_hours, f.words);
  }
  return features::train_from_table(std::move(table), train_options(c));
}

}  // namespace tte::pipeline
