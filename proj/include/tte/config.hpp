#pragma once

// Pipeline configuration: a flat JSON document. Absent keys take defaults;
// unknown keys and out-of-range values are rejected by name.

#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include "json.hpp"
#include "tte/errors.hpp"
#include "tte/stats.hpp"

namespace tte::config {

struct PipelineConfig {
  double window_hours = 192.0;
  int feature_length = 2;
  double quantile_word = 0.20;
  double quantile_temporal = 0.25;
  Aggregate training_function = Aggregate::Median;
  Aggregate estimation_function = Aggregate::Median;
  int history_window = 15;
  bool remove_retweets = true;
  bool rule_clamp_nonnegative = true;

  // Resource files; empty means the bundled sample resource.
  std::string lexicon;
  std::string grammar;
  std::string rules;
  std::string wordlist;  // empty: accept any plain alphabetic token
  std::string stoplist;

  // Evaluation.
  double hourly_bin_hours = 4.0;
  int workers = 0;  // 0: hardware concurrency

  // Hourly regressor baselines.
  int knn_k = 5;
  int prune_min_count = 500;
  int ts_sequence_length = 6;
  int ts_vocabulary_size = 100;
};

inline int effective_workers(const PipelineConfig &c) {
  if (c.workers > 0) return c.workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline nlohmann::json to_json(const PipelineConfig &c) {
  return {{"window_hours", c.window_hours},
          {"feature_length", c.feature_length},
          {"quantile_word", c.quantile_word},
          {"quantile_temporal", c.quantile_temporal},
          {"training_function", to_string(c.training_function)},
          {"estimation_function", to_string(c.estimation_function)},
          {"history_window", c.history_window},
          {"remove_retweets", c.remove_retweets},
          {"rule_clamp_nonnegative", c.rule_clamp_nonnegative},
          {"lexicon", c.lexicon},
          {"grammar", c.grammar},
          {"rules", c.rules},
          {"wordlist", c.wordlist},
          {"stoplist", c.stoplist},
          {"hourly_bin_hours", c.hourly_bin_hours},
          {"workers", c.workers},
          {"knn_k", c.knn_k},
          {"prune_min_count", c.prune_min_count},
          {"ts_sequence_length", c.ts_sequence_length},
          {"ts_vocabulary_size", c.ts_vocabulary_size}};
}

inline void validate(const PipelineConfig &c) {
  auto fail = [](const std::string &key, const std::string &why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (!(c.window_hours > 0.0)) fail("window_hours", "must be > 0");
  if (c.feature_length < 1 || c.feature_length > 7) fail("feature_length", "must be in [1,7]");
  if (!(c.quantile_word >= 0.0 && c.quantile_word < 1.0)) fail("quantile_word", "must be in [0,1)");
  if (!(c.quantile_temporal >= 0.0 && c.quantile_temporal < 1.0))
    fail("quantile_temporal", "must be in [0,1)");
  if (c.history_window < 0) fail("history_window", "must be >= 0");
  if (!(c.hourly_bin_hours > 0.0)) fail("hourly_bin_hours", "must be > 0");
  if (c.workers < 0) fail("workers", "must be >= 0");
  if (c.knn_k < 1) fail("knn_k", "must be >= 1");
  if (c.prune_min_count < 0) fail("prune_min_count", "must be >= 0");
  if (c.ts_sequence_length < 1) fail("ts_sequence_length", "must be >= 1");
  if (c.ts_vocabulary_size < 1) fail("ts_vocabulary_size", "must be >= 1");
  for (const auto &[key, path] : {std::pair{"lexicon", &c.lexicon}, std::pair{"grammar", &c.grammar},
                                  std::pair{"rules", &c.rules}, std::pair{"wordlist", &c.wordlist},
                                  std::pair{"stoplist", &c.stoplist}}) {
    if (!path->empty() && !std::filesystem::exists(*path)) fail(key, "file not found: " + *path);
  }
}

// Relative resource paths resolve against `base_dir`.
inline PipelineConfig from_json(const nlohmann::json &j, const std::filesystem::path &base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  for (const auto &[key, value] : j.items()) {
    try {
      if (key == "window_hours") c.window_hours = value.get<double>();
      else if (key == "feature_length") c.feature_length = value.get<int>();
      else if (key == "quantile_word") c.quantile_word = value.get<double>();
      else if (key == "quantile_temporal") c.quantile_temporal = value.get<double>();
      else if (key == "training_function") c.training_function = parse_aggregate(value.get<std::string>());
      else if (key == "estimation_function") c.estimation_function = parse_aggregate(value.get<std::string>());
      else if (key == "history_window") c.history_window = value.get<int>();
      else if (key == "remove_retweets") c.remove_retweets = value.get<bool>();
      else if (key == "rule_clamp_nonnegative") c.rule_clamp_nonnegative = value.get<bool>();
      else if (key == "hourly_bin_hours") c.hourly_bin_hours = value.get<double>();
      else if (key == "workers") c.workers = value.get<int>();
      else if (key == "knn_k") c.knn_k = value.get<int>();
      else if (key == "prune_min_count") c.prune_min_count = value.get<int>();
      else if (key == "ts_sequence_length") c.ts_sequence_length = value.get<int>();
      else if (key == "ts_vocabulary_size") c.ts_vocabulary_size = value.get<int>();
      else if (key == "lexicon" || key == "grammar" || key == "rules" || key == "wordlist" ||
               key == "stoplist") {
        std::string path = value.get<std::string>();
        if (!path.empty() && !base_dir.empty() && std::filesystem::path(path).is_relative())
          path = (base_dir / path).lexically_normal().string();
        if (key == "lexicon") c.lexicon = path;
        else if (key == "grammar") c.grammar = path;
        else if (key == "rules") c.rules = path;
        else if (key == "wordlist") c.wordlist = path;
        else c.stoplist = path;
      } else {
        throw ConfigError("config key '" + key + "': unknown key");
      }
    } catch (const nlohmann::json::exception &) {
      throw ConfigError("config key '" + key + "': wrong type");
    } catch (const std::invalid_argument &e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  validate(c);
  return c;
}

// An empty file yields the defaults.
inline PipelineConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.find_first_not_of(" \t\r\n") == std::string::npos) return {};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return from_json(j, std::filesystem::path(path).parent_path());
}

}  // namespace tte::config
