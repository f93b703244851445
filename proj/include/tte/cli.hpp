#pragma once

// Command-line front end. `run` takes the arguments after the program name
// and writes to the given streams so it can be driven in-process.
//
// Exit status: 0 success, 1 data error (per-record report on stderr),
// 2 usage or configuration error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tte/config.hpp"
#include "tte/corpus.hpp"
#include "tte/errors.hpp"
#include "tte/estimator.hpp"
#include "tte/eval.hpp"
#include "tte/features.hpp"
#include "tte/pipeline.hpp"
#include "tte/regressors.hpp"
#include "tte/synth.hpp"

namespace tte::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-record problems that fail the command unless --lenient is given.
class RecordErrors : public std::runtime_error {
 public:
  RecordErrors(std::string what, std::vector<RecordError> errors)
      : std::runtime_error(std::move(what)), errors(std::move(errors)) {}
  std::vector<RecordError> errors;
};

struct Options {
  std::string config, tweets, events, model, out, tsv, estimates_out, input;
  std::vector<std::string> transfer;
  std::optional<std::uint64_t> seed;
  bool lenient = false;
  bool regressors = false;

  // Config overrides.
  std::optional<double> window_hours, quantile_word, quantile_temporal;
  std::optional<int> feature_length, history_window, workers;
  std::optional<std::string> training_function, estimation_function, wordlist;

  // Synthesizer.
  synth::SynthSpec synth;
};

namespace detail {

inline void add_overrides(CLI::App *cmd, Options &o) {
  cmd->add_option("--config", o.config, "JSON config file");
  cmd->add_option("--window-hours", o.window_hours, "Override window_hours");
  cmd->add_option("--feature-length", o.feature_length, "Override feature_length");
  cmd->add_option("--quantile-word", o.quantile_word, "Override quantile_word");
  cmd->add_option("--quantile-temporal", o.quantile_temporal, "Override quantile_temporal");
  cmd->add_option("--training-function", o.training_function, "Override training_function (mean|median)");
  cmd->add_option("--estimation-function", o.estimation_function, "Override estimation_function (mean|median)");
  cmd->add_option("--history-window", o.history_window, "Override history_window");
  cmd->add_option("--wordlist", o.wordlist, "Override wordlist path");
  cmd->add_option("--workers", o.workers, "Parallel folds (0: all cores)");
  cmd->add_option("--seed", o.seed, "Random seed");
}

inline void add_data(CLI::App *cmd, Options &o, bool tweets_required) {
  auto *t = cmd->add_option("--tweets", o.tweets, "Tweets JSON-lines file");
  if (tweets_required) t->required();
  cmd->add_option("--events", o.events, "Events JSON-lines file")->required();
  cmd->add_flag("--lenient", o.lenient, "Skip malformed records instead of failing");
}

inline config::PipelineConfig apply_overrides(config::PipelineConfig c, const Options &o) {
  if (o.window_hours) c.window_hours = *o.window_hours;
  if (o.feature_length) c.feature_length = *o.feature_length;
  if (o.quantile_word) c.quantile_word = *o.quantile_word;
  if (o.quantile_temporal) c.quantile_temporal = *o.quantile_temporal;
  try {
    if (o.training_function) c.training_function = parse_aggregate(*o.training_function);
    if (o.estimation_function) c.estimation_function = parse_aggregate(*o.estimation_function);
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  if (o.history_window) c.history_window = *o.history_window;
  if (o.wordlist) c.wordlist = *o.wordlist;
  if (o.workers) c.workers = *o.workers;
  config::validate(c);
  return c;
}

inline config::PipelineConfig load_config(const Options &o) {
  config::PipelineConfig c = o.config.empty() ? config::PipelineConfig{} : config::load_config(o.config);
  return apply_overrides(c, o);
}

inline void check_records(const std::vector<RecordError> &errors, const std::string &what,
                          const Options &o, std::ostream &err) {
  if (errors.empty()) return;
  if (!o.lenient) throw RecordErrors(what, errors);
  err << "warning: skipped " << errors.size() << " bad record(s) in " << what << '\n';
}

inline pipeline::Dataset load_dataset(const std::string &tweets_path, const std::string &events_path,
                                      const config::PipelineConfig &c, const Options &o, std::ostream &err) {
  auto events = corpus::load_events(events_path);
  check_records(events.errors, events_path, o, err);
  auto tweets = corpus::load_tweets(tweets_path);
  check_records(tweets.errors, tweets_path, o, err);
  auto labeled = corpus::label_and_window(tweets.records, events.records, {c.window_hours, c.remove_retweets});
  check_records(labeled.errors, tweets_path, o, err);
  return {std::move(events.records), std::move(labeled.labeled)};
}

// Writes to --out when given, else to `out`.
template <typename Fn>
void emit(const std::string &path, std::ostream &out, Fn &&fn) {
  if (path.empty() || path == "-") {
    fn(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  fn(f);
  if (!f) throw DataError("write failed: " + path);
}

inline int cmd_generate_patterns(const Options &o, std::ostream &out, std::ostream &err) {
  const auto c = load_config(o);
  const auto lexicon = texpr::load_lexicon(pipeline::resource_path(c.lexicon, "lexicon.txt"));
  const auto grammar = texpr::load_grammar(pipeline::resource_path(c.grammar, "grammar.txt"));
  const auto set = texpr::expand(lexicon, grammar);
  emit(o.out, out, [&](std::ostream &os) {
    for (const auto &p : set.patterns()) os << p << '\n';
  });
  err << set.size() << " patterns (" << set.raw_count() - set.size() << " duplicates merged)\n";
  return kExitOk;
}

inline int cmd_train(const Options &o, std::ostream &out, std::ostream &err) {
  const auto c = load_config(o);
  const auto res = pipeline::load_resources(c);
  const auto data = load_dataset(o.tweets, o.events, c, o, err);
  const auto model = pipeline::train_model(data.tweets, res, c);
  emit(o.out, out, [&](std::ostream &os) { os << features::to_json(model).dump(2) << '\n'; });
  err << "trained on " << data.tweets.size() << " tweets: " << model.count(FeatureKind::Temporal)
      << " temporal, " << model.count(FeatureKind::Word) << " word features\n";
  return kExitOk;
}

inline int cmd_estimate(const Options &o, std::istream &in, std::ostream &out, std::ostream &err) {
  const auto model = features::load_model(o.model);
  config::PipelineConfig c;
  if (!o.config.empty()) {
    c = config::load_config(o.config);
  } else if (!model.config.empty()) {
    c = config::from_json(model.config);
  } else {
    c.feature_length = model.feature_length;
    c.history_window = model.window_size;
    c.estimation_function = model.estimation_function;
  }
  c = apply_overrides(c, o);
  if (c.feature_length != model.feature_length)
    throw ConfigError("config key 'feature_length': differs from the model's (" +
                      std::to_string(model.feature_length) + ")");
  const auto res = pipeline::load_resources(c);
  const features::FeatureExtractor extractor(res.patterns, res.words, c.feature_length);
  estimator::StreamEstimator est(res.rules, model, pipeline::stream_options(c));

  auto events = corpus::load_events(o.events);
  check_records(events.errors, o.events, o, err);
  const auto index = corpus::index_events(events.records);
  const corpus::LabelOptions label{c.window_hours, c.remove_retweets};

  std::size_t written = 0, skipped = 0;
  auto run = [&](std::ostream &os) {
    auto push = [&](const std::vector<corpus::LabeledTweet> &batch) {
      for (const auto &t : batch) {
        os << estimator::to_json(est.push(t, extractor.extract(t.tweet.text))).dump() << '\n';
        ++written;
      }
      os.flush();
    };
    if (!o.tweets.empty() && o.tweets != "-") {
      auto tweets = corpus::load_tweets(o.tweets);
      check_records(tweets.errors, o.tweets, o, err);
      auto labeled = corpus::label_and_window(tweets.records, index, label);
      check_records(labeled.errors, o.tweets, o, err);
      skipped = tweets.records.size() - labeled.labeled.size() - labeled.errors.size();
      for (const auto &group : corpus::group_by_event(labeled.labeled)) push(group);
      return;
    }
    // Live mode: one tweet per line, estimated on arrival.
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream one(line);
      auto parsed = corpus::load_tweets(one);
      if (!parsed.errors.empty()) {
        RecordError e = parsed.errors.front();
        e.position = line_no;
        check_records({e}, "stdin", o, err);
        continue;
      }
      auto labeled = corpus::label_and_window(parsed.records, index, label);
      if (!labeled.errors.empty()) {
        RecordError e = labeled.errors.front();
        e.position = line_no;
        check_records({e}, "stdin", o, err);
        continue;
      }
      if (labeled.labeled.empty()) ++skipped;
      push(labeled.labeled);
    }
  };
  emit(o.out, out, run);
  err << written << " estimates written";
  if (skipped) err << ", " << skipped << " tweets outside the window or retweets skipped";
  err << '\n';
  return kExitOk;
}

inline void write_report(const eval::EvalReport &report, const Options &o, std::ostream &out,
                         const nlohmann::json &extra) {
  auto j = eval::to_json(report);
  for (const auto &[k, v] : extra.items()) j[k] = v;
  emit(o.out, out, [&](std::ostream &os) { os << j.dump(2) << '\n'; });
  if (!o.tsv.empty()) emit(o.tsv, out, [&](std::ostream &os) { os << eval::tsv_from_json(j); });
  if (!o.estimates_out.empty()) {
    emit(o.estimates_out, out, [&](std::ostream &os) {
      for (const auto &r : report.records) {
        nlohmann::json row{{"tweet_id", r.tweet_id}, {"event_id", r.event_id}, {"actual", r.actual_hours},
                           {"source", estimator::to_string(r.source)},
                           {"hashtag_position", corpus::to_string(r.position)}};
        for (int c = 0; c < eval::kColumnCount; ++c) {
          const auto &v = r.final[c];
          row[eval::kColumnNames[c]] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
        }
        os << row.dump() << '\n';
      }
    });
  }
}

inline int cmd_evaluate(const Options &o, std::ostream &out, std::ostream &err) {
  const auto c = load_config(o);
  const auto res = pipeline::load_resources(c);
  nlohmann::json extra = nlohmann::json::object();
  if (!o.transfer.empty()) {
    if (o.transfer.size() != 2) throw UsageError("--transfer needs <train-dir> <test-dir>");
    auto dir_data = [&](const std::filesystem::path &dir) {
      return load_dataset((dir / "tweets.jsonl").string(), (dir / "events.jsonl").string(), c, o, err);
    };
    const auto train = dir_data(o.transfer[0]);
    const auto test = dir_data(o.transfer[1]);
    const auto report = eval::transfer(train.tweets, test.tweets, res, c);
    extra["train_set"] = o.transfer[0];
    extra["test_set"] = o.transfer[1];
    write_report(report, o, out, extra);
    err << "transfer: " << report.records.size() << " test tweets in " << report.event_ids.size() << " events\n";
    return kExitOk;
  }
  if (o.tweets.empty() || o.events.empty()) throw UsageError("evaluate needs --tweets and --events (or --transfer)");
  const auto data = load_dataset(o.tweets, o.events, c, o, err);
  eval::LoeoOptions lo;
  lo.workers = config::effective_workers(c);
  const auto report = eval::loeo(data.tweets, res, c, lo);
  if (o.regressors) {
    extra["regressors"] = eval::to_json(
        eval::evaluate_regressors(data.tweets, corpus::index_events(data.events), res.words, c));
  }
  write_report(report, o, out, extra);
  err << "loeo: " << report.event_ids.size() << " folds, " << report.records.size() << " tweets\n";
  return kExitOk;
}

inline int cmd_baseline(const Options &o, std::ostream &out, std::ostream &err) {
  const auto c = load_config(o);
  const auto data = load_dataset(o.tweets, o.events, c, o, err);
  std::vector<double> ttes;
  for (const auto &t : data.tweets) ttes.push_back(t.tte_hours);
  if (ttes.empty()) throw DataError("no tweets inside the window");
  const auto b = regressors::baseline_fit(ttes);
  emit(o.out, out, [&](std::ostream &os) {
    os << nlohmann::json{{"tweets", ttes.size()}, {"mean_hours", b.mean_hours}, {"median_hours", b.median_hours}}
              .dump(2)
       << '\n';
  });
  return kExitOk;
}

inline int cmd_synthesize(Options o, std::ostream &, std::ostream &err) {
  if (o.seed) o.synth.seed = *o.seed;
  const auto corpus = synth::synthesize(o.synth);
  synth::write_corpus(corpus, o.out);
  err << "wrote " << corpus.tweets.size() << " tweets, " << corpus.events.size() << " events to " << o.out << '\n';
  return kExitOk;
}

inline int cmd_report(const Options &o, std::ostream &out, std::ostream &) {
  std::ifstream in(o.input);
  if (!in) throw DataError("cannot read report: " + o.input);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
  const auto tsv = eval::tsv_from_json(j);
  emit(o.out, out, [&](std::ostream &os) { os << tsv; });
  return kExitOk;
}

}  // namespace detail

inline int run(const std::vector<std::string> &args, std::istream &in, std::ostream &out, std::ostream &err) {
  CLI::App app{"Time-to-event estimation from timestamped microtexts"};
  app.name("tte");
  app.require_subcommand(1);
  Options o;

  auto *gen = app.add_subcommand("generate-patterns", "Expand lexicon and grammar into the pattern list");
  detail::add_overrides(gen, o);
  gen->add_option("--out", o.out, "Output file (default stdout)");

  auto *train = app.add_subcommand("train", "Train a model");
  detail::add_overrides(train, o);
  detail::add_data(train, o, true);
  train->add_option("--out", o.out, "Model file (default stdout)");

  auto *estimate = app.add_subcommand("estimate", "Estimate time to event per tweet");
  detail::add_overrides(estimate, o);
  detail::add_data(estimate, o, false);
  estimate->add_option("--model", o.model, "Trained model")->required();
  estimate->add_option("--out", o.out, "Estimates JSON-lines (default stdout)");

  auto *evaluate = app.add_subcommand("evaluate", "Leave-one-event-out evaluation");
  detail::add_overrides(evaluate, o);
  evaluate->add_option("--tweets", o.tweets, "Tweets JSON-lines file");
  evaluate->add_option("--events", o.events, "Events JSON-lines file");
  evaluate->add_flag("--lenient", o.lenient, "Skip malformed records instead of failing");
  evaluate->add_option("--transfer", o.transfer, "Train on one directory, test on another")->expected(2);
  evaluate->add_flag("--regressors", o.regressors, "Also evaluate the hourly regressors");
  evaluate->add_option("--out", o.out, "Report JSON (default stdout)");
  evaluate->add_option("--tsv", o.tsv, "Also write the tab-separated summary");
  evaluate->add_option("--estimates", o.estimates_out, "Also write per-tweet estimates");

  auto *baseline = app.add_subcommand("baseline", "Mean and median TTE baselines");
  detail::add_overrides(baseline, o);
  detail::add_data(baseline, o, true);
  baseline->add_option("--out", o.out, "Output file (default stdout)");

  auto *synthesize = app.add_subcommand("synthesize", "Write a synthetic corpus");
  synthesize->add_option("--out", o.out, "Output directory")->required();
  synthesize->add_option("--seed", o.seed, "Random seed");
  synthesize->add_option("--events", o.synth.events, "Number of events");
  synthesize->add_option("--tweets-per-event", o.synth.tweets_per_event, "Tweets per event");
  synthesize->add_option("--exact-fraction", o.synth.exact_fraction, "Share of exact-quantity tweets");
  synthesize->add_option("--dynamic-fraction", o.synth.dynamic_fraction, "Share of weekday/clock tweets");
  synthesize->add_option("--temporal-fraction", o.synth.temporal_fraction, "Share of learned-expression tweets");
  synthesize->add_option("--word-fraction", o.synth.word_fraction, "Chance of phase words");
  synthesize->add_option("--retweet-fraction", o.synth.retweet_fraction, "Share of retweets");

  auto *report = app.add_subcommand("report", "Convert a report JSON into the TSV summary");
  report->add_option("input", o.input, "Report JSON")->required();
  report->add_option("--out", o.out, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return detail::cmd_generate_patterns(o, out, err);
    if (train->parsed()) return detail::cmd_train(o, out, err);
    if (estimate->parsed()) return detail::cmd_estimate(o, in, out, err);
    if (evaluate->parsed()) return detail::cmd_evaluate(o, out, err);
    if (baseline->parsed()) return detail::cmd_baseline(o, out, err);
    if (synthesize->parsed()) return detail::cmd_synthesize(o, out, err);
    if (report->parsed()) return detail::cmd_report(o, out, err);
  } catch (const UsageError &e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError &e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RecordErrors &e) {
    err << "data error: " << e.errors.size() << " bad record(s) in " << e.what() << '\n';
    for (const auto &r : e.errors)
      err << "  record " << r.position << (r.id.empty() ? "" : " (" + r.id + ")") << ": " << r.message << '\n';
    return kExitData;
  } catch (const DataError &e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument &e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tte::cli
