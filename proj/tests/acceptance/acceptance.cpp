// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "../oracles.hpp"
#include "tte/tte.hpp"

using namespace tte;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

const pipeline::Resources &resources() {
  static const auto res = pipeline::load_resources({});
  return res;
}

// Alphabetic marker word unique to one event.
std::string canary(const std::string &event_id) {
  std::string w = "canary";
  for (char c : event_id) w += std::isdigit(static_cast<unsigned char>(c)) ? static_cast<char>('a' + (c - '0')) : c;
  return w;
}

std::vector<corpus::LabeledTweet> labeled(const synth::SynthCorpus &c) {
  return corpus::label_and_window(c.tweets, c.events).labeled;
}

// ---------------------------------------------------------------------------

Outcome exact_rule_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  synth::SynthSpec spec;  // 50 events x 200 tweets, 30% "over N uur"
  spec.seed = 20120902;
  const auto corpus = synth::synthesize(spec);
  const auto tweets = labeled(corpus);
  config::PipelineConfig cfg;
  const auto report = eval::loeo(tweets, resources(), cfg);
  const double elapsed = seconds_since(t0);

  const auto rule = report.metrics(eval::RFeats, /*raw=*/true);
  o.require(rule.mae.has_value(), "no rule estimates");
  if (!o.pass) return o;

  // Every "over N uur" carrier is estimated at N, within the rounding bound.
  std::size_t carriers = 0;
  std::unordered_map<std::string, std::string> text_of;
  for (const auto &t : tweets) text_of[t.tweet.id] = t.tweet.text;
  for (const auto &r : report.records) {
    const auto &text = text_of[r.tweet_id];
    const auto pos = text.find("over ");
    if (pos == std::string::npos || text.find(" uur", pos) == std::string::npos) continue;
    ++carriers;
    o.require(r.raw[eval::RFeats].has_value(), "carrier without rule estimate: " + r.tweet_id);
    if (r.raw[eval::RFeats])
      o.require(std::abs(*r.raw[eval::RFeats] - r.actual_hours) <= 0.5 + 1e-9,
                "carrier off by more than 0.5h: " + r.tweet_id);
    o.require(r.source == estimator::Source::Rule, "carrier not sourced from RULE: " + r.tweet_id);
  }
  o.require(carriers >= static_cast<std::size_t>(0.29 * static_cast<double>(tweets.size())),
            "too few carriers synthesized");
  o.require(*rule.mae <= 0.51, "RULE MAE " + fmt(*rule.mae) + " > 0.51");
  o.require(rule.coverage >= 0.29, "RULE coverage " + fmt(rule.coverage) + " < 0.29");
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed, 1) + "s >= 30s");
  if (o.pass)
    o.detail = "MAE " + fmt(*rule.mae) + "h, coverage " + fmt(rule.coverage) + ", " +
               std::to_string(tweets.size()) + " tweets, " + fmt(elapsed, 2) + "s";
  return o;
}

// ---------------------------------------------------------------------------

struct DynTemplate {
  std::vector<std::string> tokens;  // literal, "[a|b]", "N" or "T"
  int day = -1;                     // -1 today, -2 tomorrow, -3 overmorrow, 0..6 Monday..Sunday
  enum { Fixed, Captured, Hour } time = Fixed;
  int fixed_minutes = 0;
  bool pm = false;
  std::string line;
};

// Reads the DYN lines of the rule file without the library's parser.
std::vector<DynTemplate> read_dynamic_templates(const std::string &path) {
  std::ifstream in(path);
  std::vector<DynTemplate> out;
  std::string line;
  const std::vector<std::string> days{"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
  while (std::getline(in, line)) {
    if (line.rfind("DYN ", 0) != 0) continue;
    DynTemplate t;
    t.line = line;
    const auto a = line.find(" ANCHOR=");
    std::istringstream body(line.substr(4, a - 4));
    for (std::string tok; body >> tok;) t.tokens.push_back(tok);
    const std::string anchor = line.substr(a + 8);
    const auto at = anchor.find('@');
    const std::string day = anchor.substr(0, at);
    std::string time = anchor.substr(at + 1);
    if (day == "today") t.day = -1;
    else if (day == "tomorrow") t.day = -2;
    else if (day == "overmorrow") t.day = -3;
    else t.day = static_cast<int>(std::find(days.begin(), days.end(), day) - days.begin());
    if (time.size() > 2 && time.substr(time.size() - 2) == "pm") {
      t.pm = true;
      time.resize(time.size() - 2);
    }
    if (time == "T") t.time = DynTemplate::Captured;
    else if (time == "N") t.time = DynTemplate::Hour;
    else t.fixed_minutes = std::stoi(time.substr(0, 2)) * 60 + std::stoi(time.substr(3, 2));
    out.push_back(t);
  }
  return out;
}

Outcome dynamic_rule_arithmetic() {
  Outcome o;
  const auto templates = read_dynamic_templates(pipeline::resource_path("", "rules.txt"));
  o.require(templates.size() >= 10, "rule file has too few Dynamic rules");
  if (!o.pass) return o;
  std::mt19937_64 rng(77);
  const long long lo = oracle::days_from_civil(2011, 1, 1) * 86400;
  const long long hi = oracle::days_from_civil(2014, 1, 1) * 86400;
  std::size_t checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto &t = templates[rng() % templates.size()];
    const long long posted = lo + static_cast<long long>(rng() % static_cast<unsigned long long>(hi - lo));
    std::string text;
    int minutes = t.fixed_minutes;
    for (const auto &tok : t.tokens) {
      std::string w = tok;
      if (tok == "T") {
        const int hh = static_cast<int>(rng() % 24), mm = static_cast<int>(rng() % 60);
        char buf[8];
        std::snprintf(buf, sizeof buf, rng() % 2 ? "%d.%02d" : "%02d:%02d", hh, mm);
        w = buf;
        minutes = hh * 60 + mm;
      } else if (tok == "N") {
        const int n = 1 + static_cast<int>(rng() % 12);
        w = std::to_string(n);
        minutes = ((t.pm && n < 12) ? n + 12 : n) * 60;
      } else if (tok.front() == '[') {
        std::vector<std::string> alts;
        std::string cur;
        for (char c : tok.substr(1, tok.size() - 2)) {
          if (c == '|') {
            alts.push_back(cur);
            cur.clear();
          } else {
            cur += c;
          }
        }
        alts.push_back(cur);
        w = alts[rng() % alts.size()];
      }
      text += (text.empty() ? "" : " ") + w;
    }
    if (t.time == DynTemplate::Captured && t.pm && minutes < 12 * 60) minutes += 12 * 60;
    const double want = oracle::hours_2dp(oracle::resolve_anchor(t.day, minutes, posted) - posted);
    const auto got = resources().rules.apply_dynamic({0, 1, text}, Timestamp{std::chrono::seconds{posted}});
    o.require(got.has_value(), "no Dynamic match for '" + text + "'");
    if (got) o.require(*got == want, "'" + text + "': got " + fmt(*got, 2) + " want " + fmt(want, 2));
    ++checked;
  }
  if (o.pass) o.detail = std::to_string(checked) + " pairs over " + std::to_string(templates.size()) + " Dynamic rules";
  return o;
}

// ---------------------------------------------------------------------------

Outcome metric_oracle() {
  Outcome o;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 192.0);
  double worst = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<estimator::Estimate> es(n);
    std::vector<double> p, a;
    for (auto &e : es) {
      e.actual_hours = u(rng);
      if (rng() % 4) {
        e.final_hours = u(rng);
        p.push_back(*e.final_hours);
        a.push_back(e.actual_hours);
      }
    }
    if (p.empty()) {
      es[0].final_hours = u(rng);
      p.push_back(*es[0].final_hours);
      a.push_back(es[0].actual_hours);
    }
    const double m = eval::mae(es), r = eval::rmse(es);
    const double dm = std::abs(m - oracle::mae(p, a)), dr = std::abs(r - oracle::rmse(p, a));
    worst = std::max({worst, dm, dr});
    o.require(dm <= 1e-9 && dr <= 1e-9, "set " + std::to_string(s) + " differs from reference");
    o.require(m <= r + 1e-12, "MAE > RMSE on set " + std::to_string(s));
    o.require(std::abs(eval::coverage(es) - static_cast<double>(p.size()) / static_cast<double>(n)) < 1e-15,
              "coverage mismatch on set " + std::to_string(s));
  }
  if (o.pass) o.detail = "10000 sets, max deviation " + std::to_string(worst);
  return o;
}

// ---------------------------------------------------------------------------

std::set<std::string> kept_names(const features::FeatureTable &t) {
  std::set<std::string> out;
  for (const auto &[k, v] : t) out.insert(k.surface);
  return out;
}

Outcome feature_selection() {
  Outcome o;
  std::mt19937 rng(4);
  features::FeatureTable table;
  std::vector<double> devs;
  for (int i = 0; i < 100; ++i) {
    const double sd = 0.25 + 0.5 * i + static_cast<double>(rng() % 100) / 1000.0;
    devs.push_back(sd);
    auto &series = table[{FeatureKind::Word, "f" + std::to_string(i)}].occurrences;
    const int n = 2 + static_cast<int>(rng() % 4) * 2;  // even length, half below and half above
    for (int k = 0; k < n; ++k) series.push_back(96.0 + (k % 2 ? sd : -sd));
  }
  const auto kept = features::select(table, 0.25);
  o.require(kept.size() == 75, "q=0.25 kept " + std::to_string(kept.size()));
  std::vector<double> sorted = devs;
  std::sort(sorted.begin(), sorted.end());
  std::set<std::string> want;
  for (int i = 0; i < 100; ++i)
    if (devs[static_cast<std::size_t>(i)] <= sorted[74]) want.insert("f" + std::to_string(i));
  o.require(kept_names(kept) == want, "kept set differs from sort-and-cut oracle");

  std::size_t pairs = 0;
  std::vector<std::set<std::string>> by_q;
  for (int k = 0; k < 20; ++k) by_q.push_back(kept_names(features::select(table, k * 0.05)));
  for (std::size_t i = 0; i < by_q.size(); ++i)
    for (std::size_t j = i; j < by_q.size(); ++j, ++pairs)
      o.require(std::includes(by_q[i].begin(), by_q[i].end(), by_q[j].begin(), by_q[j].end()),
                "monotonicity broken between q=" + fmt(i * 0.05, 2) + " and q=" + fmt(j * 0.05, 2));
  if (o.pass) o.detail = "75/100 kept; monotone over " + std::to_string(pairs) + " q-pairs";
  return o;
}

// ---------------------------------------------------------------------------

Outcome median_robustness() {
  Outcome o;
  // Feature series from a synthetic corpus plus random ones.
  synth::SynthSpec spec;
  spec.events = 10;
  spec.tweets_per_event = 150;
  spec.seed = 5;
  const auto tweets = labeled(synth::synthesize(spec));
  const features::FeatureExtractor ex(resources().patterns, resources().words, 2);
  std::vector<features::TrainingTweet> training;
  for (const auto &t : tweets) training.push_back(pipeline::training_tweet(t.tte_hours, ex.extract(t.tweet.text)));
  std::vector<std::vector<double>> all_series;
  for (const auto &[k, s] : features::accumulate(training))
    if (s.occurrences.size() >= 5) all_series.push_back(s.occurrences);
  std::mt19937 rng(6);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> s(5 + rng() % 60);
    for (auto &v : s) v = static_cast<double>(rng() % 19200) / 100.0;
    all_series.push_back(s);
  }

  std::size_t cases = 0, divergent = 0;
  for (const auto &clean : all_series) {
    const std::size_t n = clean.size();
    const auto heavy = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    const double clean_med = features::assign_value({clean}, Aggregate::Median);
    const double clean_mean = features::assign_value({clean}, Aggregate::Mean);
    // Every outlier count strictly below half.
    for (std::size_t k = 1; 2 * k < n; ++k) {
      std::vector<double> dirty = clean;
      std::vector<char> touched(n, 0);
      for (std::size_t j = 0; j < k; ++j) {
        dirty[idx[j]] += 1000.0;
        touched[idx[j]] = 1;
      }
      double ulo = 1e300, uhi = -1e300;
      for (std::size_t j = 0; j < n; ++j)
        if (!touched[j]) {
          ulo = std::min(ulo, clean[j]);
          uhi = std::max(uhi, clean[j]);
        }
      const double spread = uhi - ulo;
      const double dmed = std::abs(features::assign_value({dirty}, Aggregate::Median) - clean_med);
      const double dmean = std::abs(features::assign_value({dirty}, Aggregate::Mean) - clean_mean);
      o.require(dmed <= spread + 1e-9, "median moved " + fmt(dmed) + " > spread " + fmt(spread));
      o.require(std::abs(dmean - 1000.0 * static_cast<double>(k) / static_cast<double>(n)) < 1e-6,
                "mean shift is not the outlier mass");
      if (k >= heavy) {
        o.require(dmean > spread, "mean shift " + fmt(dmean) + " within spread " + fmt(spread));
        ++divergent;
      }
      ++cases;
    }
  }
  if (o.pass)
    o.detail = std::to_string(all_series.size()) + " series, " + std::to_string(cases) +
               " corruptions within untouched spread; mean left it on " + std::to_string(divergent) + " heavy ones";
  return o;
}

// ---------------------------------------------------------------------------

Outcome history_window() {
  Outcome o;
  std::mt19937 rng(15);
  std::size_t checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    // Clean prefix of >= 8, bursts of <= 7 corrupted raws, gaps of >= 8.
    std::vector<double> raws, clean;
    std::vector<char> bad;
    auto push_clean = [&](int count) {
      for (int i = 0; i < count; ++i) {
        const double v = static_cast<double>(rng() % 19200) / 100.0;
        raws.push_back(v);
        clean.push_back(v);
        bad.push_back(0);
      }
    };
    push_clean(8 + static_cast<int>(rng() % 10));
    while (raws.size() < 150) {
      const int burst = 1 + static_cast<int>(rng() % 7);
      for (int i = 0; i < burst; ++i) {
        const double v = static_cast<double>(rng() % 19200) / 100.0;
        raws.push_back(v + 100.0);
        clean.push_back(v);
        bad.push_back(1);
      }
      push_clean(8 + static_cast<int>(rng() % 10));
    }
    const auto source = static_cast<estimator::Source>(trial % 3);
    const features::TrainedModel model;
    estimator::StreamOptions w15;
    w15.window = 15;
    estimator::StreamEstimator est(resources().rules, model, w15);
    estimator::StreamOptions w1;
    w1.window = 1;
    estimator::StreamEstimator one(resources().rules, model, w1);
    for (std::size_t i = 0; i < raws.size(); ++i) {
      corpus::LabeledTweet t;
      t.tweet = {std::to_string(i), "", Timestamp{std::chrono::seconds{1346500000 + static_cast<long long>(i) * 60}}, "e"};
      estimator::Candidates c;
      if (source == estimator::Source::Rule) c.rule = raws[i];
      else if (source == estimator::Source::Temporal) c.temporal = raws[i];
      else c.word = raws[i];
      const auto e = est.push(t, c);
      double lo = 1e300, hi = -1e300;
      for (std::size_t j = (i >= 14 ? i - 14 : 0); j <= i; ++j)
        if (!bad[j]) {
          lo = std::min(lo, raws[j]);
          hi = std::max(hi, raws[j]);
        }
      o.require(*e.final_hours >= lo && *e.final_hours <= hi,
                "final " + fmt(*e.final_hours) + " outside clean window range at " + std::to_string(i));
      const auto r = one.push(t, c);
      o.require(*r.final_hours == raws[i], "W=1 changed a raw estimate");
      ++checked;
    }
  }
  if (o.pass) o.detail = std::to_string(checked) + " estimates within clean window bounds; W=1 exact";
  return o;
}

// ---------------------------------------------------------------------------

Outcome smoothing() {
  Outcome o;
  for (double c : {0.0, 0.37, 1.0, 12.5})
    for (double v : regressors::smooth(std::vector<double>(9, c)))
      o.require(std::abs(v - c) <= 1e-12, "constant " + fmt(c, 2) + " not preserved");
  o.require(regressors::smooth({0, 0, 7})[2] == 4.0, "[0,0,7] did not give 4.0");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<double> x(n), y(n), z(n);
    const double a = u(rng), b = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      z[i] = a * x[i] + b * y[i];
    }
    const auto sx = regressors::smooth(x), sy = regressors::smooth(y), sz = regressors::smooth(z);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(sz[i] - (a * sx[i] + b * sy[i])));
  }
  o.require(worst <= 1e-12, "linearity deviation " + std::to_string(worst));
  if (o.pass) o.detail = "max linearity deviation " + std::to_string(worst);
  return o;
}

// ---------------------------------------------------------------------------

Outcome time_series_knn() {
  Outcome o;
  auto seq = [](std::vector<double> v, double tte) {
    regressors::FrameSequence s;
    s.values = std::move(v);
    s.tte_hours = tte;
    return s;
  };
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<regressors::FrameSequence> train;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> v(12);
      for (auto &x : v) x = u(rng);
      train.push_back(seq(v, static_cast<double>(i) * 3.5));
    }
    const auto &pick = train[rng() % train.size()];
    o.require(regressors::ts_knn_predict(pick, train) == pick.tte_hours, "exact match did not return its TTE");
  }
  o.require(regressors::ts_knn_predict(seq({0.5, 0.5}, 0), {seq({0.5, 0.5}, 10), seq({0.5, 0.5}, 20), seq({1, 1}, 99)}) == 15.0,
            "duplicate neighbours {10,20} did not give 15");
  o.require(regressors::ts_knn_predict(seq({0, 0}, 0), {seq({1, 0}, 10), seq({0, 1}, 20)}) == 15.0,
            "equidistant neighbours {10,20} did not give 15");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + rng() % 20, dim = 6 * (1 + rng() % 4);
    std::vector<regressors::FrameSequence> train;
    std::vector<std::vector<double>> raw;
    std::vector<double> tte;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (auto &x : v) x = static_cast<double>(rng() % 5) / 4.0;
      raw.push_back(v);
      tte.push_back(static_cast<double>(rng() % 192));
      train.push_back(seq(v, tte.back()));
    }
    std::vector<double> q(dim);
    for (auto &x : q) x = static_cast<double>(rng() % 5) / 4.0;
    const double got = regressors::ts_knn_predict(seq(q, 0), train), want = oracle::nn_euclid(q, raw, tte);
    o.require(std::abs(got - want) < 1e-12, "random case " + std::to_string(trial) + " differs from oracle");
  }
  if (o.pass) o.detail = "exact-match, tie and 100 oracle cases agree";
  return o;
}

// ---------------------------------------------------------------------------

Outcome loeo_integrity() {
  Outcome o;
  std::mt19937_64 rng(9);
  std::size_t folds = 0, audited = 0;
  for (int d = 0; d < 10; ++d) {
    synth::SynthSpec spec;
    spec.events = 3 + static_cast<int>(rng() % 6);
    spec.tweets_per_event = 40 + static_cast<int>(rng() % 100);
    spec.seed = rng();
    spec.temporal_fraction = static_cast<double>(rng() % 30) / 100.0;
    auto corpus = synth::synthesize(spec);
    // Canary words that occur only inside one event.
    for (auto &t : corpus.tweets) t.text += " " + canary(t.event_id);
    const auto tweets = labeled(corpus);
    const features::FeatureExtractor ex(resources().patterns, resources().words, 2);
    const auto prepared = eval::prepare(tweets, ex);
    std::vector<std::string> event_of;
    for (const auto &group : prepared.events)
      for (const auto &t : group) event_of.push_back(t.tweet.event_id);

    config::PipelineConfig cfg;
    cfg.quantile_word = 0.0;  // keep every non-hapax word so canaries would survive selection
    eval::LoeoOptions opts;
    opts.observer = [&](std::size_t, const std::string &held, const std::vector<std::size_t> &contrib) {
      ++folds;
      o.require(!contrib.empty(), "fold for " + held + " had no training tweets");
      for (auto i : contrib) {
        ++audited;
        o.require(event_of[i] != held, "tweet of held-out " + held + " contributed to its fold");
      }
    };
    eval::loeo(prepared, resources().rules, cfg, opts);

    const eval::FoldTrainer trainer(prepared, pipeline::train_options(cfg));
    for (std::uint32_t e = 0; e < prepared.events.size(); ++e) {
      const auto model = trainer.train(e);
      const std::string held = prepared.events[e].front().tweet.event_id;
      for (const auto &[k, v] : model.values)
        o.require(k.surface.find(canary(held)) == std::string::npos,
                  "held-out canary " + held + " present in its fold model");
      bool others = false;
      for (const auto &group : prepared.events) {
        const auto &id = group.front().tweet.event_id;
        if (id != held) others |= model.find({FeatureKind::Word, canary(id)}) != nullptr;
      }
      o.require(others, "training canaries missing from fold model");
    }
  }
  if (o.pass)
    o.detail = "10 datasets, " + std::to_string(folds) + " folds, " + std::to_string(audited) + " contributions audited";
  return o;
}

// ---------------------------------------------------------------------------

Outcome priority_and_coverage() {
  Outcome o;
  const std::vector<std::array<double, 4>> mixes{{0.30, 0.05, 0.15, 0.90}, {0.10, 0.10, 0.40, 0.30},
                                                 {0.50, 0.00, 0.00, 0.50}, {0.00, 0.20, 0.30, 0.00}};
  std::size_t rule_tweets = 0;
  for (std::size_t m = 0; m < mixes.size(); ++m) {
    synth::SynthSpec spec;
    spec.events = 6;
    spec.tweets_per_event = 120;
    spec.seed = 100 + m;
    spec.exact_fraction = mixes[m][0];
    spec.dynamic_fraction = mixes[m][1];
    spec.temporal_fraction = mixes[m][2];
    spec.word_fraction = mixes[m][3];
    const auto tweets = labeled(synth::synthesize(spec));
    const auto report = eval::loeo(tweets, resources(), {});
    std::unordered_map<std::string, const corpus::LabeledTweet *> by_id;
    for (const auto &t : tweets) by_id[t.tweet.id] = &t;

    std::set<std::string> fam_union, combined;
    for (const auto &r : report.records) {
      if (r.final[eval::RFeats] || r.final[eval::TFeats] || r.final[eval::WFeats]) fam_union.insert(r.tweet_id);
      if (r.final[eval::All]) combined.insert(r.tweet_id);
      // Independent rule check straight from the text.
      const auto &t = *by_id.at(r.tweet_id);
      const auto spans = texpr::extract(tokenize(t.tweet.text), resources().patterns);
      if (resources().rules.estimate(spans, t.tweet.posted_at)) {
        ++rule_tweets;
        o.require(r.source == estimator::Source::Rule, "rule-matching tweet " + r.tweet_id + " not sourced RULE");
      }
    }
    o.require(fam_union == combined, "combined coverage differs from the family union in mix " + std::to_string(m));
    const auto all = report.metrics(eval::All);
    o.require(std::abs(all.coverage - static_cast<double>(fam_union.size()) / static_cast<double>(report.records.size())) < 1e-15,
              "reported coverage differs from union size");
  }
  if (o.pass) o.detail = std::to_string(mixes.size()) + " mixes, " + std::to_string(rule_tweets) + " rule tweets all RULE";
  return o;
}

// ---------------------------------------------------------------------------

Outcome throughput() {
  Outcome o;
  synth::SynthSpec spec;
  spec.events = 50;
  spec.tweets_per_event = 2000;
  spec.seed = 11;
  const auto tweets = labeled(synth::synthesize(spec));
  config::PipelineConfig cfg;
  const auto t0 = Clock::now();
  const auto model = pipeline::train_model(tweets, resources(), cfg);
  const double train_s = seconds_since(t0);
  const auto report = eval::loeo(tweets, resources(), cfg);
  const double total = seconds_since(t0);
  o.require(tweets.size() >= 99000, "corpus too small: " + std::to_string(tweets.size()));
  o.require(report.records.size() == tweets.size(), "LOEO did not score every tweet");
  o.require(total < 300.0, "train+LOEO took " + fmt(total, 1) + "s");
  if (o.pass)
    o.detail = std::to_string(tweets.size()) + " tweets, train " + fmt(train_s, 2) + "s, train+LOEO " + fmt(total, 2) +
               "s with " + std::to_string(config::effective_workers(cfg)) + " worker(s), " +
               std::to_string(model.values.size()) + " features";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
      {"exact-rule oracle", exact_rule_oracle},
      {"dynamic-rule arithmetic", dynamic_rule_arithmetic},
      {"metric oracle", metric_oracle},
      {"feature selection", feature_selection},
      {"median training robustness", median_robustness},
      {"history window", history_window},
      {"smoothing", smoothing},
      {"time-series k-NN", time_series_knn},
      {"LOEO integrity", loeo_integrity},
      {"priority and coverage", priority_and_coverage},
      {"throughput", throughput},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " ("
              << fmt(seconds_since(t0), 2) << "s): " << o.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criterion/criteria failed" : "all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
