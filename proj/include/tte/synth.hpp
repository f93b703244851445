#pragma once

// Seeded synthetic corpus with known time to event. Exact-quantity tweets
// ("over N uur", N = rounded true TTE), exact weekday/clock tweets, learned
// temporal expressions, phase words tied to the TTE, and noise.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "tte/corpus.hpp"
#include "tte/errors.hpp"
#include "tte/time.hpp"

namespace tte::synth {

struct SynthSpec {
  int events = 50;
  int tweets_per_event = 200;
  std::uint64_t seed = 1;
  double exact_fraction = 0.30;     // share of an event's tweets with "over N uur"
  double dynamic_fraction = 0.05;   // share with "<weekday> om HH.MM"
  double temporal_fraction = 0.15;  // share with a learned-only expression
  double word_fraction = 0.90;      // chance a tweet carries phase words
  double retweet_fraction = 0.0;
  double nonfinal_hashtag_fraction = 0.30;
  double short_fraction = 0.66;     // mass below 8 h
  double short_mean_hours = 3.0;
  double long_mean_hours = 40.0;
  double window_hours = 192.0;
};

struct SynthCorpus {
  std::vector<corpus::Event> events;
  std::vector<corpus::Tweet> tweets;  // event-major, posting order
  std::vector<std::string> wordlist;
};

namespace detail {

// Hand-rolled draws keep output identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }
  double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }
  template <typename T>
  const T &pick(const std::vector<T> &v) { return v[below(v.size())]; }
  template <typename T>
  void shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

inline const std::vector<std::string> &filler_words() {
  static const std::vector<std::string> w{"wedstrijd", "spelers", "publiek", "stadion", "trainer",
                                          "supporters", "kaarten", "sfeer",  "team",    "club",
                                          "goal",      "winnen",  "thuis",   "uitvak",  "shirt"};
  return w;
}

// Phase words by TTE band: [0,1), [1,4), [4,12), [12,48), [48,inf).
inline const std::array<std::vector<std::string>, 5> &phase_words() {
  static const std::array<std::vector<std::string>, 5> w{{
      {"aftrap", "opstelling", "warming-up"},
      {"onderweg", "trein", "parkeren"},
      {"voorbeschouwing", "lunch", "spanning"},
      {"voorverkoop", "selectie", "persconferentie"},
      {"loting", "vooruitblik", "blessures"},
  }};
  return w;
}

inline std::size_t phase_of(double tte) {
  if (tte < 1) return 0;
  if (tte < 4) return 1;
  if (tte < 12) return 2;
  if (tte < 48) return 3;
  return 4;
}

// Learned-only expressions (no rule) by TTE band.
inline const std::string &temporal_phrase(double tte) {
  static const std::array<std::string, 4> p{"zometeen", "straks", "komend weekend", "volgende week"};
  if (tte < 1.5) return p[0];
  if (tte < 8) return p[1];
  if (tte < 72) return p[2];
  return p[3];
}

inline const std::array<std::string, 7> &dutch_weekdays() {
  static const std::array<std::string, 7> d{"maandag", "dinsdag", "woensdag", "donderdag",
                                            "vrijdag", "zaterdag", "zondag"};
  return d;
}

inline std::string clock_text(Timestamp t) {
  using namespace std::chrono;
  const auto tod = t - floor<days>(t);
  const auto h = duration_cast<hours>(tod).count();
  const auto m = duration_cast<minutes>(tod).count() % 60;
  return std::to_string(h) + "." + (m < 10 ? "0" : "") + std::to_string(m);
}

inline std::string weekday_name(Timestamp t) {
  using namespace std::chrono;
  return dutch_weekdays()[weekday{floor<days>(t)}.iso_encoding() - 1];
}

inline std::string join_tokens(const std::vector<std::string> &v) {
  std::string out;
  for (const auto &t : v) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace detail

inline void validate(const SynthSpec &s) {
  auto fraction = [](double f, const char *name) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError(std::string("synth ") + name + " must be in [0,1]");
  };
  if (s.events < 1) throw ConfigError("synth events must be >= 1");
  if (s.tweets_per_event < 1) throw ConfigError("synth tweets_per_event must be >= 1");
  fraction(s.exact_fraction, "exact_fraction");
  fraction(s.dynamic_fraction, "dynamic_fraction");
  fraction(s.temporal_fraction, "temporal_fraction");
  fraction(s.word_fraction, "word_fraction");
  fraction(s.retweet_fraction, "retweet_fraction");
  fraction(s.nonfinal_hashtag_fraction, "nonfinal_hashtag_fraction");
  fraction(s.short_fraction, "short_fraction");
  if (s.exact_fraction + s.dynamic_fraction + s.temporal_fraction > 1.0)
    throw ConfigError("synth carrier fractions sum above 1");
  if (!(s.short_mean_hours > 0.0) || !(s.long_mean_hours > 0.0))
    throw ConfigError("synth TTE means must be > 0");
  if (!(s.window_hours > 8.0)) throw ConfigError("synth window_hours must be > 8");
}

inline SynthCorpus synthesize(const SynthSpec &spec) {
  using namespace std::chrono;
  validate(spec);
  detail::Rng rng(spec.seed);
  SynthCorpus out;
  out.wordlist = detail::filler_words();
  for (const auto &band : detail::phase_words()) out.wordlist.insert(out.wordlist.end(), band.begin(), band.end());
  std::sort(out.wordlist.begin(), out.wordlist.end());

  const Timestamp base = sys_days{year{2012} / 9 / 2} + hours{14} + minutes{30};
  const auto n = static_cast<std::size_t>(spec.tweets_per_event);
  for (int e = 0; e < spec.events; ++e) {
    corpus::Event ev;
    ev.event_id = "ev" + std::to_string(e + 1);
    ev.hashtag = "#match" + std::to_string(e + 1);
    ev.start_time = base + days{2 * e} + minutes{285 * e % 600};

    std::vector<double> ttes(n);
    for (auto &t : ttes) {
      double v;
      if (rng.uniform() < spec.short_fraction) {
        do v = rng.exponential(spec.short_mean_hours); while (v >= 8.0);
      } else {
        do v = 8.0 + rng.exponential(spec.long_mean_hours); while (v > spec.window_hours);
      }
      t = v;
    }
    std::sort(ttes.begin(), ttes.end(), std::greater<>());  // posting order

    std::vector<Timestamp> posted(n);
    std::vector<double> actual(n);
    for (std::size_t i = 0; i < n; ++i) {
      posted[i] = ev.start_time - seconds{std::llround(ttes[i] * 3600.0)};
      actual[i] = hours_between(posted[i], ev.start_time);
    }

    // Carrier assignment: exact first, then dynamic, then temporal.
    enum Carrier { Plain, Exact, Dynamic, Temporal };
    std::vector<Carrier> carrier(n, Plain);
    auto assign = [&](Carrier c, double fraction, auto eligible) {
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < n; ++i)
        if (carrier[i] == Plain && eligible(i)) pool.push_back(i);
      rng.shuffle(pool);
      const auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
      for (std::size_t k = 0; k < want && k < pool.size(); ++k) carrier[pool[k]] = c;
    };
    assign(Exact, spec.exact_fraction, [&](std::size_t i) {
      const double r = std::round(actual[i]);
      return r >= 1.0 && r <= 120.0;
    });
    assign(Dynamic, spec.dynamic_fraction, [&](std::size_t i) { return actual[i] > 0.0 && actual[i] < 167.0; });
    assign(Temporal, spec.temporal_fraction, [](std::size_t) { return true; });

    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> words;
      const std::size_t fillers = 2 + rng.below(4);
      for (std::size_t k = 0; k < fillers; ++k) words.push_back(rng.pick(detail::filler_words()));
      if (rng.uniform() < spec.word_fraction) {
        const auto &band = detail::phase_words()[detail::phase_of(actual[i])];
        words.push_back(rng.pick(band));
        if (rng.uniform() < 0.5) words.push_back(rng.pick(band));
      }
      if (rng.uniform() < 0.3) words.push_back("x" + std::to_string(rng.below(1000)));
      rng.shuffle(words);

      std::string phrase;
      switch (carrier[i]) {
        case Exact: phrase = "over " + std::to_string(static_cast<int>(std::round(actual[i]))) + " uur"; break;
        case Dynamic:
          phrase = detail::weekday_name(ev.start_time) + " om " + detail::clock_text(ev.start_time);
          break;
        case Temporal: phrase = detail::temporal_phrase(actual[i]); break;
        case Plain: break;
      }
      if (!phrase.empty()) words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size() + 1)), phrase);
      if (rng.uniform() < spec.nonfinal_hashtag_fraction)
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size())), ev.hashtag);
      else
        words.push_back(ev.hashtag);
      if (rng.uniform() < spec.retweet_fraction) words.insert(words.begin(), {"rt", "@fan" + std::to_string(rng.below(50))});

      corpus::Tweet t;
      t.id = ev.event_id + "-" + std::to_string(i + 1);
      t.text = detail::join_tokens(words);
      t.posted_at = posted[i];
      t.event_id = ev.event_id;
      out.tweets.push_back(std::move(t));
    }
    out.events.push_back(std::move(ev));
  }
  return out;
}

// Writes tweets.jsonl, events.jsonl and wordlist.txt into `dir`.
inline void write_corpus(const SynthCorpus &c, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char *name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw DataError("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("events.jsonl");
    for (const auto &e : c.events) f << corpus::to_json(e).dump() << '\n';
  }
  {
    auto f = open("tweets.jsonl");
    for (const auto &t : c.tweets) f << corpus::to_json(t).dump() << '\n';
  }
  {
    auto f = open("wordlist.txt");
    for (const auto &w : c.wordlist) f << w << '\n';
  }
}

}  // namespace tte::synth
