#pragma once

// Event-linked tweet collections: loading, labeling with time to event,
// windowing and hashtag position.

#include <algorithm>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tte/errors.hpp"
#include "tte/text.hpp"
#include "tte/time.hpp"

namespace tte::corpus {

struct Tweet {
  std::string id;
  std::string text;  // normalized
  Timestamp posted_at;
  std::string event_id;
};

struct Event {
  std::string event_id;
  std::string hashtag;  // lowercase, with leading '#'
  Timestamp start_time;
};

enum class HashtagPosition { Final, NonFinal, Absent };

inline std::string_view to_string(HashtagPosition p) {
  switch (p) {
    case HashtagPosition::Final: return "FIN";
    case HashtagPosition::NonFinal: return "NFI";
    case HashtagPosition::Absent: return "ABSENT";
  }
  return "ABSENT";
}

struct LabeledTweet {
  Tweet tweet;
  double tte_hours = 0.0;
  HashtagPosition hashtag_position = HashtagPosition::Absent;
};

template <typename T>
struct LoadResult {
  std::vector<T> records;
  std::vector<RecordError> errors;
};

using EventIndex = std::unordered_map<std::string, Event>;

inline bool is_retweet(std::string_view text) {
  return text.find("rt @") != std::string_view::npos;
}

namespace detail {

inline std::string json_string_field(const nlohmann::json &obj, const char *key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw DataError(std::string("missing field '") + key + "'");
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  if (it->is_number_unsigned()) return std::to_string(it->get<unsigned long long>());
  throw DataError(std::string("field '") + key + "' is not a string");
}

inline Timestamp json_time_field(const nlohmann::json &obj, const char *key) {
  std::string raw = json_string_field(obj, key);
  auto ts = parse_iso8601(raw);
  if (!ts) throw DataError(std::string("unparseable timestamp in '") + key + "': " + raw);
  return *ts;
}

template <typename T, typename Parse>
LoadResult<T> load_jsonl(std::istream &in, Parse parse) {
  LoadResult<T> result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id;
    try {
      auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw DataError("record is not a JSON object");
      if (obj.contains("id")) id = obj["id"].is_string() ? obj["id"].get<std::string>() : obj["id"].dump();
      result.records.push_back(parse(obj));
    } catch (const nlohmann::json::exception &e) {
      result.errors.push_back({line_no, id, std::string("malformed JSON: ") + e.what()});
    } catch (const DataError &e) {
      result.errors.push_back({line_no, id, e.what()});
    }
  }
  return result;
}

template <typename Fn>
auto open_and(const std::string &path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path);
  return fn(in);
}

}  // namespace detail

inline Tweet tweet_from_json(const nlohmann::json &obj) {
  Tweet t;
  t.id = detail::json_string_field(obj, "id");
  t.text = normalize(detail::json_string_field(obj, "text"));
  if (t.text.empty()) throw DataError("empty text after normalization");
  t.posted_at = detail::json_time_field(obj, "created_at");
  t.event_id = detail::json_string_field(obj, "event_id");
  return t;
}

inline nlohmann::json to_json(const Tweet &t) {
  return {{"id", t.id}, {"text", t.text}, {"created_at", format_iso8601(t.posted_at)},
          {"event_id", t.event_id}};
}

inline Event event_from_json(const nlohmann::json &obj) {
  Event e;
  e.event_id = detail::json_string_field(obj, "event_id");
  e.hashtag = normalize(detail::json_string_field(obj, "hashtag"));
  if (e.hashtag.empty()) throw DataError("empty hashtag");
  if (e.hashtag.front() != '#') e.hashtag.insert(e.hashtag.begin(), '#');
  e.start_time = detail::json_time_field(obj, "start_time");
  return e;
}

inline nlohmann::json to_json(const Event &e) {
  return {{"event_id", e.event_id}, {"hashtag", e.hashtag},
          {"start_time", format_iso8601(e.start_time)}};
}

// Records come back in input order; malformed lines become RecordErrors
// carrying their 1-based line number.
inline LoadResult<Tweet> load_tweets(std::istream &in) {
  return detail::load_jsonl<Tweet>(in, tweet_from_json);
}

inline LoadResult<Tweet> load_tweets(const std::string &path) {
  return detail::open_and(path, [](std::istream &in) { return load_tweets(in); });
}

inline LoadResult<Event> load_events(std::istream &in) {
  return detail::load_jsonl<Event>(in, event_from_json);
}

inline LoadResult<Event> load_events(const std::string &path) {
  return detail::open_and(path, [](std::istream &in) { return load_events(in); });
}

inline EventIndex index_events(const std::vector<Event> &events) {
  EventIndex index;
  for (const auto &e : events) index.emplace(e.event_id, e);
  return index;
}

// FIN when the hashtag is tweet-final or followed only by other hashtags.
inline HashtagPosition hashtag_position(std::string_view text, std::string_view hashtag) {
  const std::string tag = normalize(hashtag);
  const auto tokens = tokenize(text);
  std::size_t last = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == tag) last = i;
  }
  if (last == tokens.size()) return HashtagPosition::Absent;
  for (std::size_t i = last + 1; i < tokens.size(); ++i) {
    if (tokens[i].front() != '#') return HashtagPosition::NonFinal;
  }
  return HashtagPosition::Final;
}

struct LabelOptions {
  double window_hours = 192.0;
  bool remove_retweets = true;
};

struct LabelResult {
  std::vector<LabeledTweet> labeled;
  std::vector<RecordError> errors;
};

// Keeps tweets with 0 <= tte <= window_hours. Unknown event ids are reported
// per record (position = index in `tweets`).
inline LabelResult label_and_window(const std::vector<Tweet> &tweets,
                                    const EventIndex &events,
                                    const LabelOptions &options = {}) {
  if (!(options.window_hours > 0.0)) throw ConfigError("window_hours must be > 0");
  LabelResult result;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    const Tweet &t = tweets[i];
    auto it = events.find(t.event_id);
    if (it == events.end()) {
      result.errors.push_back({i, t.id, "unknown event_id '" + t.event_id + "'"});
      continue;
    }
    if (options.remove_retweets && is_retweet(t.text)) continue;
    const double tte = hours_between(t.posted_at, it->second.start_time);
    if (tte < 0.0 || tte > options.window_hours) continue;
    result.labeled.push_back({t, tte, hashtag_position(t.text, it->second.hashtag)});
  }
  return result;
}

inline LabelResult label_and_window(const std::vector<Tweet> &tweets,
                                    const std::vector<Event> &events,
                                    const LabelOptions &options = {}) {
  return label_and_window(tweets, index_events(events), options);
}

// Groups labeled tweets per event (events in first-appearance order), each
// group sorted by posting time.
inline std::vector<std::vector<LabeledTweet>> group_by_event(
    const std::vector<LabeledTweet> &tweets) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<LabeledTweet>> groups;
  for (const auto &t : tweets) {
    auto [it, inserted] = slot.emplace(t.tweet.event_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(t);
  }
  for (auto &g : groups) {
    std::stable_sort(g.begin(), g.end(), [](const LabeledTweet &a, const LabeledTweet &b) {
      return a.tweet.posted_at < b.tweet.posted_at;
    });
  }
  return groups;
}

inline std::vector<LabeledTweet> filter_by_position(const std::vector<LabeledTweet> &tweets,
                                                    HashtagPosition position) {
  std::vector<LabeledTweet> out;
  for (const auto &t : tweets)
    if (t.hashtag_position == position) out.push_back(t);
  return out;
}

}  // namespace tte::corpus
