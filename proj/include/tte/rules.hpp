#pragma once

// Estimation rules. Exact rules read a time to event straight off a quantity
// expression; Dynamic rules resolve an anchor time from the expression and
// subtract the posting time.
//
// Rule file, one rule per line ("//" comments allowed):
//   EXACT <template> UNIT=<hours per N>        e.g. EXACT over N [minuut|minuten] UNIT=1/60
//   DYN <template> ANCHOR=<day>@<time>         e.g. DYN vanavond ANCHOR=today@20:00
// Template tokens: literal words, "[a|b]" single-word alternatives, "N" (a
// numeral, digits or a Dutch number word) and "T" (a clock time such as 14.30
// or 20:45). Without N an Exact rule yields UNIT itself.
// Day selectors: today, tomorrow, overmorrow, monday..sunday.
// Time: HH:MM, T (captured clock), N (captured numeral as the hour, minute 0);
// a "pm" suffix on T or N adds 12 hours to hours below 12.

#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tte/errors.hpp"
#include "tte/texpr.hpp"
#include "tte/text.hpp"
#include "tte/time.hpp"

namespace tte::rules {

enum class RuleKind { Exact, Dynamic };

struct TemplateToken {
  enum class Kind { Literal, Numeral, Clock };
  Kind kind = Kind::Literal;
  std::vector<std::string> alternatives;  // Literal only
};

enum class DaySelector {
  Today, Tomorrow, Overmorrow,
  Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday
};

struct TimeOfDay {
  enum class Source { Fixed, Clock, Numeral };
  Source source = Source::Fixed;
  int minutes = 0;  // Fixed only
  bool pm = false;
};

struct ExactRule {
  std::vector<TemplateToken> pattern;
  double unit_hours = 1.0;
  std::string text;
};

struct DynamicRule {
  std::vector<TemplateToken> trigger;
  DaySelector day = DaySelector::Today;
  TimeOfDay time;
  std::string text;
};

struct RuleMatch {
  texpr::ExprSpan span;
  RuleKind kind = RuleKind::Exact;
  double value_hours = 0.0;  // rounded to 2 decimals
};

struct RuleEstimate {
  double value_hours = 0.0;
  std::vector<RuleMatch> matches;
};

// Dutch number words accepted in an N slot.
inline std::optional<int> parse_numeral(std::string_view tok) {
  if (!tok.empty() && tok.size() <= 6) {
    int v = 0;
    bool digits = true;
    for (char c : tok) {
      if (c < '0' || c > '9') { digits = false; break; }
      v = v * 10 + (c - '0');
    }
    if (digits) return v;
  }
  static const std::unordered_map<std::string_view, int> words = {
      {"een", 1},  {"één", 1},   {"twee", 2},  {"drie", 3},  {"vier", 4},
      {"vijf", 5}, {"zes", 6},   {"zeven", 7}, {"acht", 8},  {"negen", 9},
      {"tien", 10}, {"elf", 11}, {"twaalf", 12}};
  auto it = words.find(tok);
  if (it == words.end()) return std::nullopt;
  return it->second;
}

namespace detail {

struct Captures {
  std::optional<int> numeral;
  std::optional<ClockTime> clock;
};

inline bool match_template(const std::vector<TemplateToken> &tmpl,
                           const std::vector<std::string> &tokens, Captures *cap) {
  if (tmpl.size() != tokens.size()) return false;
  Captures local;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    const auto &t = tmpl[i];
    switch (t.kind) {
      case TemplateToken::Kind::Literal: {
        bool hit = false;
        for (const auto &alt : t.alternatives) hit = hit || alt == tokens[i];
        if (!hit) return false;
        break;
      }
      case TemplateToken::Kind::Numeral: {
        auto n = parse_numeral(tokens[i]);
        if (!n) return false;
        local.numeral = n;
        break;
      }
      case TemplateToken::Kind::Clock: {
        auto c = parse_clock(tokens[i]);
        if (!c) return false;
        local.clock = c;
        break;
      }
    }
  }
  *cap = local;
  return true;
}

// Splits a template into tokens, keeping "[a | b]" groups whole.
inline std::vector<TemplateToken> parse_template(std::string_view text) {
  std::vector<TemplateToken> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) break;
    TemplateToken tok;
    if (text[i] == '[') {
      std::size_t close = text.find(']', i);
      if (close == std::string_view::npos) throw ConfigError("unbalanced '[' in template");
      for (auto alt : texpr::detail::split_top_level(text.substr(i + 1, close - i - 1), '|')) {
        std::string a = normalize(texpr::detail::trim(alt));
        if (a.empty() || a.find(' ') != std::string::npos)
          throw ConfigError("template alternatives must be single words");
        tok.alternatives.push_back(std::move(a));
      }
      i = close + 1;
    } else {
      std::size_t begin = i;
      while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
      std::string_view word = text.substr(begin, i - begin);
      if (word == "N") tok.kind = TemplateToken::Kind::Numeral;
      else if (word == "T") tok.kind = TemplateToken::Kind::Clock;
      else tok.alternatives.push_back(normalize(word));
    }
    out.push_back(std::move(tok));
  }
  if (out.empty()) throw ConfigError("empty template");
  return out;
}

inline bool has_kind(const std::vector<TemplateToken> &tmpl, TemplateToken::Kind k) {
  for (const auto &t : tmpl)
    if (t.kind == k) return true;
  return false;
}

inline double parse_factor(std::string_view s) {
  auto to_double = [&](std::string_view part) {
    std::string str(texpr::detail::trim(part));
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception &) {
      throw ConfigError("bad UNIT value: " + std::string(s));
    }
    if (used != str.size()) throw ConfigError("bad UNIT value: " + std::string(s));
    return v;
  };
  std::size_t slash = s.find('/');
  double v = slash == std::string_view::npos
                 ? to_double(s)
                 : to_double(s.substr(0, slash)) / to_double(s.substr(slash + 1));
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("UNIT must be positive: " + std::string(s));
  return v;
}

inline DaySelector parse_day(std::string_view s) {
  static const std::unordered_map<std::string_view, DaySelector> days = {
      {"today", DaySelector::Today},        {"tomorrow", DaySelector::Tomorrow},
      {"overmorrow", DaySelector::Overmorrow}, {"monday", DaySelector::Monday},
      {"tuesday", DaySelector::Tuesday},    {"wednesday", DaySelector::Wednesday},
      {"thursday", DaySelector::Thursday},  {"friday", DaySelector::Friday},
      {"saturday", DaySelector::Saturday},  {"sunday", DaySelector::Sunday}};
  auto it = days.find(s);
  if (it == days.end()) throw ConfigError("unknown day selector: " + std::string(s));
  return it->second;
}

inline TimeOfDay parse_time(std::string_view s) {
  TimeOfDay t;
  std::string_view base = s;
  if (base.size() > 2 && base.substr(base.size() - 2) == "pm") {
    t.pm = true;
    base.remove_suffix(2);
  }
  if (base == "T") {
    t.source = TimeOfDay::Source::Clock;
  } else if (base == "N") {
    t.source = TimeOfDay::Source::Numeral;
  } else {
    auto clock = parse_clock(base);
    if (!clock || base.find(':') == std::string_view::npos || t.pm)
      throw ConfigError("bad anchor time: " + std::string(s));
    t.minutes = clock->minutes_of_day();
  }
  return t;
}

}  // namespace detail

// Anchor for a Dynamic rule. Weekdays resolve to the next occurrence of that
// day; the same weekday counts only while its anchor time has not passed.
inline Timestamp resolve_anchor(DaySelector day, int minutes_of_day, Timestamp posted_at) {
  using namespace std::chrono;
  const sys_days today = floor<days>(posted_at);
  sys_days target = today;
  bool weekday_selector = false;
  switch (day) {
    case DaySelector::Today: break;
    case DaySelector::Tomorrow: target = today + days{1}; break;
    case DaySelector::Overmorrow: target = today + days{2}; break;
    default: {
      weekday_selector = true;
      // DaySelector::Monday..Sunday map onto ISO weekday 1..7.
      const unsigned want = static_cast<unsigned>(day) - static_cast<unsigned>(DaySelector::Monday) + 1;
      const unsigned have = weekday{today}.iso_encoding();
      target = today + days{(want + 7 - have) % 7};
    }
  }
  Timestamp anchor = target + minutes{minutes_of_day};
  if (weekday_selector && target == today && anchor < posted_at) anchor += days{7};
  return anchor;
}

class RuleSet {
 public:
  static RuleSet parse(std::istream &in) {
    RuleSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto t = texpr::detail::trim(line);
      if (t.empty() || t.rfind("//", 0) == 0) continue;
      try {
        set.add_line(t);
      } catch (const ConfigError &e) {
        throw ConfigError("rule file line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return set;
  }

  static RuleSet load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read rule file: " + path);
    return parse(in);
  }

  void add_line(std::string_view line) {
    auto space = line.find(' ');
    if (space == std::string_view::npos) throw ConfigError("rule needs a kind and a template");
    std::string_view kind = line.substr(0, space);
    std::string_view rest = texpr::detail::trim(line.substr(space + 1));
    if (kind == "EXACT") {
      auto pos = rest.rfind("UNIT=");
      if (pos == std::string_view::npos) throw ConfigError("EXACT rule without UNIT=");
      ExactRule r;
      r.pattern = detail::parse_template(rest.substr(0, pos));
      if (detail::has_kind(r.pattern, TemplateToken::Kind::Clock))
        throw ConfigError("EXACT templates cannot contain T");
      r.unit_hours = detail::parse_factor(rest.substr(pos + 5));
      r.text = std::string(line);
      exact_.push_back(std::move(r));
    } else if (kind == "DYN") {
      auto pos = rest.rfind("ANCHOR=");
      if (pos == std::string_view::npos) throw ConfigError("DYN rule without ANCHOR=");
      std::string_view anchor = texpr::detail::trim(rest.substr(pos + 7));
      auto at = anchor.find('@');
      if (at == std::string_view::npos) throw ConfigError("ANCHOR must be <day>@<time>");
      DynamicRule r;
      r.trigger = detail::parse_template(rest.substr(0, pos));
      r.day = detail::parse_day(anchor.substr(0, at));
      r.time = detail::parse_time(anchor.substr(at + 1));
      if (r.time.source == TimeOfDay::Source::Clock &&
          !detail::has_kind(r.trigger, TemplateToken::Kind::Clock))
        throw ConfigError("anchor time T needs a T in the template");
      if (r.time.source == TimeOfDay::Source::Numeral &&
          !detail::has_kind(r.trigger, TemplateToken::Kind::Numeral))
        throw ConfigError("anchor time N needs an N in the template");
      r.text = std::string(line);
      dynamic_.push_back(std::move(r));
    } else {
      throw ConfigError("unknown rule kind: " + std::string(kind));
    }
  }

  const std::vector<ExactRule> &exact_rules() const { return exact_; }
  const std::vector<DynamicRule> &dynamic_rules() const { return dynamic_; }
  std::size_t size() const { return exact_.size() + dynamic_.size(); }

  // First matching Exact rule, value N * unit rounded to 2 decimals.
  std::optional<double> apply_exact(const texpr::ExprSpan &span) const {
    const auto tokens = split_whitespace(span.surface);
    for (const auto &r : exact_) {
      detail::Captures cap;
      if (!detail::match_template(r.pattern, tokens, &cap)) continue;
      const double n = cap.numeral ? static_cast<double>(*cap.numeral) : 1.0;
      return round_2dp(n * r.unit_hours);
    }
    return std::nullopt;
  }

  // First matching Dynamic rule, (anchor - posted_at) in hours rounded to 2
  // decimals. May be negative for same-day anchors that have passed.
  std::optional<double> apply_dynamic(const texpr::ExprSpan &span, Timestamp posted_at) const {
    const auto tokens = split_whitespace(span.surface);
    for (const auto &r : dynamic_) {
      detail::Captures cap;
      if (!detail::match_template(r.trigger, tokens, &cap)) continue;
      int minutes = r.time.minutes;
      if (r.time.source != TimeOfDay::Source::Fixed) {
        int hour = 0, minute = 0;
        if (r.time.source == TimeOfDay::Source::Clock) {
          hour = cap.clock->hour;
          minute = cap.clock->minute;
        } else {
          hour = *cap.numeral;
          if (hour > 24) continue;
          hour %= 24;
        }
        if (r.time.pm && hour < 12) hour += 12;
        minutes = hour * 60 + minute;
      }
      const Timestamp anchor = resolve_anchor(r.day, minutes, posted_at);
      return round_hours_2dp(anchor - posted_at);
    }
    return std::nullopt;
  }

  // Evaluates every span (Exact before Dynamic). With at least one match the
  // estimate is the mean of all matched values, clamped at 0 when requested.
  std::optional<RuleEstimate> estimate(const std::vector<texpr::ExprSpan> &spans,
                                       Timestamp posted_at, bool clamp_nonnegative = true) const {
    RuleEstimate est;
    double sum = 0.0;
    for (const auto &span : spans) {
      if (auto v = apply_exact(span)) {
        est.matches.push_back({span, RuleKind::Exact, *v});
        sum += *v;
      } else if (auto d = apply_dynamic(span, posted_at)) {
        est.matches.push_back({span, RuleKind::Dynamic, *d});
        sum += *d;
      }
    }
    if (est.matches.empty()) return std::nullopt;
    est.value_hours = sum / static_cast<double>(est.matches.size());
    if (clamp_nonnegative && est.value_hours < 0.0) est.value_hours = 0.0;
    return est;
  }

 private:
  std::vector<ExactRule> exact_;
  std::vector<DynamicRule> dynamic_;
};

}  // namespace tte::rules
