#pragma once

// Temporal expression patterns: a lexicon plus generative rules expand into a
// token trie; extraction is a greedy left-to-right longest match.
//
// Grammar file, one rule per line, slots separated by " + ":
//   [a | b]        required alternatives (an alternative may span words)
//   (a | b)        optional alternatives
//   N{lo..hi}      numeral slot, 1 <= lo <= hi <= 120; "(N{lo..hi})" is optional
//   word           a single required literal
// Blank lines and lines starting with "//" are ignored.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tte/errors.hpp"
#include "tte/feature_key.hpp"
#include "tte/text.hpp"

namespace tte::texpr {

inline constexpr int kMaxNumeral = 120;

struct Lexicon {
  std::vector<std::string> entries;
};

struct Slot {
  enum class Kind { Literal, Numeral };
  Kind kind = Kind::Literal;
  std::vector<std::vector<std::string>> alternatives;  // tokenized; Literal only
  bool optional = false;
  int lo = 0, hi = 0;  // Numeral only

  std::size_t choice_count() const {
    std::size_t n = kind == Kind::Numeral ? static_cast<std::size_t>(hi - lo + 1)
                                          : alternatives.size();
    return n + (optional ? 1 : 0);
  }
};

struct GenerativeRule {
  std::vector<Slot> slots;

  // Number of token sequences this rule expands to, before de-duplication.
  std::size_t expansion_size() const {
    std::size_t n = 1;
    for (const auto &s : slots) n *= s.choice_count();
    return n;
  }
};

struct ExprSpan {
  std::size_t start_token = 0;
  std::size_t end_token = 0;  // exclusive
  std::string surface;

  friend bool operator==(const ExprSpan &, const ExprSpan &) = default;
};

// Deduplicated lexicon, preserving first-occurrence order.
inline Lexicon make_lexicon(const std::vector<std::string> &lines) {
  Lexicon lex;
  std::unordered_map<std::string, bool> seen;
  for (const auto &line : lines) {
    std::string entry = normalize(line);
    if (entry.empty()) continue;
    if (seen.emplace(entry, true).second) lex.entries.push_back(std::move(entry));
  }
  return lex;
}

inline Lexicon load_lexicon(const std::string &path) {
  return make_lexicon(read_list_file(path));
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits on `sep` outside [] and () groups.
inline std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  int depth = 0;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '[' || c == '(') ++depth;
    else if (c == ']' || c == ')') --depth;
    else if (c == sep && depth == 0) {
      parts.push_back(s.substr(begin, i - begin));
      begin = i + 1;
    }
  }
  parts.push_back(s.substr(begin));
  return parts;
}

inline bool parse_int(std::string_view s, int *out) {
  if (s.empty() || s.size() > 6) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  *out = v;
  return true;
}

inline bool parse_numeral_slot(std::string_view body, Slot *slot) {
  // N{lo..hi}
  if (body.size() < 6 || body[0] != 'N' || body[1] != '{' || body.back() != '}') return false;
  std::string_view range = body.substr(2, body.size() - 3);
  std::size_t dots = range.find("..");
  if (dots == std::string_view::npos) throw ConfigError("numeral slot needs lo..hi: " + std::string(body));
  int lo, hi;
  if (!parse_int(trim(range.substr(0, dots)), &lo) || !parse_int(trim(range.substr(dots + 2)), &hi))
    throw ConfigError("numeral slot bounds must be integers: " + std::string(body));
  if (lo < 1 || hi > kMaxNumeral || lo > hi)
    throw ConfigError("numeral range outside [1," + std::to_string(kMaxNumeral) +
                      "]: " + std::string(body));
  slot->kind = Slot::Kind::Numeral;
  slot->lo = lo;
  slot->hi = hi;
  return true;
}

inline Slot parse_slot(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ConfigError("empty slot");
  Slot slot;
  std::string_view body = text;
  if (text.front() == '[' || text.front() == '(') {
    const char close = text.front() == '[' ? ']' : ')';
    if (text.back() != close) throw ConfigError("unbalanced slot: " + std::string(text));
    slot.optional = text.front() == '(';
    body = trim(text.substr(1, text.size() - 2));
  }
  if (parse_numeral_slot(body, &slot)) return slot;
  for (auto alt : split_top_level(body, '|')) {
    auto tokens = split_whitespace(normalize(trim(alt)));
    if (tokens.empty()) throw ConfigError("empty alternative in slot: " + std::string(text));
    slot.alternatives.push_back(std::move(tokens));
  }
  return slot;
}

}  // namespace detail

inline GenerativeRule parse_rule(std::string_view line) {
  GenerativeRule rule;
  for (auto part : detail::split_top_level(line, '+')) rule.slots.push_back(detail::parse_slot(part));
  if (rule.slots.empty()) throw ConfigError("rule without slots");
  return rule;
}

inline std::vector<GenerativeRule> parse_grammar(std::istream &in) {
  std::vector<GenerativeRule> rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty() || t.rfind("//", 0) == 0) continue;
    try {
      rules.push_back(parse_rule(t));
    } catch (const ConfigError &e) {
      throw ConfigError("grammar line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rules;
}

inline std::vector<GenerativeRule> load_grammar(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read grammar file: " + path);
  return parse_grammar(in);
}

// Immutable after construction; safe for concurrent extraction.
class CompiledPatternSet {
 public:
  // Returns false when the pattern (in match form) is already present.
  bool add(const std::vector<std::string> &tokens) {
    ++raw_count_;
    if (tokens.empty()) return false;
    std::uint32_t node = 0;
    for (const auto &tok : tokens) {
      std::string form = match_form(tok);
      auto [vit, fresh] = vocab_.emplace(std::move(form), static_cast<std::uint32_t>(vocab_.size()));
      const std::uint32_t id = vit->second;
      auto &children = nodes_[node].children;
      auto cit = std::lower_bound(children.begin(), children.end(), id,
                                  [](const auto &p, std::uint32_t v) { return p.first < v; });
      if (cit != children.end() && cit->first == id) {
        node = cit->second;
      } else {
        const auto child = static_cast<std::uint32_t>(nodes_.size());
        children.insert(cit, {id, child});
        nodes_.emplace_back();
        node = child;
      }
    }
    if (nodes_[node].pattern >= 0) return false;
    nodes_[node].pattern = static_cast<std::int32_t>(patterns_.size());
    patterns_.push_back(join(tokens, " "));
    max_len_ = std::max(max_len_, tokens.size());
    return true;
  }

  std::size_t size() const { return patterns_.size(); }
  std::size_t raw_count() const { return raw_count_; }
  std::size_t max_pattern_len() const { return max_len_; }
  const std::vector<std::string> &patterns() const { return patterns_; }

  // Length of the longest pattern matching `forms` at `start`; 0 if none.
  // `forms` must already be in match form.
  std::size_t longest_match(std::span<const std::string> forms, std::size_t start) const {
    std::uint32_t node = 0;
    std::size_t best = 0;
    for (std::size_t i = start; i < forms.size(); ++i) {
      auto vit = vocab_.find(forms[i]);
      if (vit == vocab_.end()) break;
      const auto &children = nodes_[node].children;
      auto cit = std::lower_bound(children.begin(), children.end(), vit->second,
                                  [](const auto &p, std::uint32_t v) { return p.first < v; });
      if (cit == children.end() || cit->first != vit->second) break;
      node = cit->second;
      if (nodes_[node].pattern >= 0) best = i - start + 1;
    }
    return best;
  }

  bool contains(const std::vector<std::string> &tokens) const {
    std::vector<std::string> forms;
    for (const auto &t : tokens) forms.push_back(match_form(t));
    return !forms.empty() && longest_match(forms, 0) == forms.size();
  }

 private:
  struct Node {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> children;  // sorted by token id
    std::int32_t pattern = -1;
  };
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::vector<Node> nodes_{Node{}};
  std::vector<std::string> patterns_;
  std::size_t raw_count_ = 0;
  std::size_t max_len_ = 0;
};

namespace detail {

inline void expand_rule(const GenerativeRule &rule, std::size_t slot,
                        std::vector<std::string> &prefix, CompiledPatternSet &out) {
  if (slot == rule.slots.size()) {
    out.add(prefix);
    return;
  }
  const Slot &s = rule.slots[slot];
  const std::size_t mark = prefix.size();
  if (s.optional) expand_rule(rule, slot + 1, prefix, out);
  if (s.kind == Slot::Kind::Numeral) {
    for (int n = s.lo; n <= s.hi; ++n) {
      prefix.push_back(std::to_string(n));
      expand_rule(rule, slot + 1, prefix, out);
      prefix.resize(mark);
    }
  } else {
    for (const auto &alt : s.alternatives) {
      prefix.insert(prefix.end(), alt.begin(), alt.end());
      expand_rule(rule, slot + 1, prefix, out);
      prefix.resize(mark);
    }
  }
}

}  // namespace detail

// Deterministic: lexicon entries first, then rules in order, each rule in
// slot-major order. Duplicates (after clock canonicalization) are merged.
inline CompiledPatternSet expand(const Lexicon &lexicon, std::span<const GenerativeRule> rules) {
  CompiledPatternSet set;
  for (const auto &entry : lexicon.entries) set.add(split_whitespace(entry));
  std::vector<std::string> prefix;
  for (const auto &rule : rules) {
    if (rule.slots.empty()) throw ConfigError("rule without slots");
    for (const auto &s : rule.slots) {
      if (s.kind == Slot::Kind::Numeral && (s.lo < 1 || s.hi > kMaxNumeral || s.lo > s.hi))
        throw ConfigError("numeral range outside [1,120]");
    }
    detail::expand_rule(rule, 0, prefix, set);
  }
  return set;
}

inline std::vector<ExprSpan> extract(const std::vector<std::string> &tokens,
                                     const CompiledPatternSet &patterns) {
  std::vector<std::string> forms;
  forms.reserve(tokens.size());
  for (const auto &t : tokens) forms.push_back(match_form(t));
  std::vector<ExprSpan> spans;
  std::size_t i = 0;
  while (i < forms.size()) {
    const std::size_t len = patterns.longest_match(forms, i);
    if (len == 0) {
      ++i;
      continue;
    }
    spans.push_back({i, i + len, join(tokens, " ", i, i + len)});
    i += len;
  }
  return spans;
}

inline std::vector<FeatureKey> tfeat_skipgrams(const std::vector<ExprSpan> &spans, int n) {
  if (n < 1 || n > 7) throw std::invalid_argument("feature length must be in [1,7]");
  std::vector<std::string> surfaces;
  surfaces.reserve(spans.size());
  for (const auto &s : spans) surfaces.push_back(s.surface);
  return skipgrams(surfaces, n, FeatureKind::Temporal, ", ");
}

}  // namespace tte::texpr
