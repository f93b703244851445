#pragma once

// Text normalization and tokenization shared by every downstream module.

#include <cctype>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tte/errors.hpp"

namespace tte {

namespace detail {

inline bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace detail

// ASCII lowercasing plus the Latin-1 supplement capitals (U+00C0..U+00DE,
// except U+00D7), which covers Dutch diacritics.
inline std::string to_lower_utf8(std::string_view text) {
  std::string out(text);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto c = static_cast<unsigned char>(out[i]);
    if (c < 0x80) {
      out[i] = static_cast<char>(std::tolower(c));
    } else if (c == 0xC3 && i + 1 < out.size()) {
      auto n = static_cast<unsigned char>(out[i + 1]);
      if (n >= 0x80 && n <= 0x9E && n != 0x97) out[i + 1] = static_cast<char>(n + 0x20);
      ++i;
    }
  }
  return out;
}

// Lowercase, collapse whitespace runs to one space, trim.
inline std::string normalize(std::string_view text) {
  std::string lowered = to_lower_utf8(text);
  std::string out;
  out.reserve(lowered.size());
  bool pending_space = false;
  for (char ch : lowered) {
    if (detail::is_space(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t begin = i;
    while (i < text.size() && !detail::is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i > begin) out.emplace_back(text.substr(begin, i - begin));
  }
  return out;
}

// Strips punctuation from token edges. Interior punctuation survives, so
// clock times ("14.30", "20:45") and abbreviations ("m.i.v") stay intact.
// A leading '#', '@' or apostrophe is kept (hashtags, mentions, "'s avonds").
inline std::string strip_token_edges(std::string_view token) {
  std::size_t begin = 0, end = token.size();
  while (end > begin && detail::is_ascii_punct(static_cast<unsigned char>(token[end - 1]))) --end;
  while (begin < end) {
    auto c = static_cast<unsigned char>(token[begin]);
    if (!detail::is_ascii_punct(c) || c == '#' || c == '@' || c == '\'') break;
    ++begin;
  }
  return std::string(token.substr(begin, end - begin));
}

// Normalizes, splits on whitespace and strips token edges. Tokens that are
// pure punctuation disappear.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto &raw : split_whitespace(normalize(text))) {
    std::string tok = strip_token_edges(raw);
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  return out;
}

struct ClockTime {
  int hour = 0;
  int minute = 0;
  int minutes_of_day() const { return hour * 60 + minute; }
};

// Recognizes "H:MM", "HH:MM", "H.MM", "HH.MM" with hour 0..24 and minute
// 00..59 ("24.00" is accepted as midnight notation).
inline std::optional<ClockTime> parse_clock(std::string_view tok) {
  if (tok.size() < 4 || tok.size() > 5) return std::nullopt;
  std::size_t sep = tok.size() - 3;
  if (tok[sep] != ':' && tok[sep] != '.') return std::nullopt;
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (i != sep && !detail::is_digit(tok[i])) return std::nullopt;
  }
  int hour = 0;
  for (std::size_t i = 0; i < sep; ++i) hour = hour * 10 + (tok[i] - '0');
  int minute = (tok[sep + 1] - '0') * 10 + (tok[sep + 2] - '0');
  if (hour > 24 || minute > 59 || (hour == 24 && minute != 0)) return std::nullopt;
  return ClockTime{hour % 24, minute};
}

// Token form used for pattern matching: every clock notation collapses to a
// single synthetic token.
inline constexpr std::string_view kClockToken = "<time>";

inline std::string match_form(std::string_view tok) {
  if (parse_clock(tok)) return std::string(kClockToken);
  return std::string(tok);
}

inline std::string join(const std::vector<std::string> &parts,
                        std::string_view sep, std::size_t begin = 0,
                        std::size_t end = std::string::npos) {
  if (end > parts.size()) end = parts.size();
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

// Reads a UTF-8 list file: one entry per line, normalized; blank lines and
// lines starting with "//" are skipped.
inline std::vector<std::string> read_list_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read list file: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string entry = normalize(line);
    if (entry.empty() || entry.rfind("//", 0) == 0) continue;
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::unordered_set<std::string> read_word_set(const std::string &path) {
  auto entries = read_list_file(path);
  return {entries.begin(), entries.end()};
}

}  // namespace tte
