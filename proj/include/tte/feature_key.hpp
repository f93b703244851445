#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tte {

enum class FeatureKind { Temporal, Word };

inline std::string_view to_string(FeatureKind k) {
  return k == FeatureKind::Temporal ? "TEMPORAL" : "WORD";
}

struct FeatureKey {
  FeatureKind kind = FeatureKind::Word;
  std::string surface;

  friend bool operator==(const FeatureKey &, const FeatureKey &) = default;
  friend auto operator<=>(const FeatureKey &, const FeatureKey &) = default;
};

struct FeatureKeyHash {
  std::size_t operator()(const FeatureKey &k) const noexcept {
    std::size_t h = std::hash<std::string>{}(k.surface);
    return h ^ (static_cast<std::size_t>(k.kind) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  }
};

// Calls fn(indices) for every strictly increasing index sequence of length
// 1..max_len over [0, m). Sequences are emitted shortest first, then in
// lexicographic order.
template <typename Fn>
void for_each_subsequence(std::size_t m, std::size_t max_len, Fn &&fn) {
  std::vector<std::size_t> idx;
  for (std::size_t len = 1; len <= max_len && len <= m; ++len) {
    idx.resize(len);
    for (std::size_t i = 0; i < len; ++i) idx[i] = i;
    while (true) {
      fn(static_cast<const std::vector<std::size_t> &>(idx));
      std::size_t pos = len;
      while (pos > 0 && idx[pos - 1] == m - len + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < len; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

// Order-preserving skipgrams of 1..n items joined by `sep`.
inline std::vector<FeatureKey> skipgrams(const std::vector<std::string> &items, int n,
                                         FeatureKind kind, std::string_view sep) {
  std::vector<FeatureKey> out;
  if (n < 1) return out;
  for_each_subsequence(items.size(), static_cast<std::size_t>(n),
                       [&](const std::vector<std::size_t> &idx) {
                         std::string key;
                         for (std::size_t i = 0; i < idx.size(); ++i) {
                           if (i) key.append(sep);
                           key.append(items[idx[i]]);
                         }
                         out.push_back({kind, std::move(key)});
                       });
  return out;
}

}  // namespace tte
