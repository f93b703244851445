#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace tte {

enum class Aggregate { Mean, Median };

inline std::string_view to_string(Aggregate a) { return a == Aggregate::Mean ? "mean" : "median"; }

inline Aggregate parse_aggregate(std::string_view s) {
  if (s == "mean" || s == "MEAN") return Aggregate::Mean;
  if (s == "median" || s == "MEDIAN") return Aggregate::Median;
  throw std::invalid_argument("expected mean or median, got '" + std::string(s) + "'");
}

namespace stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty series");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Even length: average of the two middle values.
inline double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty series");
  const std::size_t mid = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
  const double upper = xs[mid];
  if (xs.size() % 2 == 1) return upper;
  const double lower = *std::max_element(xs.begin(), xs.begin() + mid);
  return (lower + upper) / 2.0;
}

inline double median(std::span<const double> xs) { return median(std::vector<double>(xs.begin(), xs.end())); }

inline double aggregate(std::span<const double> xs, Aggregate fn) {
  return fn == Aggregate::Mean ? mean(xs) : median(xs);
}

// Population standard deviation (divides by N).
inline double population_stddev(std::span<const double> xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

// Sample standard deviation (divides by N - 1).
inline double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample stddev needs two values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Nearest-rank empirical quantile on ascending-sorted data: the value at
// rank ceil(p * N) (1-based), with rank clamped to [1, N].
inline double nearest_rank_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty series");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace stats
}  // namespace tte
