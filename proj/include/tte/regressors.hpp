#pragma once

// Hourly bag-of-words regressors: OLS linear regression, k-NN local
// regression with information-gain weights, and nearest-neighbor search over
// smoothed word-frequency sequences. Plus the constant mean/median baselines.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tte/corpus.hpp"
#include "tte/features.hpp"
#include "tte/stats.hpp"
#include "tte/time.hpp"

namespace tte::regressors {

class Vocabulary {
 public:
  std::uint32_t intern(const std::string &word) {
    auto [it, fresh] = ids_.emplace(word, static_cast<std::uint32_t>(words_.size()));
    if (fresh) words_.push_back(word);
    return it->second;
  }
  std::optional<std::uint32_t> find(const std::string &word) const {
    auto it = ids_.find(word);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }
  const std::string &word(std::uint32_t id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::string> words_;
};

// Sorted by feature id; values are counts (or presence for k-NN).
struct SparseInstance {
  std::vector<std::pair<std::uint32_t, double>> features;
  double tte_hours = 0.0;
};

struct HourFrame {
  std::string event_id;
  Timestamp frame_end;
  std::map<std::string, int> counts;
  int tweet_count = 0;
  double tte_hours = 0.0;  // event start minus frame_end
};

struct ConstantBaseline {
  double mean_hours = 0.0;
  double median_hours = 0.0;
};

inline ConstantBaseline baseline_fit(const std::vector<double> &training_ttes) {
  if (training_ttes.empty()) throw std::invalid_argument("baseline needs training tweets");
  return {stats::mean(training_ttes), stats::median(training_ttes)};
}

namespace detail {

inline Timestamp floor_hour(Timestamp t) { return std::chrono::floor<std::chrono::hours>(t); }

inline std::vector<std::string> frame_words(const corpus::LabeledTweet &t,
                                            const features::WordFilter &filter) {
  return features::tokenize_words(t.tweet.text, filter);
}

}  // namespace detail

// One frame per clock hour from the first to the last tweet of each event,
// including empty hours. Events appear in first-appearance order.
inline std::vector<HourFrame> build_frames(const std::vector<corpus::LabeledTweet> &tweets,
                                           const corpus::EventIndex &events,
                                           const features::WordFilter &filter = {}) {
  using namespace std::chrono;
  std::vector<HourFrame> out;
  for (const auto &group : corpus::group_by_event(tweets)) {
    const auto &event_id = group.front().tweet.event_id;
    auto ev = events.find(event_id);
    if (ev == events.end()) throw std::invalid_argument("unknown event: " + event_id);
    const Timestamp first = detail::floor_hour(group.front().tweet.posted_at);
    const Timestamp last = detail::floor_hour(group.back().tweet.posted_at);
    const std::size_t base = out.size();
    for (Timestamp h = first; h <= last; h += hours{1}) {
      HourFrame f;
      f.event_id = event_id;
      f.frame_end = h + hours{1};
      f.tte_hours = hours_between(f.frame_end, ev->second.start_time);
      out.push_back(std::move(f));
    }
    for (const auto &t : group) {
      const auto idx = duration_cast<hours>(detail::floor_hour(t.tweet.posted_at) - first).count();
      HourFrame &f = out[base + static_cast<std::size_t>(idx)];
      ++f.tweet_count;
      for (const auto &w : detail::frame_words(t, filter)) ++f.counts[w];
    }
  }
  return out;
}

inline SparseInstance frame_instance(const HourFrame &frame, Vocabulary &vocab) {
  SparseInstance inst;
  inst.tte_hours = frame.tte_hours;
  for (const auto &[w, c] : frame.counts) inst.features.emplace_back(vocab.intern(w), c);
  std::sort(inst.features.begin(), inst.features.end());
  return inst;
}

// One instance per distinct posting minute, aggregating every tweet of the
// event posted in that minute or the 59 minutes before it. The instance TTE
// is that of the latest tweet in the minute. `tweets` must be one event's
// tweets in posting order.
inline std::vector<SparseInstance> minute_shift_instances(
    const std::vector<corpus::LabeledTweet> &tweets, Vocabulary &vocab,
    const features::WordFilter &filter = {}) {
  using namespace std::chrono;
  std::vector<SparseInstance> out;
  std::vector<long long> minute(tweets.size());
  std::vector<std::vector<std::uint32_t>> words(tweets.size());
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    if (i > 0 && tweets[i].tweet.posted_at < tweets[i - 1].tweet.posted_at)
      throw std::invalid_argument("minute_shift_instances needs tweets in posting order");
    minute[i] = floor<minutes>(tweets[i].tweet.posted_at).time_since_epoch().count();
    for (const auto &w : detail::frame_words(tweets[i], filter)) words[i].push_back(vocab.intern(w));
  }
  std::map<std::uint32_t, double> window;
  std::size_t head = 0, tail = 0;  // window = [tail, head)
  while (head < tweets.size()) {
    const long long m = minute[head];
    while (head < tweets.size() && minute[head] == m) {
      for (auto id : words[head]) window[id] += 1.0;
      ++head;
    }
    while (minute[tail] < m - 59) {
      for (auto id : words[tail]) {
        auto it = window.find(id);
        if ((it->second -= 1.0) <= 0.0) window.erase(it);
      }
      ++tail;
    }
    SparseInstance inst;
    inst.tte_hours = tweets[head - 1].tte_hours;
    inst.features.assign(window.begin(), window.end());
    out.push_back(std::move(inst));
  }
  return out;
}

// Drops features whose total count over all instances is below min_count.
inline std::vector<SparseInstance> prune(const std::vector<SparseInstance> &instances, int min_count) {
  if (min_count < 0) throw std::invalid_argument("min_count must be >= 0");
  if (min_count == 0) return instances;
  std::unordered_map<std::uint32_t, double> totals;
  for (const auto &inst : instances)
    for (const auto &[id, v] : inst.features) totals[id] += v;
  std::vector<SparseInstance> out;
  out.reserve(instances.size());
  for (const auto &inst : instances) {
    SparseInstance kept;
    kept.tte_hours = inst.tte_hours;
    for (const auto &f : inst.features)
      if (totals[f.first] >= min_count) kept.features.push_back(f);
    out.push_back(std::move(kept));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear regression.

struct OlsModel {
  double intercept = 0.0;
  std::unordered_map<std::uint32_t, double> weights;
  bool ridge_fallback = false;

  double predict(const SparseInstance &x) const {
    double y = intercept;
    for (const auto &[id, v] : x.features) {
      auto it = weights.find(id);
      if (it != weights.end()) y += it->second * v;
    }
    return y;
  }
};

// Least squares with intercept via the normal equations. A rank-deficient
// Gram matrix gets a 1e-8 ridge term.
inline OlsModel ols_fit(const std::vector<SparseInstance> &instances) {
  std::vector<std::uint32_t> columns;
  for (const auto &inst : instances)
    for (const auto &f : inst.features) columns.push_back(f.first);
  std::sort(columns.begin(), columns.end());
  columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
  const auto p = static_cast<Eigen::Index>(columns.size());
  const auto n = static_cast<Eigen::Index>(instances.size());
  if (n < p + 1) throw std::invalid_argument("OLS needs at least (features + 1) instances");

  std::unordered_map<std::uint32_t, Eigen::Index> col_of;
  for (Eigen::Index j = 0; j < p; ++j) col_of[columns[static_cast<std::size_t>(j)]] = j + 1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &inst = instances[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    for (const auto &[id, v] : inst.features) x(i, col_of[id]) = v;
    y(i) = inst.tte_hours;
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd rhs = x.transpose() * y;
  OlsModel model;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (lu.rank() < gram.rows()) {
    gram.diagonal().array() += 1e-8;
    model.ridge_fallback = true;
  }
  const Eigen::VectorXd beta = gram.ldlt().solve(rhs);
  model.intercept = beta(0);
  for (Eigen::Index j = 0; j < p; ++j) model.weights[columns[static_cast<std::size_t>(j)]] = beta(j + 1);
  return model;
}

// ---------------------------------------------------------------------------
// Local regression.

// Information gain (bits) of feature presence with respect to whole-hour
// TTE bins.
inline std::unordered_map<std::uint32_t, double> ig_weights(const std::vector<SparseInstance> &instances) {
  std::unordered_map<std::uint32_t, double> out;
  if (instances.empty()) return out;
  auto bin_of = [](double tte) { return static_cast<long long>(std::floor(tte)); };
  std::map<long long, double> class_counts;
  std::unordered_map<std::uint32_t, std::map<long long, double>> present;
  for (const auto &inst : instances) {
    const long long b = bin_of(inst.tte_hours);
    class_counts[b] += 1.0;
    for (const auto &[id, v] : inst.features)
      if (v > 0.0) present[id][b] += 1.0;
  }
  auto entropy = [](auto begin, auto end, double total) {
    double h = 0.0;
    for (auto it = begin; it != end; ++it) {
      if (*it > 0.0) {
        const double p = *it / total;
        h -= p * std::log2(p);
      }
    }
    return h;
  };
  const double n = static_cast<double>(instances.size());
  std::vector<double> all;
  for (const auto &[b, c] : class_counts) all.push_back(c);
  const double h_y = entropy(all.begin(), all.end(), n);
  for (const auto &[id, bins] : present) {
    std::vector<double> with, without;
    double n_with = 0.0;
    for (const auto &[b, c] : class_counts) {
      auto it = bins.find(b);
      const double w = it == bins.end() ? 0.0 : it->second;
      with.push_back(w);
      without.push_back(c - w);
      n_with += w;
    }
    const double n_without = n - n_with;
    double h_cond = 0.0;
    if (n_with > 0) h_cond += n_with / n * entropy(with.begin(), with.end(), n_with);
    if (n_without > 0) h_cond += n_without / n * entropy(without.begin(), without.end(), n_without);
    out[id] = std::max(0.0, h_y - h_cond);
  }
  return out;
}

// Weighted overlap distance on binary presence: features present on exactly
// one side add their weight, shared absences add nothing. Unweighted
// features weigh 0.
inline double overlap_distance(const std::vector<std::uint32_t> &a, const std::vector<std::uint32_t> &b,
                               const std::unordered_map<std::uint32_t, double> &weights) {
  auto w = [&](std::uint32_t id) {
    auto it = weights.find(id);
    return it == weights.end() ? 0.0 : it->second;
  };
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i] < b[j])) d += w(a[i++]);
    else if (i == a.size() || b[j] < a[i]) d += w(b[j++]);
    else { ++i; ++j; }
  }
  return d;
}

inline std::vector<std::uint32_t> present_ids(const SparseInstance &x) {
  std::vector<std::uint32_t> ids;
  for (const auto &[id, v] : x.features)
    if (v > 0.0) ids.push_back(id);
  return ids;
}

class KnnRegressor {
 public:
  KnnRegressor(const std::vector<SparseInstance> &training,
               std::unordered_map<std::uint32_t, double> weights, int k)
      : weights_(std::move(weights)), k_(k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    for (const auto &t : training) {
      ids_.push_back(present_ids(t));
      tte_.push_back(t.tte_hours);
    }
  }

  // Mean TTE of the k nearest, including every instance tied with the k-th.
  // With fewer than k instances all of them are used.
  double predict(const SparseInstance &query) const {
    if (ids_.empty()) throw std::invalid_argument("k-NN needs training instances");
    const auto q = present_ids(query);
    std::vector<double> dist(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) dist[i] = overlap_distance(q, ids_[i], weights_);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
    std::vector<double> sorted = dist;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
    const double cutoff = sorted[k - 1];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] <= cutoff) {
        sum += tte_[i];
        ++count;
      }
    }
    return sum / static_cast<double>(count);
  }

 private:
  std::vector<std::vector<std::uint32_t>> ids_;
  std::vector<double> tte_;
  std::unordered_map<std::uint32_t, double> weights_;
  int k_;
};

inline double knn_predict(const SparseInstance &query, const std::vector<SparseInstance> &training,
                          const std::unordered_map<std::uint32_t, double> &weights, int k) {
  return KnnRegressor(training, weights, k).predict(query);
}

// ---------------------------------------------------------------------------
// Time series nearest neighbor.

// Pseudo-exponential moving average with weights 4, 2, 1 for t, t-1, t-2;
// the first two frames renormalize over the weights available.
inline std::vector<double> smooth(const std::vector<double> &x) {
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (t >= 2) out[t] = (4.0 * x[t] + 2.0 * x[t - 1] + x[t - 2]) / 7.0;
    else if (t == 1) out[t] = (4.0 * x[t] + 2.0 * x[t - 1]) / 6.0;
    else out[t] = x[t];
  }
  return out;
}

struct FrameSequence {
  std::string event_id;
  std::vector<double> values;  // frame-major: L frames x vocabulary
  double tte_hours = 0.0;      // of the last frame
};

// The `size` words with the highest overall frequency (total count over
// total tweets), ties broken alphabetically.
inline std::vector<std::string> ts_vocabulary(const std::vector<HourFrame> &frames, std::size_t size) {
  std::map<std::string, double> counts;
  for (const auto &f : frames)
    for (const auto &[w, c] : f.counts) counts[w] += c;
  std::vector<std::pair<std::string, double>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](auto &a, auto &b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < size; ++i) out.push_back(ranked[i].first);
  return out;
}

// Relative per-frame frequencies (count / tweets, 0 for empty frames),
// smoothed along the event's frame series, cut into sliding windows of
// `length` frames. `frames` must be one event's contiguous frames.
inline std::vector<FrameSequence> build_sequences(const std::vector<HourFrame> &frames,
                                                  const std::vector<std::string> &vocabulary,
                                                  int length) {
  if (length < 1) throw std::invalid_argument("sequence length must be >= 1");
  const std::size_t v = vocabulary.size(), T = frames.size(), L = static_cast<std::size_t>(length);
  std::vector<std::vector<double>> smoothed(v);
  for (std::size_t w = 0; w < v; ++w) {
    std::vector<double> freq(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      if (frames[t].tweet_count == 0) continue;
      auto it = frames[t].counts.find(vocabulary[w]);
      if (it != frames[t].counts.end()) freq[t] = it->second / static_cast<double>(frames[t].tweet_count);
    }
    smoothed[w] = smooth(freq);
  }
  std::vector<FrameSequence> out;
  for (std::size_t end = L; end <= T; ++end) {
    FrameSequence s;
    s.event_id = frames[end - 1].event_id;
    s.tte_hours = frames[end - 1].tte_hours;
    s.values.reserve(L * v);
    for (std::size_t t = end - L; t < end; ++t)
      for (std::size_t w = 0; w < v; ++w) s.values.push_back(smoothed[w][t]);
    out.push_back(std::move(s));
  }
  return out;
}

inline double squared_distance(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) throw std::invalid_argument("sequence dimensions differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

// k = 1 Euclidean nearest neighbor; exact ties average their TTEs.
inline double ts_knn_predict(const FrameSequence &query, const std::vector<FrameSequence> &training) {
  if (training.empty()) throw std::invalid_argument("time series k-NN needs training sequences");
  double best = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto &s : training) {
    const double d = squared_distance(query.values, s.values);
    if (d < best) {
      best = d;
      sum = s.tte_hours;
      count = 1;
    } else if (d == best) {
      sum += s.tte_hours;
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace tte::regressors
