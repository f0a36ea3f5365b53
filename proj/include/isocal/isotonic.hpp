#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "isocal/error.hpp"

namespace isocal {

/// A finite, non-empty vector of review-scale scores indexed by item.
class ScoreVector {
 public:
  ScoreVector() = default;

  explicit ScoreVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "score vector must have at least one entry");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "score at index " + std::to_string(i) + " is not finite");
      }
    }
  }

  ScoreVector(std::initializer_list<double> values) : ScoreVector(std::vector<double>(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

 private:
  std::vector<double> values_;
};

/// An ordering of a set of item indices, best first.
class Ranking {
 public:
  Ranking() = default;

  explicit Ranking(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<std::size_t> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::kNotAPermutation, "ranking lists an item more than once");
    }
  }

  Ranking(std::initializer_list<std::size_t> order)
      : Ranking(std::vector<std::size_t>(order)) {}

  static Ranking identity(std::size_t n) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    return Ranking(std::move(order));
  }

  /// Items of `scope` sorted by descending score, ties by ascending index.
  static Ranking by_descending_score(std::span<const double> scores,
                                     std::vector<std::size_t> scope) {
    std::stable_sort(scope.begin(), scope.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return a < b;
    });
    return Ranking(std::move(scope));
  }

  std::size_t size() const noexcept { return order_.size(); }
  std::size_t operator[](std::size_t k) const { return order_[k]; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }

  /// The permuted item set in ascending order.
  std::vector<std::size_t> scope() const {
    std::vector<std::size_t> s = order_;
    std::sort(s.begin(), s.end());
    return s;
  }

  /// True iff this ranking is a permutation of {0, ..., n-1}.
  bool is_permutation_of(std::size_t n) const {
    if (order_.size() != n) return false;
    for (std::size_t i : order_) {
      if (i >= n) return false;
    }
    return true;
  }

  /// Relative order of the items in `items`, which must all be ranked here.
  Ranking restricted_to(std::span<const std::size_t> items) const {
    std::vector<std::size_t> wanted(items.begin(), items.end());
    std::sort(wanted.begin(), wanted.end());
    std::vector<std::size_t> out;
    out.reserve(wanted.size());
    for (std::size_t i : order_) {
      if (std::binary_search(wanted.begin(), wanted.end(), i)) out.push_back(i);
    }
    if (out.size() != wanted.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "ranking does not cover every item of the requested subset");
    }
    return Ranking(std::move(out));
  }

  friend bool operator==(const Ranking&, const Ranking&) = default;
  friend auto operator<=>(const Ranking& a, const Ranking& b) { return a.order_ <=> b.order_; }

 private:
  std::vector<std::size_t> order_;
};

/// Pool-adjacent-violators for a non-increasing fit. Returns the least-squares
/// projection of `v` onto { r : r_0 >= r_1 >= ... }.
inline std::vector<double> pava_descending(std::span<const double> v) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> stack;
  stack.reserve(v.size());
  for (double x : v) {
    stack.push_back({x, 1});
    while (stack.size() > 1 && stack[stack.size() - 2].mean() < stack.back().mean()) {
      Block top = stack.back();
      stack.pop_back();
      stack.back().sum += top.sum;
      stack.back().count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const Block& b : stack) out.insert(out.end(), b.count, b.mean());
  return out;
}

/// Least-squares fit of `y` subject to r[pi[0]] >= r[pi[1]] >= ...
inline ScoreVector isotonic_fit(const ScoreVector& y, const Ranking& pi) {
  if (pi.size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "ranking has " + std::to_string(pi.size()) + " items but score vector has " +
                    std::to_string(y.size()));
  }
  if (!pi.is_permutation_of(y.size())) {
    throw Error(ErrorCode::kNotAPermutation, "ranking is not a permutation of the score indices");
  }
  std::vector<double> permuted(y.size());
  for (std::size_t k = 0; k < pi.size(); ++k) permuted[k] = y[pi[k]];
  std::vector<double> fitted = pava_descending(permuted);
  std::vector<double> out(y.size());
  for (std::size_t k = 0; k < pi.size(); ++k) out[pi[k]] = fitted[k];
  return ScoreVector(std::move(out));
}

inline ScoreVector project_descending_cone(const ScoreVector& a) {
  return ScoreVector(pava_descending(a.values()));
}

/// Fits the entries of `scores` listed in `ranking` (a subset of indices)
/// under that ranking and writes the fitted values into `out`. Other entries
/// of `out` are left untouched.
inline void fit_subset(std::span<const double> scores, const Ranking& ranking,
                       std::span<double> out) {
  std::vector<double> permuted(ranking.size());
  for (std::size_t k = 0; k < ranking.size(); ++k) permuted[k] = scores[ranking[k]];
  std::vector<double> fitted = pava_descending(permuted);
  for (std::size_t k = 0; k < ranking.size(); ++k) out[ranking[k]] = fitted[k];
}

inline constexpr std::size_t kBruteForceProjectionCap = 8;

/// Reference projection by exhaustive enumeration of contiguous poolings in
/// ranking order: each of the 2^(n-1) ways to cut the ranked sequence into
/// runs gives a candidate with run means; the best feasible candidate is the
/// projection. Independent of PAVA and intended for tests.
inline ScoreVector brute_force_projection(const ScoreVector& y, const Ranking& pi,
                                          double resolution) {
  const std::size_t n = y.size();
  if (n > kBruteForceProjectionCap) {
    throw Error(ErrorCode::kBudgetExceeded,
                "brute-force projection is limited to " +
                    std::to_string(kBruteForceProjectionCap) + " items, got " + std::to_string(n));
  }
  if (!pi.is_permutation_of(n)) {
    throw Error(ErrorCode::kNotAPermutation, "ranking is not a permutation of the score indices");
  }
  std::vector<double> seq(n);
  for (std::size_t k = 0; k < n; ++k) seq[k] = y[pi[k]];

  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> best(n);
  std::vector<double> cand(n);
  const std::size_t cuts = n - 1;
  for (std::size_t mask = 0; mask < (std::size_t{1} << cuts); ++mask) {
    std::size_t start = 0;
    double prev_mean = std::numeric_limits<double>::infinity();
    bool feasible = true;
    for (std::size_t k = 0; k < n && feasible; ++k) {
      const bool cut_after = (k + 1 == n) || (mask >> k & 1U);
      if (!cut_after) continue;
      double sum = 0.0;
      for (std::size_t t = start; t <= k; ++t) sum += seq[t];
      const double mean = sum / static_cast<double>(k + 1 - start);
      if (mean > prev_mean + resolution) feasible = false;
      for (std::size_t t = start; t <= k; ++t) cand[t] = mean;
      prev_mean = mean;
      start = k + 1;
    }
    if (!feasible) continue;
    double sse = 0.0;
    for (std::size_t k = 0; k < n; ++k) sse += (seq[k] - cand[k]) * (seq[k] - cand[k]);
    if (sse < best_sse) {
      best_sse = sse;
      best = cand;
    }
  }
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[pi[k]] = best[k];
  return ScoreVector(std::move(out));
}

}  // namespace isocal
