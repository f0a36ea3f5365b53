#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isocal/error.hpp"
#include "isocal/ownership.hpp"
#include "isocal/random.hpp"

namespace isocal {

/// Convex, nondecreasing block-size score with w(0) = 0.
struct WellnessFunction {
  std::string name;
  std::function<double(double)> evaluate;
  std::function<double(double)> left_derivative;

  double operator()(double x) const { return evaluate(x); }

  /// Checks w(0) = 0 and nonnegative first and second differences on 0..n.
  void validate(std::size_t n) const {
    if (evaluate(0.0) != 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "wellness function " + name + " has w(0) != 0");
    }
    for (std::size_t x = 1; x <= n; ++x) {
      const double d1 = evaluate(static_cast<double>(x)) - evaluate(static_cast<double>(x - 1));
      if (d1 < -1e-12) {
        throw Error(ErrorCode::kInvalidArgument, "wellness function " + name + " decreases at " +
                                                     std::to_string(x));
      }
      if (x >= 2) {
        const double d2 = evaluate(static_cast<double>(x)) -
                          2.0 * evaluate(static_cast<double>(x - 1)) +
                          evaluate(static_cast<double>(x - 2));
        if (d2 < -1e-12) {
          throw Error(ErrorCode::kInvalidArgument, "wellness function " + name +
                                                       " is not convex at " + std::to_string(x));
        }
      }
    }
  }

  /// w(x) = x^alpha, alpha >= 1.
  static WellnessFunction power(double alpha) {
    if (!(alpha >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "power wellness needs alpha >= 1");
    return {"x^" + trim(alpha), [alpha](double x) { return std::pow(x, alpha); },
            [alpha](double x) { return alpha * std::pow(x, alpha - 1.0); }};
  }

  /// Number of within-block item pairs, up to scale: sum of |S_k|^2.
  static WellnessFunction comparison_focused() {
    WellnessFunction w = power(2.0);
    w.name = "comparison";
    return w;
  }

  /// max(x - 1, 0): the objective becomes n - K.
  static WellnessFunction size_focused() {
    return {"size", [](double x) { return std::max(x - 1.0, 0.0); },
            [](double x) { return x > 1.0 ? 1.0 : 0.0; }};
  }

 private:
  static std::string trim(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }
};

inline double objective(const Partition& p, const WellnessFunction& w) {
  double total = 0.0;
  for (const ItemSet& b : p.blocks()) total += w(static_cast<double>(b.size()));
  return total;
}

struct PartitionObjectiveReport {
  double objective_value = 0.0;
  std::vector<std::size_t> block_sizes;
  /// Smallest common-owner count over multi-item blocks; empty when every
  /// block is a singleton (the partition is then L-strong for every L).
  std::optional<std::size_t> strongness;
  std::string method;
  std::string wellness;
};

inline std::optional<std::size_t> strongness_of(const Partition& p) {
  std::optional<std::size_t> s;
  for (std::size_t k = 0; k < p.num_blocks(); ++k) {
    if (p.block(k).size() > 1) {
      const std::size_t t = p.common_owners(k).size();
      s = s ? std::min(*s, t) : t;
    }
  }
  return s;
}

inline PartitionObjectiveReport report_partition(const Partition& p, const WellnessFunction& w,
                                                 std::string method) {
  return {objective(p, w), p.block_sizes(), strongness_of(p), std::move(method), w.name};
}

namespace detail {

inline void append_unowned_singletons(const OwnershipGraph& g, std::vector<char>& covered,
                                      std::vector<ItemSet>& blocks) {
  for (ItemId i = 0; i < g.num_items(); ++i) {
    if (!covered[i]) {
      blocks.push_back({i});
      covered[i] = 1;
    }
  }
}

}  // namespace detail

/// Repeatedly emits the largest residual item set of any owner (ties to the
/// smallest owner id) until every owned item is covered; items nobody owns
/// become trailing singletons. O(N log m) for N edges.
inline Partition greedy_partition(const OwnershipGraph& g) {
  const std::size_t m = g.num_owners();
  const std::size_t n = g.num_items();
  // Flat copy of the item -> owners lists; the inner loop is bound by memory
  // latency and the nested vectors cost an extra indirection per item.
  std::vector<std::uint32_t> offset(n + 1, 0), adjacent;
  adjacent.reserve(g.num_edges());
  for (ItemId i = 0; i < n; ++i) {
    for (OwnerId j : g.owners_of(i)) adjacent.push_back(static_cast<std::uint32_t>(j));
    offset[i + 1] = static_cast<std::uint32_t>(adjacent.size());
  }
  std::vector<std::uint32_t> residual(m);
  std::size_t top = 0;
  for (OwnerId j = 0; j < m; ++j) {
    residual[j] = static_cast<std::uint32_t>(g.items_of(j).size());
    top = std::max<std::size_t>(top, residual[j]);
  }
  // Owners start in the bucket of their initial residual and are only moved
  // down when that bucket is reached, at which point the live entries are
  // sorted by id. Residuals only shrink, so nothing is ever added to the
  // bucket being drained.
  std::vector<std::vector<std::uint32_t>> bucket(top + 1);
  for (OwnerId j = 0; j < m; ++j) {
    if (residual[j] > 0) bucket[residual[j]].push_back(static_cast<std::uint32_t>(j));
  }
  std::vector<char> covered(n, 0);
  std::vector<ItemSet> blocks;
  for (; top > 0; --top) {
    auto& b = bucket[top];
    std::size_t live = 0;
    for (std::uint32_t j : b) {
      if (residual[j] == top) {
        b[live++] = j;
      } else if (residual[j] > 0) {
        bucket[residual[j]].push_back(j);
      }
    }
    b.resize(live);
    std::sort(b.begin(), b.end());
    for (const std::uint32_t best : b) {
      if (residual[best] != top) {
        if (residual[best] > 0) bucket[residual[best]].push_back(best);
        continue;
      }
      ItemSet block;
      block.reserve(top);
      for (ItemId i : g.items_of(best)) {
        if (covered[i]) continue;
        covered[i] = 1;
        block.push_back(i);
        for (std::uint32_t e = offset[i]; e < offset[i + 1]; ++e) {
          if (adjacent[e] != best) --residual[adjacent[e]];
        }
      }
      residual[best] = 0;
      blocks.push_back(std::move(block));
    }
    std::vector<std::uint32_t>().swap(b);
  }
  detail::append_unowned_singletons(g, covered, blocks);
  return Partition(g, std::move(blocks));
}

/// Greedy on the L -> 1 reduced graph; the blocks are L-strong in `g`.
inline Partition greedy_partition_l(const OwnershipGraph& g, std::size_t L,
                                    double budget = kDefaultReductionBudget) {
  if (L == 1) return greedy_partition(g);
  const ReducedGraph reduced = reduce_l_to_1(g, L, budget);
  const Partition on_reduced = greedy_partition(reduced.graph);
  return Partition(g, on_reduced.blocks());
}

/// Picks a uniformly random owner among those with items left, emits its
/// residual set, and repeats. Always 1-strong; deterministic in `seed`.
inline Partition random_partition(const OwnershipGraph& g, std::uint64_t seed) {
  const std::size_t m = g.num_owners();
  Rng rng = make_rng(seed, {0x72616e64ULL});
  std::vector<std::size_t> residual(m);
  std::vector<OwnerId> active;
  std::vector<std::size_t> pos(m, static_cast<std::size_t>(-1));
  for (OwnerId j = 0; j < m; ++j) {
    residual[j] = g.items_of(j).size();
    if (residual[j] > 0) {
      pos[j] = active.size();
      active.push_back(j);
    }
  }
  auto deactivate = [&](OwnerId j) {
    const std::size_t at = pos[j];
    active[at] = active.back();
    pos[active[at]] = at;
    active.pop_back();
    pos[j] = static_cast<std::size_t>(-1);
  };
  std::vector<char> covered(g.num_items(), 0);
  std::vector<ItemSet> blocks;
  while (!active.empty()) {
    const OwnerId pick = active[uniform_index(rng, active.size())];
    ItemSet block;
    for (ItemId i : g.items_of(pick)) {
      if (covered[i]) continue;
      covered[i] = 1;
      block.push_back(i);
      for (OwnerId j : g.owners_of(i)) {
        if (j != pick && --residual[j] == 0) deactivate(j);
      }
    }
    residual[pick] = 0;
    deactivate(pick);
    blocks.push_back(std::move(block));
  }
  detail::append_unowned_singletons(g, covered, blocks);
  return Partition(g, std::move(blocks));
}

inline constexpr std::size_t kBruteForcePartitionCap = 12;

/// Exact maximizer of the objective over all L-strong partitions, by
/// enumerating restricted growth strings and pruning blocks whose common
/// owner set falls below L. Ties resolve to the first partition in
/// restricted-growth order.
inline Partition brute_force_optimal(const OwnershipGraph& g, const WellnessFunction& w,
                                     std::size_t L) {
  const std::size_t n = g.num_items();
  if (n > kBruteForcePartitionCap) {
    throw Error(ErrorCode::kBudgetExceeded,
                "brute-force partition search is limited to " +
                    std::to_string(kBruteForcePartitionCap) + " items, got " + std::to_string(n));
  }
  if (L < 1) throw Error(ErrorCode::kInvalidArgument, "strongness L must be at least 1");
  const std::size_t words = (g.num_owners() + 63) / 64;
  using Mask = std::vector<std::uint64_t>;
  std::vector<Mask> item_mask(n, Mask(words, 0));
  for (ItemId i = 0; i < n; ++i) {
    for (OwnerId j : g.owners_of(i)) item_mask[i][j / 64] |= std::uint64_t{1} << (j % 64);
  }
  auto popcount = [](const Mask& mk) {
    std::size_t c = 0;
    for (std::uint64_t v : mk) c += static_cast<std::size_t>(__builtin_popcountll(v));
    return c;
  };
  std::vector<double> wtable(n + 1);
  for (std::size_t x = 0; x <= n; ++x) wtable[x] = w(static_cast<double>(x));

  std::vector<Mask> block_mask;
  std::vector<std::size_t> block_size;
  std::vector<std::size_t> assign(n), best_assign;
  double best_value = -std::numeric_limits<double>::infinity();

  auto recurse = [&](auto&& self, std::size_t t) -> void {
    if (t == n) {
      double value = 0.0;
      for (std::size_t s : block_size) value += wtable[s];
      if (value > best_value) {
        best_value = value;
        best_assign = assign;
      }
      return;
    }
    for (std::size_t b = 0; b < block_size.size(); ++b) {
      Mask merged = block_mask[b];
      for (std::size_t k = 0; k < words; ++k) merged[k] &= item_mask[t][k];
      if (popcount(merged) < L) continue;
      Mask saved = std::move(block_mask[b]);
      block_mask[b] = std::move(merged);
      ++block_size[b];
      assign[t] = b;
      self(self, t + 1);
      --block_size[b];
      block_mask[b] = std::move(saved);
    }
    block_mask.push_back(item_mask[t]);
    block_size.push_back(1);
    assign[t] = block_size.size() - 1;
    self(self, t + 1);
    block_mask.pop_back();
    block_size.pop_back();
  };
  recurse(recurse, 0);

  std::size_t num_blocks = 0;
  for (std::size_t b : best_assign) num_blocks = std::max(num_blocks, b + 1);
  std::vector<ItemSet> blocks(num_blocks);
  for (ItemId i = 0; i < n; ++i) blocks[best_assign[i]].push_back(i);
  return Partition(g, std::move(blocks));
}

/// Infimum of w(x) / (w'_-(x) x) over integers 2 <= x <= x_max with a
/// positive left derivative.
inline double approximation_ratio_bound(const WellnessFunction& w, std::size_t x_max) {
  if (x_max < 2) throw Error(ErrorCode::kInvalidArgument, "x_max must be at least 2");
  double inf = std::numeric_limits<double>::infinity();
  bool defined = false;
  for (std::size_t x = 2; x <= x_max; ++x) {
    const double xd = static_cast<double>(x);
    const double d = w.left_derivative(xd);
    if (!(d > 0.0)) continue;
    defined = true;
    inf = std::min(inf, w(xd) / (d * xd));
  }
  if (!defined) {
    throw Error(ErrorCode::kUndefined,
                "wellness function " + w.name + " has no positive left derivative on [2, x_max]");
  }
  return inf;
}

}  // namespace isocal
