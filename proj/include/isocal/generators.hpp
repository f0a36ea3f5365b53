#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isocal/error.hpp"
#include "isocal/ownership.hpp"
#include "isocal/random.hpp"

namespace isocal {

inline constexpr std::size_t kMaxTreeDepth = 10;

inline std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

/// Complete ternary tree: items are the 3^depth leaves, owners are the
/// (3^depth - 1) / 2 internal nodes in breadth-first order, and each owner
/// owns the leaves of its subtree.
inline OwnershipGraph gen_ternary_tree(std::size_t depth) {
  if (depth < 1) throw Error(ErrorCode::kInvalidArgument, "tree depth must be at least 1");
  if (depth > kMaxTreeDepth) {
    throw Error(ErrorCode::kBudgetExceeded, "tree depth " + std::to_string(depth) +
                                                " exceeds the size guard of " +
                                                std::to_string(kMaxTreeDepth));
  }
  const std::size_t n = ipow(3, depth);
  const std::size_t m = (n - 1) / 2;
  std::vector<Edge> edges;
  edges.reserve(n * depth);
  OwnerId owner = 0;
  for (std::size_t d = 0; d < depth; ++d) {
    const std::size_t span = ipow(3, depth - d);
    const std::size_t nodes = ipow(3, d);
    for (std::size_t k = 0; k < nodes; ++k, ++owner) {
      for (ItemId i = k * span; i < (k + 1) * span; ++i) edges.push_back({owner, i});
    }
  }
  return OwnershipGraph(m, n, std::move(edges));
}

/// Id of the tree owner at depth `d`, position `k` in the layout above.
inline OwnerId ternary_tree_owner(std::size_t d, std::size_t k) { return (ipow(3, d) - 1) / 2 + k; }

/// Canonical partition of the ternary tree: one block per depth-(L-1) node,
/// holding the leaves of its subtree. Every block has exactly L common owners.
inline Partition ternary_tree_partition(const OwnershipGraph& tree, std::size_t depth,
                                        std::size_t L) {
  if (L < 1 || L > depth) {
    throw Error(ErrorCode::kInvalidArgument,
                "tree partition level must be in [1, " + std::to_string(depth) + "]");
  }
  const std::size_t span = ipow(3, depth - (L - 1));
  std::vector<ItemSet> blocks(tree.num_items() / span);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    blocks[k].resize(span);
    for (std::size_t t = 0; t < span; ++t) blocks[k][t] = k * span + t;
  }
  return Partition(tree, std::move(blocks));
}

/// Lower-bound family for the greedy partition. Base owners 0..M-1 own
/// disjoint N-item sets; extra owner M+l-1 (l = 1..L) takes
/// (1-1/M)^(l-1) N / M items from every base set plus one more from base set
/// (l-1) mod M, so it owns (1-1/M)^(l-1) N + 1 items. Integrality of every
/// chunk needs M^L | N.
inline OwnershipGraph gen_tightness_family(std::size_t M, std::size_t L, std::size_t N) {
  if (M < 2 || L < 1 || N < 1) {
    throw Error(ErrorCode::kPrecondition, "tightness family needs M >= 2, L >= 1, N >= 1");
  }
  unsigned __int128 m_pow = 1;
  for (std::size_t k = 0; k < L; ++k) {
    m_pow *= M;
    if (m_pow > static_cast<unsigned __int128>(N)) break;
  }
  if (m_pow > static_cast<unsigned __int128>(N) || N % static_cast<std::size_t>(m_pow) != 0) {
    throw Error(ErrorCode::kPrecondition, "divisibility M^L | N fails for M=" +
                                              std::to_string(M) + ", L=" + std::to_string(L) +
                                              ", N=" + std::to_string(N));
  }
  // N (1-1/M)^L >= L  <=>  N (M-1)^L >= L M^L
  long double lhs = static_cast<long double>(N);
  long double rhs = static_cast<long double>(L);
  for (std::size_t k = 0; k < L; ++k) {
    lhs *= static_cast<long double>(M - 1);
    rhs *= static_cast<long double>(M);
  }
  if (lhs < rhs) {
    throw Error(ErrorCode::kPrecondition, "N (1-1/M)^L >= L fails for M=" + std::to_string(M) +
                                              ", L=" + std::to_string(L) +
                                              ", N=" + std::to_string(N));
  }

  const std::size_t n = M * N;
  std::vector<Edge> edges;
  for (OwnerId b = 0; b < M; ++b) {
    for (std::size_t t = 0; t < N; ++t) edges.push_back({b, b * N + t});
  }
  std::vector<std::size_t> cursor(M, 0);
  std::size_t chunk = N / M;  // (M-1)^(l-1) N / M^l for l = 1
  for (std::size_t l = 1; l <= L; ++l) {
    const OwnerId extra = M + l - 1;
    for (OwnerId b = 0; b < M; ++b) {
      const std::size_t take = chunk + ((l - 1) % M == b ? 1 : 0);
      for (std::size_t t = 0; t < take; ++t) edges.push_back({extra, b * N + cursor[b]++});
    }
    chunk = chunk / M * (M - 1);
  }
  return OwnershipGraph(M + L, n, std::move(edges));
}

/// Degree law for synthetic conference graphs: owner degrees follow a
/// discrete power law P(d) ~ d^-exponent on [1, cap].
struct DegreeLaw {
  double exponent = 2.5;
  std::size_t cap = 0;  // 0 means "number of items"
};

/// Synthetic ownership graph. Owner degrees are sampled from `law`; a random
/// shuffle of all degree stubs gives every item one owner, and the remaining
/// stubs attach to items with probability proportional to 1 + current number
/// of owners. Every item ends up owned. Deterministic in `seed`.
inline OwnershipGraph gen_random_conference(std::size_t n, std::size_t m, DegreeLaw law,
                                            std::uint64_t seed) {
  if (n < 1 || m < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one item and owner");
  if (!(law.exponent > 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "power-law exponent must exceed 1");
  }
  const std::size_t cap = law.cap == 0 ? n : std::min(law.cap, n);
  if (cap * m < n) {
    throw Error(ErrorCode::kPrecondition,
                "infeasible degree sequence: " + std::to_string(m) + " owners with degree cap " +
                    std::to_string(cap) + " cannot cover " + std::to_string(n) + " items");
  }
  Rng rng = make_rng(seed, {0x636f6e66ULL});

  std::vector<double> cdf(cap);
  double acc = 0.0;
  for (std::size_t d = 1; d <= cap; ++d) {
    acc += std::pow(static_cast<double>(d), -law.exponent);
    cdf[d - 1] = acc;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> degree(m);
  std::size_t total = 0;
  for (OwnerId j = 0; j < m; ++j) {
    const double u = unit(rng) * acc;
    degree[j] = static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin()) + 1;
    degree[j] = std::min(degree[j], cap);
    total += degree[j];
  }
  while (total < n) {
    const OwnerId j = uniform_index(rng, m);
    if (degree[j] < cap) {
      ++degree[j];
      ++total;
    }
  }

  std::vector<OwnerId> stubs;
  stubs.reserve(total);
  for (OwnerId j = 0; j < m; ++j) stubs.insert(stubs.end(), degree[j], j);
  shuffle(stubs, rng);

  std::vector<std::vector<ItemId>> owned(m);
  std::vector<ItemId> tickets;
  tickets.reserve(n + total);
  std::vector<ItemId> items(n);
  for (ItemId i = 0; i < n; ++i) items[i] = i;
  shuffle(items, rng);
  for (ItemId i = 0; i < n; ++i) {
    owned[stubs[i]].push_back(items[i]);
    tickets.push_back(i);
    tickets.push_back(items[i]);
  }

  std::vector<OwnerId> order(m);
  for (OwnerId j = 0; j < m; ++j) order[j] = j;
  shuffle(order, rng);
  std::vector<char> mark(n, 0);
  for (OwnerId j : order) {
    std::vector<ItemId>& mine = owned[j];
    if (mine.size() >= degree[j]) continue;
    for (ItemId i : mine) mark[i] = 1;
    std::vector<ItemId> free;  // filled lazily when rejection sampling stalls
    while (mine.size() < degree[j]) {
      ItemId pick = n;
      if (free.empty()) {
        for (int attempt = 0; attempt < 32 && pick == n; ++attempt) {
          const ItemId c = tickets[uniform_index(rng, tickets.size())];
          if (!mark[c]) pick = c;
        }
        if (pick == n) {
          for (ItemId i = 0; i < n; ++i) {
            if (!mark[i]) free.push_back(i);
          }
        }
      }
      if (pick == n) {
        const std::size_t k = uniform_index(rng, free.size());
        pick = free[k];
        free[k] = free.back();
        free.pop_back();
      }
      mark[pick] = 1;
      mine.push_back(pick);
      tickets.push_back(pick);
    }
    for (ItemId i : mine) mark[i] = 0;
  }

  std::vector<Edge> edges;
  edges.reserve(total);
  for (OwnerId j = 0; j < m; ++j) {
    for (ItemId i : owned[j]) edges.push_back({j, i});
  }
  return OwnershipGraph(m, n, std::move(edges));
}

}  // namespace isocal
