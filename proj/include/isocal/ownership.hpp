#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isocal/error.hpp"

namespace isocal {

using OwnerId = std::size_t;
using ItemId = std::size_t;
using ItemSet = std::vector<ItemId>;
using OwnerSet = std::vector<OwnerId>;

struct Edge {
  OwnerId owner;
  ItemId item;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Bipartite owner/item relation. Immutable once built; both adjacency views
/// are kept sorted.
class OwnershipGraph {
 public:
  OwnershipGraph() = default;

  OwnershipGraph(std::size_t num_owners, std::size_t num_items, std::vector<Edge> edges)
      : items_of_(num_owners), owners_of_(num_items) {
    std::sort(edges.begin(), edges.end());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Edge& edge = edges[e];
      if (edge.owner >= num_owners || edge.item >= num_items) {
        throw Error(ErrorCode::kInvalidArgument,
                    "edge (" + std::to_string(edge.owner) + ", " + std::to_string(edge.item) +
                        ") is out of range for " + std::to_string(num_owners) + " owners and " +
                        std::to_string(num_items) + " items");
      }
      if (e > 0 && edges[e - 1] == edge) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate edge (" + std::to_string(edge.owner) + ", " +
                        std::to_string(edge.item) + ")");
      }
      items_of_[edge.owner].push_back(edge.item);
      owners_of_[edge.item].push_back(edge.owner);
    }
    num_edges_ = edges.size();
  }

  /// Convenience constructor from per-owner item lists.
  static OwnershipGraph from_item_sets(std::size_t num_items,
                                       const std::vector<ItemSet>& item_sets) {
    std::vector<Edge> edges;
    for (OwnerId j = 0; j < item_sets.size(); ++j) {
      for (ItemId i : item_sets[j]) edges.push_back({j, i});
    }
    return OwnershipGraph(item_sets.size(), num_items, std::move(edges));
  }

  std::size_t num_owners() const noexcept { return items_of_.size(); }
  std::size_t num_items() const noexcept { return owners_of_.size(); }
  std::size_t num_edges() const noexcept { return num_edges_; }

  const ItemSet& items_of(OwnerId j) const { return items_of_.at(j); }
  const OwnerSet& owners_of(ItemId i) const { return owners_of_.at(i); }

  bool owns(OwnerId j, ItemId i) const {
    const ItemSet& s = items_of_.at(j);
    return std::binary_search(s.begin(), s.end(), i);
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (OwnerId j = 0; j < items_of_.size(); ++j) {
      for (ItemId i : items_of_[j]) out.push_back({j, i});
    }
    return out;
  }

  friend bool operator==(const OwnershipGraph& a, const OwnershipGraph& b) {
    return a.items_of_ == b.items_of_ && a.owners_of_.size() == b.owners_of_.size();
  }

 private:
  std::vector<ItemSet> items_of_;
  std::vector<OwnerSet> owners_of_;
  std::size_t num_edges_ = 0;
};

/// Owners whose item set contains every item of `block`.
inline OwnerSet common_owner_set(const OwnershipGraph& g, std::span<const ItemId> block) {
  if (block.empty()) throw Error(ErrorCode::kInvalidArgument, "block must be nonempty");
  for (ItemId i : block) {
    if (i >= g.num_items()) {
      throw Error(ErrorCode::kInvalidArgument, "item " + std::to_string(i) + " is out of range");
    }
  }
  OwnerSet acc = g.owners_of(block.front());
  OwnerSet next;
  for (std::size_t k = 1; k < block.size() && !acc.empty(); ++k) {
    const OwnerSet& owners = g.owners_of(block[k]);
    next.clear();
    std::set_intersection(acc.begin(), acc.end(), owners.begin(), owners.end(),
                          std::back_inserter(next));
    acc.swap(next);
  }
  return acc;
}

/// Disjoint blocks covering every item, each annotated with the owners who
/// own the whole block in the graph the partition was built against.
class Partition {
 public:
  Partition() = default;

  Partition(const OwnershipGraph& g, std::vector<ItemSet> blocks) : blocks_(std::move(blocks)) {
    const std::size_t n = g.num_items();
    block_of_.assign(n, kUnassigned);
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      ItemSet& b = blocks_[k];
      if (b.empty()) throw Error(ErrorCode::kInvalidArgument, "partition block is empty");
      std::sort(b.begin(), b.end());
      for (ItemId i : b) {
        if (i >= n) {
          throw Error(ErrorCode::kInvalidArgument,
                      "partition references item " + std::to_string(i) + " out of range");
        }
        if (block_of_[i] != kUnassigned) {
          throw Error(ErrorCode::kInvalidArgument,
                      "item " + std::to_string(i) + " appears in two partition blocks");
        }
        block_of_[i] = k;
      }
    }
    for (ItemId i = 0; i < n; ++i) {
      if (block_of_[i] == kUnassigned) {
        throw Error(ErrorCode::kInvalidArgument,
                    "item " + std::to_string(i) + " is not covered by the partition");
      }
    }
    common_owners_.reserve(blocks_.size());
    for (const ItemSet& b : blocks_) common_owners_.push_back(common_owner_set(g, b));
  }

  static Partition singletons(const OwnershipGraph& g) {
    std::vector<ItemSet> blocks(g.num_items());
    for (ItemId i = 0; i < g.num_items(); ++i) blocks[i] = {i};
    return Partition(g, std::move(blocks));
  }

  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  std::size_t num_items() const noexcept { return block_of_.size(); }
  const std::vector<ItemSet>& blocks() const noexcept { return blocks_; }
  const ItemSet& block(std::size_t k) const { return blocks_.at(k); }
  const OwnerSet& common_owners(std::size_t k) const { return common_owners_.at(k); }
  const std::vector<OwnerSet>& common_owners() const noexcept { return common_owners_; }
  std::size_t block_of(ItemId i) const { return block_of_.at(i); }

  std::vector<std::size_t> block_sizes() const {
    std::vector<std::size_t> out;
    out.reserve(blocks_.size());
    for (const ItemSet& b : blocks_) out.push_back(b.size());
    return out;
  }

  /// Blocks as a canonical set: each block sorted, blocks sorted.
  std::vector<ItemSet> canonical_blocks() const {
    std::vector<ItemSet> out = blocks_;
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Same blocks regardless of block order.
  bool same_blocks(const Partition& other) const {
    return canonical_blocks() == other.canonical_blocks();
  }

 private:
  static constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<ItemSet> blocks_;
  std::vector<OwnerSet> common_owners_;
  std::vector<std::size_t> block_of_;
};

/// Every block with more than one item has at least `L` common owners in `g`.
inline bool is_l_strong(const OwnershipGraph& g, const Partition& p, std::size_t L) {
  if (L < 1) throw Error(ErrorCode::kInvalidArgument, "strongness L must be at least 1");
  for (const ItemSet& b : p.blocks()) {
    if (b.size() > 1 && common_owner_set(g, b).size() < L) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// L -> 1 reduction

struct ReducedGraph {
  OwnershipGraph graph;
  /// For each derived owner, the L-subsets of original owners whose common
  /// item set it represents.
  std::vector<std::vector<OwnerSet>> provenance;
};

inline constexpr double kDefaultReductionBudget = 2e8;

/// C(m, L) * n, saturating.
inline double reduction_cost(std::size_t m, std::size_t L, std::size_t n) {
  if (L > m) return 0.0;
  double c = 1.0;
  for (std::size_t k = 1; k <= L; ++k) {
    c = c * static_cast<double>(m - L + k) / static_cast<double>(k);
  }
  return c * static_cast<double>(n);
}

/// Builds the graph whose owners are the nonempty common item sets of all
/// L-subsets of original owners. A partition is L-strong in `g` iff it is
/// 1-strong in the result. Derived owners with identical item sets are merged;
/// empty intersections are dropped since they cannot make any block strong.
inline ReducedGraph reduce_l_to_1(const OwnershipGraph& g, std::size_t L,
                                  double budget = kDefaultReductionBudget) {
  if (L < 1) throw Error(ErrorCode::kInvalidArgument, "strongness L must be at least 1");
  const std::size_t m = g.num_owners();
  const std::size_t n = g.num_items();
  if (L == 1) {
    ReducedGraph out{g, {}};
    out.provenance.reserve(m);
    for (OwnerId j = 0; j < m; ++j) out.provenance.push_back({{j}});
    return out;
  }
  const double cost = reduction_cost(m, L, n);
  if (cost > budget) {
    throw Error(ErrorCode::kBudgetExceeded,
                "reduction needs C(" + std::to_string(m) + "," + std::to_string(L) + ")*" +
                    std::to_string(n) + " = " + std::to_string(cost) +
                    " operations, budget is " + std::to_string(budget));
  }

  std::map<ItemSet, std::size_t> index_of;
  std::vector<ItemSet> sets;
  std::vector<std::vector<OwnerSet>> provenance;

  // Depth-first over owner subsets in lexicographic order, carrying the
  // running intersection and pruning once it is empty.
  OwnerSet chosen;
  std::vector<ItemSet> running(L + 1);
  auto recurse = [&](auto&& self, OwnerId start, std::size_t depth) -> void {
    if (depth == L) {
      auto [it, inserted] = index_of.try_emplace(running[depth], sets.size());
      if (inserted) {
        sets.push_back(running[depth]);
        provenance.emplace_back();
      }
      provenance[it->second].push_back(chosen);
      return;
    }
    for (OwnerId j = start; j + (L - depth) <= m; ++j) {
      const ItemSet& items = g.items_of(j);
      ItemSet& next = running[depth + 1];
      next.clear();
      if (depth == 0) {
        next = items;
      } else {
        std::set_intersection(running[depth].begin(), running[depth].end(), items.begin(),
                              items.end(), std::back_inserter(next));
      }
      if (next.empty()) continue;
      chosen.push_back(j);
      self(self, j + 1, depth + 1);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0, 0);

  return ReducedGraph{OwnershipGraph::from_item_sets(n, sets), std::move(provenance)};
}

}  // namespace isocal
