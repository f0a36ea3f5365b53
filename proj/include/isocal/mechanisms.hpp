#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "isocal/error.hpp"
#include "isocal/isotonic.hpp"
#include "isocal/ownership.hpp"
#include "isocal/random.hpp"

namespace isocal {

/// Per-owner nonnegative weights; defaults to 1 for everyone.
struct OwnerCredentials {
  std::vector<double> alpha;

  static OwnerCredentials uniform(std::size_t m) { return {std::vector<double>(m, 1.0)}; }

  double operator[](OwnerId j) const { return alpha.at(j); }

  void validate(std::size_t m) const {
    if (alpha.size() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "credentials list " +
                                                     std::to_string(alpha.size()) +
                                                     " weights for " + std::to_string(m) + " owners");
    }
    for (double a : alpha) {
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw Error(ErrorCode::kInvalidArgument, "credentials must be finite and nonnegative");
      }
    }
  }
};

/// One optional ranking per owner. A ranking may cover more items than a
/// mechanism asks about; mechanisms only read the relative order of the items
/// they use.
struct ReportProfile {
  std::vector<std::optional<Ranking>> rankings;

  explicit ReportProfile(std::size_t m = 0) : rankings(m) {}

  std::size_t num_owners() const noexcept { return rankings.size(); }
  bool has(OwnerId j) const { return j < rankings.size() && rankings[j].has_value(); }
  const Ranking& at(OwnerId j) const { return *rankings.at(j); }
  void set(OwnerId j, Ranking r) { rankings.at(j) = std::move(r); }

  /// Everyone ranks their own items by descending `truth` (ties by item id).
  static ReportProfile truthful(const OwnershipGraph& g, std::span<const double> truth) {
    ReportProfile p(g.num_owners());
    for (OwnerId j = 0; j < g.num_owners(); ++j) {
      if (!g.items_of(j).empty()) p.set(j, Ranking::by_descending_score(truth, g.items_of(j)));
    }
    return p;
  }
};

/// Uniformly random ranking of `items`, seeded by (seed, owner).
inline Ranking random_ranking(const ItemSet& items, std::uint64_t seed, OwnerId owner) {
  Rng rng = make_rng(seed, {0x66696c6cULL, owner});
  std::vector<std::size_t> order(items.begin(), items.end());
  shuffle(order, rng);
  return Ranking(std::move(order));
}

/// Replaces each missing report of an owner with items by a uniformly random
/// ranking of that owner's items.
inline ReportProfile fill_missing_reports(const OwnershipGraph& g, ReportProfile profile,
                                          std::uint64_t seed) {
  if (profile.num_owners() < g.num_owners()) profile.rankings.resize(g.num_owners());
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (!profile.has(j) && !g.items_of(j).empty()) {
      profile.set(j, random_ranking(g.items_of(j), seed, j));
    }
  }
  return profile;
}

namespace detail {

/// Credential-weighted average of isotonic fits of y[items] under each
/// contributor's ranking restricted to `items`. Returns false, leaving `out`
/// untouched, when the total weight is zero.
inline bool calibrate_block(std::span<const double> y, const ItemSet& items,
                            const std::vector<std::pair<const Ranking*, double>>& contributors,
                            std::span<double> out) {
  double total = 0.0;
  for (const auto& c : contributors) total += c.second;
  if (!(total > 0.0)) return false;
  std::vector<double> acc(items.size(), 0.0);
  std::vector<double> permuted(items.size());
  for (const auto& [ranking, weight] : contributors) {
    if (weight == 0.0) continue;
    const Ranking sliced = ranking->restricted_to(items);
    for (std::size_t k = 0; k < sliced.size(); ++k) permuted[k] = y[sliced[k]];
    const std::vector<double> fitted = pava_descending(permuted);
    for (std::size_t k = 0; k < sliced.size(); ++k) {
      const auto at = std::lower_bound(items.begin(), items.end(), sliced[k]) - items.begin();
      acc[static_cast<std::size_t>(at)] += weight * fitted[k];
    }
  }
  for (std::size_t k = 0; k < items.size(); ++k) out[items[k]] = acc[k] / total;
  return true;
}

}  // namespace detail

/// Complete overlap: every reporting owner ranks all items. Output is the
/// credential-weighted average of the per-owner isotonic fits.
inline ScoreVector mechanism1(const ScoreVector& y, const ReportProfile& reports,
                              const OwnerCredentials& cred) {
  const std::size_t n = y.size();
  std::vector<std::pair<const Ranking*, double>> contributors;
  for (OwnerId j = 0; j < reports.num_owners(); ++j) {
    if (!reports.has(j)) continue;
    const Ranking& r = reports.at(j);
    if (!r.is_permutation_of(n)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "owner " + std::to_string(j) +
                      " does not rank exactly the full item set under complete overlap");
    }
    contributors.emplace_back(&r, cred[j]);
  }
  ItemSet all(n);
  for (ItemId i = 0; i < n; ++i) all[i] = i;
  std::vector<double> out(y.begin(), y.end());
  if (!detail::calibrate_block(y.values(), all, contributors, out)) {
    throw Error(ErrorCode::kInvalidArgument, "credentials of reporting owners sum to zero");
  }
  return ScoreVector(std::move(out));
}

/// Ownership averaging: each reporting owner's fit on its own items, averaged
/// per item over the item's reporting owners. Not truthful in general.
inline ScoreVector naive_average(const OwnershipGraph& g, const ScoreVector& y,
                                 const ReportProfile& reports) {
  const std::size_t n = g.num_items();
  if (y.size() != n) throw Error(ErrorCode::kDimensionMismatch, "score vector does not match graph");
  std::vector<double> sum(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  std::vector<double> fitted(n);
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (!reports.has(j) || g.items_of(j).empty()) continue;
    const Ranking sliced = reports.at(j).restricted_to(g.items_of(j));
    fit_subset(y.values(), sliced, fitted);
    for (ItemId i : g.items_of(j)) {
      sum[i] += fitted[i];
      ++count[i];
    }
  }
  std::vector<double> out(y.begin(), y.end());
  for (ItemId i = 0; i < n; ++i) {
    if (count[i] > 0) out[i] = sum[i] / static_cast<double>(count[i]);
  }
  return ScoreVector(std::move(out));
}

struct Mechanism2Result {
  ScoreVector adjusted;
  /// Multi-item blocks with common owners that still passed raw scores
  /// through because no common owner reported or their weights sum to zero.
  std::vector<std::size_t> raw_fallback_blocks;
};

/// Partition-based mechanism: Mechanism 1 inside each block, using only the
/// block's common owners and only the in-block part of their rankings.
/// Blocks with no common owner or a single item pass raw scores through.
inline Mechanism2Result mechanism2_detailed(const OwnershipGraph& g, const Partition& p,
                                            const ScoreVector& y, const ReportProfile& reports,
                                            const OwnerCredentials& cred) {
  const std::size_t n = g.num_items();
  if (y.size() != n || p.num_items() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "scores, partition and graph disagree on item count");
  }
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  const std::size_t K = p.num_blocks();
  std::vector<double> num(n, 0.0);
  std::vector<double> weight(K, 0.0);
  std::vector<std::size_t> position(n, kNone);
  std::vector<OwnerId> visited(K, kNone);
  std::vector<std::size_t> ordered;
  std::vector<double> permuted;

  // Owners ascending, so per-item sums accumulate in a fixed order.
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (!reports.has(j)) continue;
    const Ranking& r = reports.at(j);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] < n) position[r[k]] = k;
    }
    for (ItemId i : g.items_of(j)) {
      const std::size_t k = p.block_of(i);
      if (visited[k] == j) continue;
      visited[k] = j;
      const ItemSet& block = p.block(k);
      const OwnerSet& owners = p.common_owners(k);
      if (block.size() < 2 || !std::binary_search(owners.begin(), owners.end(), j)) continue;
      ordered.assign(block.begin(), block.end());
      for (ItemId b : ordered) {
        if (position[b] == kNone) {
          throw Error(ErrorCode::kDimensionMismatch,
                      "ranking of owner " + std::to_string(j) + " omits item " +
                          std::to_string(b) + " of a block it fully owns");
        }
      }
      std::sort(ordered.begin(), ordered.end(),
                [&](ItemId a, ItemId b) { return position[a] < position[b]; });
      permuted.resize(ordered.size());
      for (std::size_t t = 0; t < ordered.size(); ++t) permuted[t] = y[ordered[t]];
      const std::vector<double> fitted = pava_descending(permuted);
      const double a = cred[j];
      for (std::size_t t = 0; t < ordered.size(); ++t) num[ordered[t]] += a * fitted[t];
      weight[k] += a;
    }
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] < n) position[r[k]] = kNone;
    }
  }

  std::vector<double> out(y.begin(), y.end());
  std::vector<std::size_t> fallback;
  for (std::size_t k = 0; k < K; ++k) {
    const ItemSet& block = p.block(k);
    if (block.size() < 2 || p.common_owners(k).empty()) continue;
    if (!(weight[k] > 0.0)) {
      fallback.push_back(k);
      continue;
    }
    for (ItemId i : block) out[i] = num[i] / weight[k];
  }
  return {ScoreVector(std::move(out)), std::move(fallback)};
}

inline ScoreVector mechanism2(const OwnershipGraph& g, const Partition& p, const ScoreVector& y,
                              const ReportProfile& reports, const OwnerCredentials& cred) {
  return mechanism2_detailed(g, p, y, reports, cred).adjusted;
}

// ---------------------------------------------------------------------------
// Personalized partitions

/// Per-owner partitions of the owner's own items with itemized weights.
/// `beta[j][i]` is zero whenever owner j does not own item i.
struct Mech3Params {
  std::size_t num_items = 0;
  std::vector<std::vector<ItemSet>> blocks;  // blocks[j] partitions I^j
  std::vector<std::vector<double>> beta;     // beta[j] has num_items entries

  std::size_t num_owners() const noexcept { return blocks.size(); }

  /// Sorts the items inside every block.
  void normalize() {
    for (auto& owner_blocks : blocks) {
      for (ItemSet& b : owner_blocks) std::sort(b.begin(), b.end());
    }
  }

  void validate(const OwnershipGraph& g) const {
    if (num_items != g.num_items() || blocks.size() != g.num_owners() ||
        beta.size() != g.num_owners()) {
      throw Error(ErrorCode::kDimensionMismatch, "personalized parameters do not match the graph");
    }
    for (OwnerId j = 0; j < blocks.size(); ++j) {
      ItemSet all;
      for (const ItemSet& b : blocks[j]) {
        if (b.empty()) throw Error(ErrorCode::kInvalidArgument, "empty personalized block");
        all.insert(all.end(), b.begin(), b.end());
      }
      std::sort(all.begin(), all.end());
      if (all != g.items_of(j)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "blocks of owner " + std::to_string(j) + " do not partition its item set");
      }
      if (beta[j].size() != num_items) {
        throw Error(ErrorCode::kDimensionMismatch, "beta of owner " + std::to_string(j) +
                                                       " has the wrong length");
      }
      for (ItemId i = 0; i < num_items; ++i) {
        if (!(beta[j][i] >= 0.0) || !std::isfinite(beta[j][i])) {
          throw Error(ErrorCode::kInvalidArgument, "beta must be finite and nonnegative");
        }
        if (beta[j][i] != 0.0 && !g.owns(j, i)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "beta of owner " + std::to_string(j) + " is nonzero on unowned item " +
                          std::to_string(i));
        }
      }
    }
  }
};

/// Expresses a global partition as personalized parameters: each owner's
/// blocks are the partition blocks cut down to its items, with weight 1 on
/// blocks it fully owns and 0 elsewhere.
inline Mech3Params encode_partition(const OwnershipGraph& g, const Partition& p) {
  Mech3Params params;
  params.num_items = g.num_items();
  params.blocks.resize(g.num_owners());
  params.beta.assign(g.num_owners(), std::vector<double>(g.num_items(), 0.0));
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    std::vector<ItemSet> cut(p.num_blocks());
    for (ItemId i : g.items_of(j)) cut[p.block_of(i)].push_back(i);
    for (std::size_t k = 0; k < cut.size(); ++k) {
      if (cut[k].empty()) continue;
      const OwnerSet& owners = p.common_owners(k);
      const bool full = std::binary_search(owners.begin(), owners.end(), j);
      for (ItemId i : cut[k]) params.beta[j][i] = full ? 1.0 : 0.0;
      params.blocks[j].push_back(std::move(cut[k]));
    }
  }
  return params;
}

inline ScoreVector mechanism3(const OwnershipGraph& g, const Mech3Params& params,
                              const ScoreVector& y, const ReportProfile& reports,
                              const OwnerCredentials& cred) {
  params.validate(g);
  const std::size_t n = g.num_items();
  if (y.size() != n) throw Error(ErrorCode::kDimensionMismatch, "score vector does not match graph");
  std::vector<double> num(n, 0.0), den(n, 0.0), fitted(n);
  for (OwnerId j = 0; j < g.num_owners(); ++j) {
    if (!reports.has(j)) continue;
    const double a = cred[j];
    for (const ItemSet& block : params.blocks[j]) {
      const Ranking sliced = reports.at(j).restricted_to(block);
      fit_subset(y.values(), sliced, fitted);
      for (ItemId i : block) {
        const double w = a * params.beta[j][i];
        num[i] += w * fitted[i];
        den[i] += w;
      }
    }
  }
  std::vector<double> out(y.begin(), y.end());
  for (ItemId i = 0; i < n; ++i) {
    if (den[i] > 0.0) out[i] = num[i] / den[i];
  }
  return ScoreVector(std::move(out));
}

struct InfluenceViolation {
  OwnerId owner;
  std::size_t block;  // index into params.blocks[owner]
  ItemId item;
  ItemId other;
  double influence;
  double other_influence;
};

/// Pairs of items inside one owner's block on which that owner's relative
/// influence differs, for this particular credential vector.
inline std::vector<InfluenceViolation> balanced_influence_check(const OwnershipGraph& g,
                                                                const Mech3Params& params,
                                                                const OwnerCredentials& cred,
                                                                double tol = 1e-12) {
  params.validate(g);
  const std::size_t n = g.num_items();
  std::vector<double> den(n, 0.0);
  for (ItemId i = 0; i < n; ++i) {
    for (OwnerId j : g.owners_of(i)) den[i] += cred[j] * params.beta[j][i];
  }
  auto omega = [&](OwnerId j, ItemId i) {
    return den[i] > 0.0 ? cred[j] * params.beta[j][i] / den[i] : 0.0;
  };
  std::vector<InfluenceViolation> out;
  for (OwnerId j = 0; j < params.num_owners(); ++j) {
    for (std::size_t s = 0; s < params.blocks[j].size(); ++s) {
      const ItemSet& block = params.blocks[j][s];
      for (std::size_t a = 0; a < block.size(); ++a) {
        for (std::size_t b = a + 1; b < block.size(); ++b) {
          const double wa = omega(j, block[a]);
          const double wb = omega(j, block[b]);
          if (std::abs(wa - wb) > tol) out.push_back({j, s, block[a], block[b], wa, wb});
        }
      }
    }
  }
  return out;
}

struct StructureViolation {
  OwnerId owner;        // owner whose weights disagree
  std::size_t block;    // index into params.blocks[owner]
  OwnerId other_owner;
  std::size_t other_block;
  ItemId item;
  ItemId other;
};

/// Whenever two blocks (of the same or different owners) intersect, each
/// block's owner must weight every item of their union equally, taking
/// weight 0 on items it does not own.
inline std::vector<StructureViolation> partition_structure_check(Mech3Params params,
                                                                 double tol = 1e-12) {
  params.normalize();
  const std::size_t m = params.num_owners();
  const std::size_t n = params.num_items;
  // holders[i] lists (owner, block) pairs containing item i.
  std::vector<std::vector<std::pair<OwnerId, std::size_t>>> holders(n);
  for (OwnerId j = 0; j < m; ++j) {
    for (std::size_t s = 0; s < params.blocks[j].size(); ++s) {
      for (ItemId i : params.blocks[j][s]) holders.at(i).emplace_back(j, s);
    }
  }
  std::vector<StructureViolation> out;
  std::set<std::pair<std::pair<OwnerId, std::size_t>, std::pair<OwnerId, std::size_t>>> seen;
  for (OwnerId j = 0; j < m; ++j) {
    for (std::size_t s = 0; s < params.blocks[j].size(); ++s) {
      const ItemSet& block = params.blocks[j][s];
      for (ItemId i : block) {
        for (const auto& [j2, s2] : holders[i]) {
          if (!seen.insert({{j, s}, {j2, s2}}).second) continue;
          ItemSet uni;
          const ItemSet& other = params.blocks[j2][s2];
          std::set_union(block.begin(), block.end(), other.begin(), other.end(),
                         std::back_inserter(uni));
          for (std::size_t a = 0; a < uni.size(); ++a) {
            for (std::size_t b = a + 1; b < uni.size(); ++b) {
              if (std::abs(params.beta[j][uni[a]] - params.beta[j][uni[b]]) > tol) {
                out.push_back({j, s, j2, s2, uni[a], uni[b]});
              }
            }
          }
        }
      }
    }
  }
  return out;
}

using ItemPair = std::pair<ItemId, ItemId>;

/// Item pairs whose relative order some owner contributes with nonzero
/// weight.
inline std::set<ItemPair> elicited_pairs(const Mech3Params& params) {
  std::set<ItemPair> out;
  for (OwnerId j = 0; j < params.num_owners(); ++j) {
    for (const ItemSet& b : params.blocks[j]) {
      bool weighted = false;
      for (ItemId i : b) weighted = weighted || params.beta[j][i] != 0.0;
      if (!weighted) continue;
      for (std::size_t a = 0; a < b.size(); ++a) {
        for (std::size_t c = a + 1; c < b.size(); ++c) out.emplace(b[a], b[c]);
      }
    }
  }
  return out;
}

inline std::set<ItemPair> elicited_pairs(const Partition& p) {
  std::set<ItemPair> out;
  for (std::size_t k = 0; k < p.num_blocks(); ++k) {
    if (p.common_owners(k).empty()) continue;
    const ItemSet& b = p.block(k);
    for (std::size_t a = 0; a < b.size(); ++a) {
      for (std::size_t c = a + 1; c < b.size(); ++c) out.emplace(b[a], b[c]);
    }
  }
  return out;
}

namespace detail {

inline bool constant_on(const std::vector<double>& beta, const ItemSet& items, double tol) {
  for (ItemId i : items) {
    if (std::abs(beta[i] - beta[items.front()]) > tol) return false;
  }
  return true;
}

inline bool intersects(const ItemSet& a, const ItemSet& b) {
  auto x = a.begin(), y = b.begin();
  while (x != a.end() && y != b.end()) {
    if (*x == *y) return true;
    if (*x < *y) ++x; else ++y;
  }
  return false;
}

inline bool owns_all(const std::vector<ItemSet>& blocks_of_owner, const ItemSet& items) {
  ItemSet all;
  for (const ItemSet& b : blocks_of_owner) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  return std::includes(all.begin(), all.end(), items.begin(), items.end());
}

}  // namespace detail

/// Applies MERGE until no owner has a mergeable pair of blocks, then drops
/// blocks on which the owner has zero weight. Scan order: owners ascending,
/// block pairs lexicographic. A merge is also skipped when the merged block
/// would meet some other block on which either owner's weights differ.
inline Mech3Params merge_blocks(const Mech3Params& params, double tol = 1e-12) {
  Mech3Params out = params;
  out.normalize();
  const std::size_t m = out.num_owners();
  bool changed = true;
  while (changed) {
    changed = false;
    for (OwnerId j = 0; j < m; ++j) {
      std::vector<ItemSet>& mine = out.blocks[j];
      for (std::size_t a = 0; a < mine.size(); ++a) {
        for (std::size_t b = a + 1; b < mine.size(); ++b) {
          ItemSet uni;
          std::set_union(mine[a].begin(), mine[a].end(), mine[b].begin(), mine[b].end(),
                         std::back_inserter(uni));
          if (!detail::constant_on(out.beta[j], uni, tol)) continue;
          bool ok = true;
          for (OwnerId j2 = 0; j2 < m && ok; ++j2) {
            if (j2 == j || !detail::owns_all(out.blocks[j2], uni)) continue;
            ok = detail::constant_on(out.beta[j2], uni, tol) && out.beta[j2][uni.front()] != 0.0;
          }
          if (!ok) continue;
          // The merged block must still meet every other block consistently,
          // otherwise the result could overlap a block it does not equal.
          for (OwnerId j2 = 0; j2 < m && ok; ++j2) {
            for (std::size_t s2 = 0; s2 < out.blocks[j2].size() && ok; ++s2) {
              if (j2 == j && (s2 == a || s2 == b)) continue;
              const ItemSet& other = out.blocks[j2][s2];
              if (!detail::intersects(other, uni)) continue;
              ItemSet both;
              std::set_union(other.begin(), other.end(), uni.begin(), uni.end(),
                             std::back_inserter(both));
              ok = detail::constant_on(out.beta[j], both, tol) &&
                   detail::constant_on(out.beta[j2], both, tol);
            }
          }
          if (!ok) continue;
          mine[a] = std::move(uni);
          mine.erase(mine.begin() + static_cast<std::ptrdiff_t>(b));
          changed = true;
          --b;
        }
      }
    }
  }
  for (OwnerId j = 0; j < m; ++j) {
    std::vector<ItemSet>& mine = out.blocks[j];
    std::erase_if(mine, [&](const ItemSet& s) {
      return std::all_of(s.begin(), s.end(), [&](ItemId i) { return out.beta[j][i] == 0.0; });
    });
  }
  return out;
}

/// Normalizes structure-valid personalized parameters into a global
/// partition whose elicited pairs include those of the input.
inline Partition merge_to_global_partition(const OwnershipGraph& g, const Mech3Params& params) {
  params.validate(g);
  const auto violations = partition_structure_check(params);
  if (!violations.empty()) {
    const StructureViolation& v = violations.front();
    throw Error(ErrorCode::kPrecondition,
                "parameters lack a valid partition structure: owner " + std::to_string(v.owner) +
                    " weights items " + std::to_string(v.item) + " and " +
                    std::to_string(v.other) + " differently across blocks meeting owner " +
                    std::to_string(v.other_owner));
  }
  const Mech3Params merged = merge_blocks(params);
  std::set<ItemSet> unique;
  for (const auto& owner_blocks : merged.blocks) unique.insert(owner_blocks.begin(), owner_blocks.end());
  std::vector<ItemSet> blocks(unique.begin(), unique.end());
  std::vector<char> covered(g.num_items(), 0);
  for (const ItemSet& b : blocks) {
    for (ItemId i : b) {
      if (covered[i]) {
        throw Error(ErrorCode::kPrecondition,
                    "merged blocks overlap without being identical at item " + std::to_string(i));
      }
      covered[i] = 1;
    }
  }
  for (ItemId i = 0; i < g.num_items(); ++i) {
    if (!covered[i]) blocks.push_back({i});
  }
  return Partition(g, std::move(blocks));
}

// ---------------------------------------------------------------------------

enum class MechanismKind { kComplete, kNaive, kPartition, kPersonalized };

inline const char* to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::kComplete: return "complete";
    case MechanismKind::kNaive: return "naive";
    case MechanismKind::kPartition: return "partition";
    case MechanismKind::kPersonalized: return "personalized";
  }
  return "unknown";
}

inline MechanismKind parse_mechanism_kind(const std::string& s) {
  if (s == "complete" || s == "mechanism1") return MechanismKind::kComplete;
  if (s == "naive") return MechanismKind::kNaive;
  if (s == "partition" || s == "mechanism2") return MechanismKind::kPartition;
  if (s == "personalized" || s == "mechanism3") return MechanismKind::kPersonalized;
  throw Error(ErrorCode::kInvalidArgument, "unknown mechanism '" + s + "'");
}

/// A calibration rule together with its parameters.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kPartition;
  OwnerCredentials credentials;
  std::optional<Partition> partition;  // kPartition
  std::optional<Mech3Params> params;   // kPersonalized
};

inline ScoreVector apply_mechanism(const MechanismSpec& spec, const OwnershipGraph& g,
                                   const ScoreVector& y, const ReportProfile& reports) {
  switch (spec.kind) {
    case MechanismKind::kComplete:
      return mechanism1(y, reports, spec.credentials);
    case MechanismKind::kNaive:
      return naive_average(g, y, reports);
    case MechanismKind::kPartition:
      if (!spec.partition) throw Error(ErrorCode::kInvalidArgument, "partition mechanism needs a partition");
      return mechanism2(g, *spec.partition, y, reports, spec.credentials);
    case MechanismKind::kPersonalized:
      if (!spec.params) throw Error(ErrorCode::kInvalidArgument, "personalized mechanism needs parameters");
      return mechanism3(g, *spec.params, y, reports, spec.credentials);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown mechanism kind");
}

}  // namespace isocal
