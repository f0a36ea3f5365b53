#include <gtest/gtest.h>

#include "isocal/ownership.hpp"
#include "test_support.hpp"

using namespace isocal;

namespace {

// Items 0..2; owners 0 and 1 hold {0,1}, owner 2 holds {1,2}.
OwnershipGraph table2() { return OwnershipGraph::from_item_sets(3, {{0, 1}, {0, 1}, {1, 2}}); }

// Owners {0,1}, {0,1,2}, {1,2}.
OwnershipGraph chain() { return OwnershipGraph::from_item_sets(3, {{0, 1}, {0, 1, 2}, {1, 2}}); }

}  // namespace

TEST(OwnershipGraph, Views) {
  const OwnershipGraph g = chain();
  EXPECT_EQ(g.num_owners(), 3u);
  EXPECT_EQ(g.num_items(), 3u);
  EXPECT_EQ(g.num_edges(), 7u);
  EXPECT_EQ(g.owners_of(1), (OwnerSet{0, 1, 2}));
  EXPECT_EQ(g.items_of(2), (ItemSet{1, 2}));
  EXPECT_TRUE(g.owns(1, 2));
  EXPECT_FALSE(g.owns(0, 2));
}

TEST(OwnershipGraph, RejectsBadEdges) {
  EXPECT_THROW(OwnershipGraph(1, 1, {{0, 1}}), Error);
  EXPECT_THROW(OwnershipGraph(1, 1, {{1, 0}}), Error);
  EXPECT_THROW(OwnershipGraph(1, 2, {{0, 1}, {0, 1}}), Error);
}

TEST(CommonOwnerSet, Examples) {
  const OwnershipGraph g = OwnershipGraph::from_item_sets(3, {{0, 1, 2}, {0, 1, 2}});
  EXPECT_EQ(common_owner_set(g, std::vector<ItemId>{0, 1}), (OwnerSet{0, 1}));
  EXPECT_EQ(common_owner_set(table2(), std::vector<ItemId>{1, 2}), (OwnerSet{2}));
  EXPECT_TRUE(common_owner_set(table2(), std::vector<ItemId>{0, 1, 2}).empty());
  EXPECT_THROW(common_owner_set(table2(), std::vector<ItemId>{7}), Error);
  EXPECT_THROW(common_owner_set(table2(), std::vector<ItemId>{}), Error);
}

TEST(Partition, ValidatesCover) {
  const OwnershipGraph g = table2();
  EXPECT_THROW(Partition(g, {{0, 1}}), Error);
  EXPECT_THROW(Partition(g, {{0, 1}, {1, 2}}), Error);
  EXPECT_THROW(Partition(g, {{0, 1}, {2}, {}}), Error);
  const Partition p(g, {{1, 0}, {2}});
  EXPECT_EQ(p.block(0), (ItemSet{0, 1}));
  EXPECT_EQ(p.common_owners(0), (OwnerSet{0, 1}));
  EXPECT_EQ(p.common_owners(1), (OwnerSet{2}));
  EXPECT_EQ(p.block_of(2), 1u);
}

TEST(IsLStrong, Examples) {
  const OwnershipGraph g = chain();
  for (std::size_t L = 1; L <= 4; ++L) EXPECT_TRUE(is_l_strong(g, Partition::singletons(g), L));
  const Partition p(g, {{0, 1}, {2}});
  EXPECT_TRUE(is_l_strong(g, p, 2));
  EXPECT_FALSE(is_l_strong(g, p, 3));
  EXPECT_FALSE(is_l_strong(g, Partition(g, {{0, 2}, {1}}), 2));
}

TEST(ReduceLTo1, ChainExample) {
  const ReducedGraph r = reduce_l_to_1(chain(), 2);
  ASSERT_EQ(r.graph.num_owners(), 3u);
  EXPECT_EQ(r.graph.items_of(0), (ItemSet{0, 1}));
  EXPECT_EQ(r.graph.items_of(1), (ItemSet{1}));
  EXPECT_EQ(r.graph.items_of(2), (ItemSet{1, 2}));
  EXPECT_EQ(r.provenance[0], (std::vector<OwnerSet>{{0, 1}}));
  EXPECT_EQ(r.provenance[2], (std::vector<OwnerSet>{{1, 2}}));
}

TEST(ReduceLTo1, IdentityForLOne) {
  const OwnershipGraph g = chain();
  EXPECT_EQ(reduce_l_to_1(g, 1).graph, g);
}

TEST(ReduceLTo1, TripleIntersections) {
  // Four owners each holding every item: all four triples coincide and are merged.
  const OwnershipGraph g = OwnershipGraph::from_item_sets(3, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}, {0, 1}});
  const ReducedGraph r = reduce_l_to_1(g, 3);
  ASSERT_EQ(r.graph.num_owners(), 2u);
  EXPECT_EQ(r.graph.items_of(0), (ItemSet{0, 1, 2}));
  EXPECT_EQ(r.provenance[0].size(), 1u);
  EXPECT_EQ(r.graph.items_of(1), (ItemSet{0, 1}));
  EXPECT_EQ(r.provenance[1].size(), 3u);
}

TEST(ReduceLTo1, DuplicatesKeepProvenance) {
  const OwnershipGraph g = OwnershipGraph::from_item_sets(2, {{0, 1}, {0, 1}, {0, 1}});
  const ReducedGraph r = reduce_l_to_1(g, 2);
  ASSERT_EQ(r.graph.num_owners(), 1u);
  EXPECT_EQ(r.provenance[0].size(), 3u);
}

TEST(ReduceLTo1, BudgetRefusal) {
  const OwnershipGraph g = chain();
  try {
    reduce_l_to_1(g, 2, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExceeded);
    EXPECT_NE(std::string(e.what()).find("budget"), std::string::npos);
  }
}

TEST(ReduceLTo1, EquivalenceOverAllPartitions) {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const std::size_t m = 1 + uniform_index(rng, 5);
    const OwnershipGraph g = testing_support::random_graph(m, n, 0.6, rng);
    for (std::size_t L : {2u, 3u}) {
      const ReducedGraph r = reduce_l_to_1(g, L);
      testing_support::for_each_set_partition(n, [&](const std::vector<ItemSet>& blocks) {
        const Partition pg(g, blocks), pr(r.graph, blocks);
        ASSERT_EQ(is_l_strong(g, pg, L), is_l_strong(r.graph, pr, 1));
      });
    }
  }
}
