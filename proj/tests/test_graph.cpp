#include <gtest/gtest.h>

#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"

using namespace bdsparse;

TEST(Canonicalize, OrdersEndpoints) {
  EXPECT_EQ(canonicalize(3, 1), (Edge{1, 3}));
  EXPECT_EQ(canonicalize(0, 7), (Edge{0, 7}));
  EXPECT_THROW(canonicalize(5, 5), std::invalid_argument);
}

TEST(Graph, DuplicateInsertIsFiltered) {
  Graph g(3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}});
  const auto applied = g.apply_batch({{{0, 1}}, {}});
  EXPECT_TRUE(applied.inserts.empty());
  EXPECT_EQ(g.num_edges(), 3u);
}

TEST(Graph, DeleteFromTriangle) {
  Graph g(3, std::vector<Edge>{{0, 1}, {1, 2}, {0, 2}});
  const auto applied = g.apply_batch({{}, {{0, 1}}});
  EXPECT_EQ(applied.deletes, (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_FALSE(g.has_edge(0, 1));
  g.check_consistency();
}

TEST(Graph, AbsentDeleteIsFiltered) {
  Graph g(3);
  const auto applied = g.apply_batch({{}, {{0, 1}}});
  EXPECT_TRUE(applied.deletes.empty());
}

TEST(Graph, SimultaneousInsertDeleteRejected) {
  Graph g(3);
  EXPECT_THROW(g.apply_batch({{{0, 1}}, {{0, 1}}}), std::invalid_argument);
}

TEST(Graph, OutOfRangeRejected) {
  Graph g(3);
  EXPECT_THROW(g.insert(Edge{1, 3}), std::out_of_range);
  EXPECT_THROW(g.insert(Edge{2, 1}), std::invalid_argument);
}

TEST(Graph, RandomBatchesStayConsistent) {
  Rng rng(5);
  Graph g(30);
  EdgeSet mirror;
  for (int round = 0; round < 200; ++round) {
    UpdateBatch b;
    for (int i = 0; i < 5; ++i) {
      const auto a = static_cast<VertexId>(rng.below(30)), c = static_cast<VertexId>(rng.below(30));
      if (a == c) continue;
      (rng.bernoulli(0.5) ? b.inserts : b.deletes).push_back(canonicalize(a, c));
    }
    sort_unique(b.inserts);
    sort_unique(b.deletes);
    std::erase_if(b.deletes, [&](const Edge& e) {
      return std::binary_search(b.inserts.begin(), b.inserts.end(), e);
    });
    const auto applied = g.apply_batch(b);
    for (const Edge& e : applied.deletes) EXPECT_EQ(mirror.erase(e), 1u);
    for (const Edge& e : applied.inserts) EXPECT_TRUE(mirror.insert(e).second);
    EXPECT_EQ(g.num_edges(), mirror.size());
    g.check_consistency();
  }
}

TEST(Cancel, PartialOverlap) {
  const Edge a{0, 1}, b{0, 2}, c{1, 2};
  const auto d = cancel(DeltaEdges<Edge>{{a, b}, {b, c}});
  EXPECT_EQ(d.inserted, std::vector<Edge>{a});
  EXPECT_EQ(d.deleted, std::vector<Edge>{c});
}

TEST(Cancel, EmptyAndFull) {
  EXPECT_TRUE(cancel(DeltaEdges<Edge>{}).empty());
  const Edge a{0, 1};
  EXPECT_TRUE(cancel(DeltaEdges<Edge>{{a}, {a}}).empty());
}

TEST(CountedSet, TransitionsOnly) {
  EdgeUnion u;
  const Edge a{0, 1};
  u.add(a);
  u.add(a);
  u.remove(a);
  auto d = u.take_delta();
  EXPECT_EQ(d.inserted, std::vector<Edge>{a});
  u.remove(a);
  u.add(a);
  EXPECT_TRUE(u.take_delta().empty());
  u.remove(a);
  EXPECT_EQ(u.take_delta().deleted, std::vector<Edge>{a});
  EXPECT_THROW(u.remove(a), std::logic_error);
}

TEST(Rng, DeterministicAndForked) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(a.fork()), d(b.fork());
  EXPECT_EQ(c.next(), d.next());
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
}

TEST(Rng, ExponentialMean) {
  Rng r(9);
  double s = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += r.exponential(2.0);
  EXPECT_NEAR(s / n, 0.5, 0.01);
}
