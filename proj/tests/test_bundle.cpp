#include <gtest/gtest.h>

#include <cmath>

#include "bdsparse/bundle.hpp"
#include "bdsparse/oracle.hpp"
#include "test_util.hpp"

using namespace bdsparse;
using bdsparse::testing::pick;
using bdsparse::testing::random_graph;

namespace {

std::uint64_t realized_bound(const MonotoneSpanner& s) {
  std::uint32_t d = 0;
  for (std::size_t i = 0; i < s.num_instances(); ++i) d = std::max(d, oracle::forest_depth(s.instance(i)));
  return 2 * static_cast<std::uint64_t>(d) + 1;
}

void expect_levels_valid(const BundleChain& b, const Graph& g) {
  EdgeSet all;
  EdgeSet residual = g.edge_set();
  for (std::size_t i = 0; i < b.num_levels(); ++i) {
    const auto& lv = b.level(i);
    // Each level runs on G minus the earlier levels' H.
    ASSERT_EQ(lv.graph.edge_set(), residual) << "level " << i;
    const auto h = sorted_edges(lv.h);
    for (const Edge& e : h) {
      ASSERT_TRUE(lv.graph.has_edge(e));
      all.insert(e);
      residual.erase(e);
    }
    for (const Edge& e : lv.journal) ASSERT_TRUE(lv.h.count(e));
    ASSERT_TRUE(oracle::check_stretch(lv.graph, h, realized_bound(*lv.spanner)).ok) << "level " << i;
  }
  ASSERT_EQ(sorted_edges(all), b.output());
}

}  // namespace

TEST(MonotoneSpanner, SingleVertex) {
  MonotoneSpanner s(1, std::vector<Edge>{}, 1);
  EXPECT_EQ(s.size(), 0u);
}

TEST(MonotoneSpanner, ForestsCoverConnectedGraph) {
  Rng rng(2);
  std::vector<Edge> es;
  for (VertexId v = 1; v < 50; ++v) es.push_back(canonicalize(v, static_cast<VertexId>(rng.below(v))));
  const auto extra = random_graph(50, 60, rng);
  es.insert(es.end(), extra.begin(), extra.end());
  sort_unique(es);
  MonotoneSpanner s(50, es, 3);
  for (std::size_t i = 0; i < s.num_instances(); ++i) {
    const auto& inst = s.instance(i);
    // Every non-center vertex has a forest edge towards its center.
    for (VertexId v = 0; v < 50; ++v) EXPECT_EQ(inst.forest_edge(v).has_value(), inst.cluster_of(v) != v);
  }
}

TEST(MonotoneSpanner, EdgesMostlyInsideSomeCluster) {
  std::size_t total = 0, uncovered = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto es = random_graph(100, 400, rng);
    MonotoneSpanner s(100, es, seed);
    for (const Edge& e : es) {
      bool inside = false;
      for (std::size_t i = 0; i < s.num_instances() && !inside; ++i)
        inside = s.instance(i).cluster_of(e.u) == s.instance(i).cluster_of(e.v);
      ++total;
      uncovered += !inside;
    }
  }
  EXPECT_LE(static_cast<double>(uncovered), 0.01 * static_cast<double>(total));
}

TEST(MonotoneSpanner, NonForestDeletionIsSilent) {
  Rng rng(5);
  const auto es = random_graph(60, 300, rng);
  MonotoneSpanner s(60, es, 5);
  for (const Edge& e : es) {
    if (s.contains(e)) continue;
    EXPECT_TRUE(s.delete_batch(std::vector<Edge>{e}).empty());
    return;
  }
}

TEST(MonotoneSpanner, RecourseLedgerBounded) {
  Rng rng(4);
  const std::size_t n = 256;
  auto es = random_graph(n, 2048, rng);
  MonotoneSpanner s(n, es, 4);
  Graph g(n, es);
  while (g.num_edges() > 0) {
    const auto del = pick(g.edges(), 64, rng);
    for (const Edge& e : del) g.erase(e);
    s.delete_batch(del);
  }
  const double l = std::log2(static_cast<double>(n));
  EXPECT_LE(static_cast<double>(s.recourse()), 1.0 * n * l * l * l);
}

TEST(BundleChain, OneLevelEqualsMonotone) {
  Rng rng(7);
  const auto es = random_graph(40, 150, rng);
  BundleChain b(40, es, 1, 9);
  MonotoneSpanner s(40, es, derive_seed(9, 0));
  EXPECT_EQ(b.output(), s.output());
}

TEST(BundleChain, LargeTSwallowsGraph) {
  Rng rng(8);
  const auto es = random_graph(30, 100, rng);
  BundleChain b(30, es, es.size(), 1);
  EXPECT_EQ(b.output(), es);
}

TEST(BundleChain, DisconnectedComponentsStaySeparate) {
  std::vector<Edge> es{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}};
  BundleChain b(6, es, 2, 3);
  for (const Edge& e : b.output()) EXPECT_EQ(e.u < 3, e.v < 3);
}

TEST(BundleChain, EmptyBatch) {
  Rng rng(1);
  BundleChain b(30, random_graph(30, 90, rng), 2, 1);
  EXPECT_TRUE(b.delete_batch(std::vector<Edge>{}).empty());
}

TEST(BundleChain, DeletingBundleEdgeReportsIt) {
  Rng rng(3);
  const auto es = random_graph(40, 200, rng);
  BundleChain b(40, es, 2, 3);
  const Edge e = *sorted_edges(b.level(0).h).begin();
  const auto d = b.delete_batch(std::vector<Edge>{e});
  EXPECT_TRUE(std::binary_search(d.deleted.begin(), d.deleted.end(), e));
}

TEST(BundleChain, FuzzValidityAndMonotonicity) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 20 + rng.below(100);
    const auto es = random_graph(n, 4 * n, rng);
    BundleChain b(n, es, 1 + rng.below(4), seed);
    Graph g(n, es);
    expect_levels_valid(b, g);
    const auto init = b.output();
    EdgeSet ever(init.begin(), init.end());
    while (g.num_edges() > 0) {
      const auto del = pick(g.edges(), 1 + rng.below(10), rng);
      for (const Edge& e : del) g.erase(e);
      const auto d = b.delete_batch(del);
      for (const Edge& e : d.inserted) ASSERT_TRUE(ever.insert(e).second) << "edge re-entered";
      expect_levels_valid(b, g);
      if (::testing::Test::HasFatalFailure()) return;
    }
  }
}
