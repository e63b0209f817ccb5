#include <gtest/gtest.h>

#include "bdsparse/oracle.hpp"
#include "bdsparse/spanner.hpp"
#include "test_util.hpp"

using namespace bdsparse;
using bdsparse::testing::complete_graph;
using bdsparse::testing::pick;
using bdsparse::testing::random_graph;

namespace {

void expect_clusters_match(const DecrementalSpanner& s) {
  const auto expect = oracle::brute_cluster(s.num_vertices(), s.graph().edges(),
                                            s.clustering().offsets());
  for (VertexId v = 0; v < s.num_vertices(); ++v) ASSERT_EQ(s.cluster_of(v), expect[v]) << "vertex " << v;
}

// Every inter-cluster pair (v, c) has exactly one pick, drawn from its bucket.
void expect_picks_valid(const DecrementalSpanner& s) {
  const auto h = s.output();
  EdgeSet hs(h.begin(), h.end());
  for (const Edge& e : s.graph().edges()) {
    const VertexId cu = s.cluster_of(e.u), cv = s.cluster_of(e.v);
    if (cu == cv) continue;
    for (auto [x, c] : {std::pair{e.u, cv}, std::pair{e.v, cu}}) {
      const auto p = s.pick(x, c);
      ASSERT_TRUE(p.has_value());
      ASSERT_TRUE(hs.count(*p));
      const auto b = s.bucket(x, c);
      ASSERT_TRUE(std::binary_search(b.begin(), b.end(), *p));
    }
  }
}

}  // namespace

TEST(SampleOffsets, BoundedAndDeterministic) {
  for (int k : {1, 2, 3, 5}) {
    Rng a(7), b(7);
    const auto oa = sample_offsets(100, k, a), ob = sample_offsets(100, k, b);
    EXPECT_EQ(oa.delta, ob.delta);
    for (double d : oa.delta) EXPECT_LT(d, k);
    std::vector<std::uint32_t> pr = oa.priority;
    std::sort(pr.begin(), pr.end());
    for (std::uint32_t i = 0; i < pr.size(); ++i) EXPECT_EQ(pr[i], i + 1);
  }
}

TEST(SampleOffsets, FirstRoundAcceptanceNearNinetyPercent) {
  Rng rng(11);
  int accepted = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) accepted += sample_offsets(100, 3, rng).rounds == 1;
  EXPECT_NEAR(static_cast<double>(accepted) / trials, 0.9, 0.05);
}

TEST(DecrementalSpanner, KOneKeepsEverything) {
  Rng rng(3);
  const auto es = random_graph(40, 150, rng);
  DecrementalSpanner s(40, es, 1, 5);
  EXPECT_EQ(s.output(), es);
  for (VertexId v = 0; v < 40; ++v) EXPECT_EQ(s.cluster_of(v), v);
}

TEST(DecrementalSpanner, K4) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto es = complete_graph(4);
    DecrementalSpanner s(4, es, 2, seed);
    EXPECT_LE(s.size(), 6u);
    EXPECT_TRUE(oracle::check_stretch(Graph(4, es), s.output(), 3).ok);
  }
}

TEST(DecrementalSpanner, EmptyGraph) {
  DecrementalSpanner s(10, std::vector<Edge>{}, 3, 1);
  EXPECT_EQ(s.size(), 0u);
  for (VertexId v = 0; v < 10; ++v) EXPECT_EQ(s.cluster_of(v), v);
}

TEST(DecrementalSpanner, TwoVertexComponentVanishes) {
  const std::vector<Edge> es{{0, 1}, {2, 3}, {3, 4}};
  DecrementalSpanner s(5, es, 2, 4);
  const auto d = s.delete_batch(std::vector<Edge>{{0, 1}});
  EXPECT_EQ(d.deleted, (std::vector<Edge>{{0, 1}}));
  EXPECT_EQ(s.cluster_of(0), 0u);
  EXPECT_EQ(s.cluster_of(1), 1u);
}

TEST(DecrementalSpanner, RemovingAPickedEdgeWithoutAlternativeDropsIt) {
  // Find a bucket of size one and delete its edge.
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    const auto es = random_graph(30, 60, rng);
    DecrementalSpanner s(30, es, 3, seed);
    for (const Edge& e : es) {
      const VertexId cu = s.cluster_of(e.u), cv = s.cluster_of(e.v);
      if (cu == cv || s.bucket(e.u, cv).size() != 1 || s.bucket(e.v, cu).size() != 1) continue;
      s.delete_batch(std::vector<Edge>{e});
      const auto h = s.output();
      EXPECT_FALSE(std::binary_search(h.begin(), h.end(), e));
      expect_picks_valid(s);
      return;
    }
  }
  GTEST_SKIP() << "no singleton bucket found";
}

TEST(DecrementalSpanner, IsolatedVertexIsItsOwnCluster) {
  DecrementalSpanner s(6, std::vector<Edge>{{0, 1}, {1, 2}}, 2, 9);
  EXPECT_EQ(s.cluster_of(5), 5u);
}

TEST(DecrementalSpanner, FuzzAgainstOracles) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    for (int k : {2, 3, 5}) {
      Rng rng(seed * 10 + k);
      const std::size_t n = 20 + rng.below(80);
      auto es = random_graph(n, n * 3, rng);
      DecrementalSpanner s(n, es, k, seed);
      Graph g(n, es);
      expect_clusters_match(s);
      while (g.num_edges() > 0) {
        const auto del = pick(g.edges(), 1 + rng.below(12), rng);
        for (const Edge& e : del) g.erase(e);
        const auto before = s.output();
        const auto d = s.delete_batch(del);
        // The delta transforms the old output into the new one.
        EdgeSet cur(before.begin(), before.end());
        for (const Edge& e : d.deleted) ASSERT_EQ(cur.erase(e), 1u);
        for (const Edge& e : d.inserted) ASSERT_TRUE(cur.insert(e).second);
        ASSERT_EQ(sorted_edges(cur), s.output());
        expect_clusters_match(s);
        expect_picks_valid(s);
        const auto st = oracle::check_stretch(g, s.output(), 2 * k - 1);
        ASSERT_TRUE(st.ok) << "seed " << seed << " k " << k;
        ASSERT_FALSE(oracle::check_es_tree(s.clustering().tree()).has_value());
      }
    }
  }
}

TEST(DecrementalSpanner, DeterministicForSeed) {
  Rng rng(1);
  const auto es = random_graph(60, 300, rng);
  DecrementalSpanner a(60, es, 3, 77), b(60, es, 3, 77);
  EXPECT_EQ(a.output(), b.output());
  const auto del = pick(es, 40, rng);
  EXPECT_EQ(a.delete_batch(del), b.delete_batch(del));
}
