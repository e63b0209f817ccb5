#include <gtest/gtest.h>

#include "bdsparse/oracle.hpp"
#include "bdsparse/sparsifier.hpp"
#include "test_util.hpp"

using namespace bdsparse;
using bdsparse::testing::non_edges;
using bdsparse::testing::pick;
using bdsparse::testing::random_graph;

namespace {

// The output rebuilt from the chain's levels.
std::vector<WeightedEdge> reconstruct(const SparsifierChain& c) {
  EdgeMap<std::uint64_t> w;
  for (std::size_t j = c.levels(); j >= 1; --j)
    for (const Edge& e : c.bundle(j).output()) w[e] = pow4(j - 1);
  for (const Edge& e : c.residual(c.levels()))
    if (!w.count(e)) w[e] = pow4(c.levels());
  std::vector<WeightedEdge> out;
  for (const auto& [e, x] : w) out.push_back({e, x});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Sparsifier, BundleSizeFormula) {
  EXPECT_EQ(bundle_size(16, 0.5, 1.0), 256u);
  EXPECT_EQ(bundle_size(2, 1.0, 1.0), 8u);
  EXPECT_EQ(stop_threshold(16), 16u);
}

TEST(Sparsifier, LightSparsifyBundleSwallowsGraph) {
  Rng rng(1);
  const auto es = random_graph(10, 20, rng);
  const auto r = light_sparsify_init(10, es, 1000, rng);
  EXPECT_TRUE(r.sampled.empty());
  EXPECT_EQ(r.bundle->output(), es);
}

TEST(Sparsifier, LightSparsifySamplesAQuarter) {
  double total = 0;
  int counted = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    Rng rng(seed);
    const auto es = random_graph(60, 800, rng);
    const auto r = light_sparsify_init(60, es, 1, rng);
    const double rest = static_cast<double>(es.size() - r.bundle->size());
    if (rest == 0) continue;
    total += static_cast<double>(r.sampled.size()) / rest;
    ++counted;
  }
  const double mean = total / counted;
  EXPECT_GE(mean, 0.2);
  EXPECT_LE(mean, 0.3);
}

TEST(Sparsifier, BelowStopThresholdIsUnlevelled) {
  const std::vector<Edge> es{{0, 1}, {1, 2}};
  SparsifierChain c(40, es, 1);
  EXPECT_EQ(c.levels(), 0u);
  EXPECT_EQ(c.output(), (std::vector<WeightedEdge>{{{0, 1}, 1}, {{1, 2}, 1}}));
}

TEST(Sparsifier, TriangleWithHugeT) {
  const std::vector<Edge> es{{0, 1}, {0, 2}, {1, 2}};
  SparsifierParams p;
  p.stop_override = 1;
  SparsifierChain c(3, es, 2, p);
  ASSERT_GE(c.levels(), 1u);
  EXPECT_EQ(c.bundle(1).output(), es);
  EXPECT_EQ(c.output(), oracle::unit_weights(es));
}

TEST(Sparsifier, WeightLawAndReconstructionUnderDeletions) {
  int multi_level = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 40;
    const auto es = random_graph(n, 700, rng);
    SparsifierParams p;
    p.t_override = 1 + rng.below(3);
    SparsifierChain c(n, es, seed, p);
    ASSERT_GE(c.levels(), 1u);
    multi_level += c.levels() >= 2;
    Graph g(n, es);
    auto out = c.output();
    ASSERT_EQ(out, reconstruct(c));
    while (g.num_edges() > 0) {
      const auto del = pick(g.edges(), 1 + rng.below(30), rng);
      for (const Edge& e : del) g.erase(e);
      const auto d = c.delete_batch(del);
      std::set<WeightedEdge> cur(out.begin(), out.end());
      for (const auto& we : d.deleted) ASSERT_EQ(cur.erase(we), 1u);
      for (const auto& we : d.inserted) ASSERT_TRUE(cur.insert(we).second);
      out = c.output();
      ASSERT_EQ(std::vector<WeightedEdge>(cur.begin(), cur.end()), out);
      ASSERT_EQ(out, reconstruct(c));
      for (const auto& we : out) ASSERT_TRUE(g.has_edge(we.edge));
    }
  }
  EXPECT_GE(multi_level, 5);
}

TEST(Sparsifier, EmptyBatch) {
  Rng rng(2);
  SparsifierChain c(20, random_graph(20, 100, rng), 1);
  EXPECT_TRUE(c.delete_batch(std::vector<Edge>{}).empty());
}

TEST(Sparsifier, UnsampledNonBundleDeletion) {
  Rng rng(6);
  const auto es = random_graph(40, 400, rng);
  SparsifierParams p;
  p.t_override = 1;
  SparsifierChain c(40, es, 6, p);
  for (const Edge& e : es) {
    if (c.weight_of(e)) continue;
    bool anywhere = false;
    for (std::size_t j = 1; j <= c.levels(); ++j) anywhere |= c.bundle(j).contains(e);
    if (anywhere) continue;
    const auto d = c.delete_batch(std::vector<Edge>{e});
    for (const auto& we : d.deleted) EXPECT_NE(we.edge, e);
    return;
  }
}

TEST(Sparsifier, CutsPreservedOnSmallGraphs) {
  int pass = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const auto es = random_graph(12, 40, rng);
    SparsifierChain c(12, es, seed);
    pass += oracle::enumerate_cuts(12, oracle::unit_weights(es), c.output(), 0.5).ok;
  }
  EXPECT_GE(pass, 19);
}

TEST(FullyDynamicSparsifier, MixedStreamKeepsInvariants) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const std::size_t n = 30;
    const auto es = random_graph(n, 150, rng);
    SparsifierParams p;
    p.t_override = 2;
    FullyDynamicSparsifier s(n, es, seed, p, 4);
    Graph g(n, es);
    for (int b = 0; b < 20; ++b) {
      const auto applied = g.apply_batch({non_edges(g, rng.below(10), rng), pick(g.edges(), rng.below(10), rng)});
      s.update(applied);
      ASSERT_NO_THROW(s.wrapper().check_invariants());
      const auto out = s.output();
      std::vector<Edge> support;
      for (const auto& we : out) support.push_back(we.edge);
      ASSERT_TRUE(std::adjacent_find(support.begin(), support.end()) == support.end());
      for (const Edge& e : support) ASSERT_TRUE(g.has_edge(e));
    }
  }
}
