#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"

namespace bdsparse::testing {

inline std::vector<Edge> random_graph(std::size_t n, std::size_t m, Rng& rng) {
  EdgeSet seen;
  std::vector<Edge> out;
  const std::size_t cap = n * (n - 1) / 2;
  if (m > cap) m = cap;
  while (out.size() < m) {
    const auto a = static_cast<VertexId>(rng.below(n));
    const auto b = static_cast<VertexId>(rng.below(n));
    if (a == b) continue;
    const Edge e = canonicalize(a, b);
    if (seen.insert(e).second) out.push_back(e);
  }
  sort_unique(out);
  return out;
}

// Up to k distinct edges of `from`, chosen uniformly.
inline std::vector<Edge> pick(const std::vector<Edge>& from, std::size_t k, Rng& rng) {
  std::vector<Edge> pool = from;
  std::vector<Edge> out;
  while (out.size() < k && !pool.empty()) {
    const std::size_t i = rng.below(pool.size());
    out.push_back(pool[i]);
    pool[i] = pool.back();
    pool.pop_back();
  }
  sort_unique(out);
  return out;
}

// Up to k edges on n vertices absent from g.
inline std::vector<Edge> non_edges(const Graph& g, std::size_t k, Rng& rng) {
  EdgeSet seen;
  std::vector<Edge> out;
  const std::size_t n = g.num_vertices();
  for (int tries = 0; out.size() < k && tries < 1000; ++tries) {
    const auto a = static_cast<VertexId>(rng.below(n));
    const auto b = static_cast<VertexId>(rng.below(n));
    if (a == b) continue;
    const Edge e = canonicalize(a, b);
    if (!g.has_edge(e) && seen.insert(e).second) out.push_back(e);
  }
  sort_unique(out);
  return out;
}

inline std::vector<Edge> complete_graph(std::size_t n) {
  std::vector<Edge> out;
  for (VertexId u = 0; u < n; ++u)
    for (VertexId v = u + 1; v < n; ++v) out.push_back({u, v});
  return out;
}

}  // namespace bdsparse::testing
