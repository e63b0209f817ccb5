#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "bdsparse/contraction.hpp"
#include "bdsparse/es_tree.hpp"
#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"
#include "bdsparse/sparsifier.hpp"
#include "bdsparse/spanner.hpp"

namespace bdsparse::oracle {

using AdjList = std::vector<std::vector<VertexId>>;

inline AdjList adjacency(std::size_t n, std::span<const Edge> edges) {
  AdjList adj(n);
  for (const Edge& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

// Hop distances from s; unreachable (or beyond limit) vertices get n.
inline std::vector<std::uint32_t> bfs(const AdjList& adj, VertexId s,
                                      std::uint32_t limit = std::numeric_limits<std::uint32_t>::max()) {
  const auto n = static_cast<std::uint32_t>(adj.size());
  std::vector<std::uint32_t> dist(n, n);
  std::vector<VertexId> q{s};
  dist[s] = 0;
  for (std::size_t head = 0; head < q.size(); ++head) {
    const VertexId v = q[head];
    if (dist[v] >= limit) continue;
    for (VertexId w : adj[v]) {
      if (dist[w] == n) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
    }
  }
  return dist;
}

// dist[u][v] in hops; n encodes "unreachable".
inline std::vector<std::vector<std::uint32_t>> all_pairs_dist(std::size_t n,
                                                              std::span<const Edge> edges) {
  const AdjList adj = adjacency(n, edges);
  std::vector<std::vector<std::uint32_t>> d(n);
  for (VertexId s = 0; s < n; ++s) d[s] = bfs(adj, s);
  return d;
}

struct StretchReport {
  bool ok = true;
  std::uint32_t worst = 0;       // largest dist_H(u, v) over checked edges (n if disconnected)
  std::optional<Edge> witness;   // first edge violating the bound
  std::size_t checked = 0;
};

// dist_H(u, v) <= s for every edge (u, v) in `check`.
inline StretchReport check_stretch_edges(std::size_t n, std::span<const Edge> h,
                                         std::span<const Edge> check, std::uint64_t s) {
  StretchReport r;
  const AdjList adj = adjacency(n, h);
  std::vector<std::vector<VertexId>> by_source(n);
  for (const Edge& e : check) by_source[e.u].push_back(e.v);
  const auto limit = static_cast<std::uint32_t>(std::min<std::uint64_t>(s, n));
  for (VertexId u = 0; u < n; ++u) {
    if (by_source[u].empty()) continue;
    const auto dist = bfs(adj, u, limit);
    std::sort(by_source[u].begin(), by_source[u].end());
    for (VertexId v : by_source[u]) {
      ++r.checked;
      const bool reached = dist[v] < n && dist[v] <= limit;
      const std::uint32_t d = reached ? dist[v] : static_cast<std::uint32_t>(n);
      r.worst = std::max(r.worst, d);
      if ((!reached || d > s) && r.ok) {
        r.ok = false;
        r.witness = Edge{u, v};
      }
    }
  }
  return r;
}

inline StretchReport check_stretch(const Graph& g, std::span<const Edge> h, std::uint64_t s) {
  const auto edges = g.edges();
  return check_stretch_edges(g.num_vertices(), h, edges, s);
}

// Cluster of every vertex: argmin over u of (dist(u, v) - d_u), ties to the
// larger fractional part.
inline std::vector<VertexId> brute_cluster(std::size_t n, std::span<const Edge> edges,
                                           const ExpOffsets& off) {
  const AdjList adj = adjacency(n, edges);
  std::vector<VertexId> best(n);
  std::vector<std::int64_t> best_key(n, std::numeric_limits<std::int64_t>::max());
  std::vector<double> best_f(n, -1.0);
  for (VertexId u = 0; u < n; ++u) {
    const auto dist = bfs(adj, u);
    for (VertexId v = 0; v < n; ++v) {
      if (dist[v] == n) continue;
      const std::int64_t key = static_cast<std::int64_t>(dist[v]) - off.d[u];
      if (key < best_key[v] || (key == best_key[v] && off.frac[u] > best_f[v])) {
        best_key[v] = key;
        best_f[v] = off.frac[u];
        best[v] = u;
      }
    }
  }
  return best;
}

// Largest hop count from a cluster center to a member along the cluster
// forest, found by BFS over the forest edges from every center.
inline std::uint32_t forest_depth(const ExpStartClustering& c) {
  const std::size_t n = c.num_vertices();
  const auto forest = c.forest_edges();
  const AdjList adj = adjacency(n, forest);
  std::vector<std::uint32_t> dist(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<VertexId> q;
  for (VertexId v = 0; v < n; ++v)
    if (c.cluster_of(v) == v) {
      dist[v] = 0;
      q.push_back(v);
    }
  std::uint32_t worst = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const VertexId v = q[i];
    worst = std::max(worst, dist[v]);
    for (VertexId w : adj[v])
      if (dist[w] == std::numeric_limits<std::uint32_t>::max()) {
        dist[w] = dist[v] + 1;
        q.push_back(w);
      }
  }
  return worst;
}

// Dense weighted Laplacian, row-major.
struct Laplacian {
  std::size_t n = 0;
  std::vector<double> a;

  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  double quadratic_form(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += a[i * n + j] * x[j];
      s += x[i] * row;
    }
    return s;
  }
};

inline Laplacian laplacian(std::size_t n, std::span<const WeightedEdge> edges) {
  Laplacian l{n, std::vector<double>(n * n, 0.0)};
  for (const auto& we : edges) {
    const auto w = static_cast<double>(we.weight);
    const std::size_t u = we.edge.u, v = we.edge.v;
    l.a[u * n + v] -= w;
    l.a[v * n + u] -= w;
    l.a[u * n + u] += w;
    l.a[v * n + v] += w;
  }
  return l;
}

inline std::vector<WeightedEdge> unit_weights(std::span<const Edge> edges) {
  std::vector<WeightedEdge> out;
  out.reserve(edges.size());
  for (const Edge& e : edges) out.push_back({e, 1});
  return out;
}

// Total weight of edges with exactly one endpoint in the vertex mask.
inline double cut_weight(std::span<const WeightedEdge> edges, const std::vector<char>& side) {
  double w = 0.0;
  for (const auto& we : edges)
    if (side[we.edge.u] != side[we.edge.v]) w += static_cast<double>(we.weight);
  return w;
}

struct CutReport {
  bool ok = true;
  std::size_t cuts = 0;
  bool exhaustive = false;
  double worst_ratio = 1.0;  // the w_G / w_H farthest from 1 (inf when w_H = 0 < w_G)
  std::vector<char> witness;
};

inline constexpr std::size_t kExhaustiveCutLimit = 14;
inline constexpr std::size_t kSampledCuts = 100000;

// (1 - eps) w_H(U) <= w_G(U) <= (1 + eps) w_H(U) for every proper cut U
// (exhaustive up to 14 vertices, otherwise sampled).
inline CutReport enumerate_cuts(std::size_t n, std::span<const WeightedEdge> g,
                                std::span<const WeightedEdge> h, double eps,
                                std::uint64_t seed = 0, std::size_t samples = kSampledCuts) {
  CutReport r;
  if (n < 2) return r;
  auto consider = [&](const std::vector<char>& side) {
    ++r.cuts;
    const double wg = cut_weight(g, side), wh = cut_weight(h, side);
    const double tol = 1e-9 * std::max(1.0, wg);
    const bool pass = (1.0 - eps) * wh <= wg + tol && wg <= (1.0 + eps) * wh + tol;
    double ratio = 1.0;
    if (wh > 0.0) ratio = wg / wh;
    else if (wg > 0.0) ratio = std::numeric_limits<double>::infinity();
    if (std::abs(std::log(ratio)) > std::abs(std::log(r.worst_ratio))) r.worst_ratio = ratio;
    if (!pass && r.ok) {
      r.ok = false;
      r.witness = side;
    }
  };
  std::vector<char> side(n, 0);
  if (n <= kExhaustiveCutLimit) {
    r.exhaustive = true;
    const std::uint64_t total = std::uint64_t{1} << (n - 1);
    for (std::uint64_t mask = 1; mask < total; ++mask) {
      for (std::size_t v = 0; v + 1 < n; ++v) side[v] = (mask >> v) & 1;
      side[n - 1] = 0;
      consider(side);
    }
    return r;
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    bool any_in = false, any_out = false;
    for (std::size_t v = 0; v < n; ++v) {
      side[v] = static_cast<char>(rng.next() & 1);
      any_in |= side[v] != 0;
      any_out |= side[v] == 0;
    }
    if (!any_in || !any_out) continue;
    consider(side);
  }
  return r;
}

struct QuadReport {
  bool ok = true;
  std::size_t trials = 0;
  double worst_ratio = 1.0;
};

// Sampled x^T L_G x versus x^T L_H x: half random sign vectors, half standard
// normal vectors; constant vectors are skipped.
inline QuadReport quadratic_form_check(const Laplacian& lg, const Laplacian& lh, double eps,
                                       std::size_t trials, std::uint64_t seed) {
  QuadReport r;
  Rng rng(seed);
  const std::size_t n = lg.n;
  std::vector<double> x(n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t v = 0; v < n; ++v)
      x[v] = t % 2 == 0 ? ((rng.next() & 1) ? 1.0 : -1.0) : rng.normal();
    bool constant = true;
    for (std::size_t v = 1; v < n; ++v) constant &= x[v] == x[0];
    if (constant) continue;
    ++r.trials;
    const double qg = lg.quadratic_form(x), qh = lh.quadratic_form(x);
    const double tol = 1e-9 * std::max(1.0, std::abs(qg));
    if (!((1.0 - eps) * qh <= qg + tol && qg <= (1.0 + eps) * qh + tol)) r.ok = false;
    double ratio = 1.0;
    if (qh > 1e-12) ratio = qg / qh;
    else if (qg > 1e-12) ratio = std::numeric_limits<double>::infinity();
    if (std::abs(std::log(ratio)) > std::abs(std::log(r.worst_ratio))) r.worst_ratio = ratio;
  }
  return r;
}

// Recomputes Dist by BFS over live arcs and the expected parent of each
// vertex by a full scan of its in-arcs. Returns a description of the first
// mismatch.
inline std::optional<std::string> check_es_tree(const EsTree& t) {
  const std::size_t n = t.num_vertices();
  std::vector<Arc> live;
  for (EsTree::ArcId a = 0; a < t.num_arcs(); ++a)
    if (t.alive(a)) live.push_back(t.arc(a));
  const auto dist = bounded_bfs(n, live, t.source(), t.depth());
  for (VertexId v = 0; v < n; ++v)
    if (dist[v] != t.dist(v))
      return "vertex " + std::to_string(v) + ": Dist " + std::to_string(t.dist(v)) +
             ", expected " + std::to_string(dist[v]);
  std::vector<EsTree::ArcId> best(n, EsTree::kNoArc);
  for (EsTree::ArcId a = 0; a < t.num_arcs(); ++a) {
    if (!t.alive(a)) continue;
    const Arc& arc = t.arc(a);
    if (dist[arc.tail] + 1 != dist[arc.head] || dist[arc.head] > t.depth()) continue;
    if (best[arc.head] == EsTree::kNoArc || t.priority(a) > t.priority(best[arc.head]))
      best[arc.head] = a;
  }
  for (VertexId v = 0; v < n; ++v)
    if (best[v] != t.parent_arc(v))
      return "vertex " + std::to_string(v) + ": parent arc " + std::to_string(t.parent_arc(v)) +
             ", expected " + std::to_string(best[v]);
  return std::nullopt;
}

// Rebuilds head, H, NextLevelEdges and E' of a contraction layer from its
// edge set, sample and random keys, and checks the witness maps.
inline std::optional<std::string> check_contraction_layer(const ContractionLayer& layer) {
  const std::size_t n = layer.num_vertices();
  const std::vector<Edge> edges = layer.edges();
  std::vector<std::int64_t> head(n, -1);
  std::vector<std::uint64_t> best(n, 0);
  for (VertexId v = 0; v < n; ++v)
    if (layer.sampled(v)) head[v] = v;
  for (const Edge& e : edges) {
    const std::uint64_t r = layer.rand_of(e);
    for (auto [x, y] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
      if (layer.sampled(x) || !layer.sampled(y)) continue;
      if (head[x] == -1 || r < best[x]) {
        head[x] = y;
        best[x] = r;
      }
    }
  }
  for (VertexId v = 0; v < n; ++v)
    if (head[v] != layer.head(v))
      return "layer vertex " + std::to_string(v) + ": head " + std::to_string(layer.head(v)) +
             ", expected " + std::to_string(head[v]);
  std::vector<Edge> h;
  std::vector<std::pair<Edge, Edge>> nle;
  for (const Edge& e : edges) {
    const auto hu = head[e.u], hv = head[e.v];
    if (hu == -1 || hv == -1 || (hu == hv && (hu == e.u || hu == e.v))) {
      h.push_back(e);
    } else if (hu != hv) {
      nle.emplace_back(canonicalize(static_cast<VertexId>(layer.next_id(hu)),
                                    static_cast<VertexId>(layer.next_id(hv))),
                       e);
    }
  }
  std::sort(nle.begin(), nle.end());
  if (h != layer.h_edges()) return "H differs from reconstruction";
  if (nle != layer.next_level_entries()) return "NextLevelEdges differ from reconstruction";
  std::vector<Edge> groups;
  for (const auto& [g, e] : nle) groups.push_back(g);
  sort_unique(groups);
  if (groups != layer.next_edges()) return "next-layer edge set differs from reconstruction";
  if (layer.bwd().size() != groups.size() || layer.fwd().size() != groups.size())
    return "correspondence size mismatch";
  for (const Edge& g : groups) {
    auto it = layer.bwd().find(g);
    if (it == layer.bwd().end()) return "group without witness";
    if (!std::binary_search(nle.begin(), nle.end(), std::pair{g, it->second}))
      return "witness is not a member of its group";
    auto f = layer.fwd().find(it->second);
    if (f == layer.fwd().end() || f->second != g) return "forward correspondence is not inverse";
  }
  return std::nullopt;
}

}  // namespace bdsparse::oracle
