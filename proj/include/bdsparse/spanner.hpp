#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "bdsparse/es_tree.hpp"
#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"

namespace bdsparse {

// Per-vertex exponential head starts. delta[u] = d[u] + frac[u] with d the
// integer part; priority[u] is the rank of frac[u] in increasing order (1..n).
struct ExpOffsets {
  double beta = 0.0;
  std::vector<double> delta;
  std::vector<int> d;
  std::vector<double> frac;
  std::vector<std::uint32_t> priority;
  int rounds = 0;  // sampling rounds used, including the accepted one

  std::size_t size() const noexcept { return delta.size(); }
  int max_d() const noexcept { return d.empty() ? 0 : *std::max_element(d.begin(), d.end()); }
};

inline constexpr int kOffsetRetryCap = 200;

// Draws delta[u] ~ Exp(beta) i.i.d., retrying while max delta >= bound or two
// fractional parts coincide.
inline ExpOffsets sample_offsets_bounded(std::size_t n, double beta, double bound, Rng& rng,
                                         int max_rounds = kOffsetRetryCap) {
  if (!(beta > 0.0)) throw std::invalid_argument("sample_offsets: beta must be positive");
  ExpOffsets out;
  out.beta = beta;
  for (int round = 1; round <= max_rounds; ++round) {
    out.delta.assign(n, 0.0);
    double mx = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      out.delta[u] = rng.exponential(beta);
      mx = std::max(mx, out.delta[u]);
    }
    if (n > 0 && mx >= bound) continue;
    out.d.assign(n, 0);
    out.frac.assign(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      const double fl = std::floor(out.delta[u]);
      out.d[u] = static_cast<int>(fl);
      out.frac[u] = out.delta[u] - fl;
    }
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return out.frac[a] < out.frac[b]; });
    bool collision = false;
    for (std::size_t i = 1; i < n; ++i) collision |= out.frac[order[i]] == out.frac[order[i - 1]];
    if (collision) continue;
    out.priority.assign(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) out.priority[order[i]] = i + 1;
    out.rounds = round;
    return out;
  }
  throw std::runtime_error("sample_offsets: retry cap reached");
}

// beta = ln(10n)/k, conditioned on max delta < k.
inline ExpOffsets sample_offsets(std::size_t n, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("sample_offsets: k must be at least 1");
  const double beta = std::log(10.0 * static_cast<double>(std::max<std::size_t>(n, 1))) / k;
  return sample_offsets_bounded(n, beta, static_cast<double>(k), rng);
}

// Exponential start-time clustering maintained under edge deletions through an
// ES-tree on the auxiliary digraph: real vertices 0..n-1, path vertices
// p_i = n + i for i < t, arcs p_i -> p_{i+1}, p_{t-1-d_v} -> v, and both
// orientations of every edge.
class ExpStartClustering {
 public:
  struct ClusterChange {
    VertexId v;
    VertexId old_cluster;
    VertexId new_cluster;
  };
  struct Update {
    std::vector<ClusterChange> cluster_changes;
    std::vector<Edge> forest_removed;
    std::vector<Edge> forest_added;
    std::size_t dist_changes = 0;
  };

  ExpStartClustering(std::size_t n, std::span<const Edge> edges, ExpOffsets offsets)
      : n_(n), offsets_(std::move(offsets)) {
    if (offsets_.size() != n) throw std::invalid_argument("ExpStartClustering: offset count mismatch");
    t_ = offsets_.max_d() + 1;
    aux_n_ = n_ + static_cast<std::size_t>(t_);
    std::vector<Arc> arcs;
    arcs.reserve(2 * edges.size() + n_ + static_cast<std::size_t>(t_));
    for (const Edge& e : edges) {
      if (e.v >= n_) throw std::out_of_range("ExpStartClustering: edge endpoint out of range");
      arcs.push_back({e.u, e.v});
      arcs.push_back({e.v, e.u});
    }
    for (int i = 0; i + 1 < t_; ++i) arcs.push_back({path(i), path(i + 1)});
    for (VertexId v = 0; v < n_; ++v) arcs.push_back({path(t_ - 1 - offsets_.d[v]), v});
    // Provisional tags; the first fixpoint pass below replaces them.
    std::vector<EsTree::Priority> tags(arcs.size());
    for (std::size_t i = 0; i < arcs.size(); ++i) tags[i] = arcs[i].tail + 1;
    tree_.emplace(aux_n_, path(0), t_, std::move(arcs), std::move(tags));

    cluster_.resize(n_);
    for (VertexId v = 0; v < n_; ++v) cluster_[v] = v;
    changes_.assign(n_, 0);
    std::vector<std::vector<VertexId>> by_dist(static_cast<std::size_t>(t_) + 2);
    for (VertexId v = 0; v < n_; ++v) by_dist[tree_->dist(v)].push_back(v);
    for (auto& level : by_dist) {
      for (VertexId v : level) {
        retag_in_arcs_of_entry(v);
        tree_->reselect_parent(v);
        cluster_[v] = derive_cluster(v);
        retag_out(v);
      }
    }
  }

  std::size_t num_vertices() const noexcept { return n_; }
  const ExpOffsets& offsets() const noexcept { return offsets_; }
  const EsTree& tree() const noexcept { return *tree_; }
  int depth() const noexcept { return t_; }
  VertexId path(int i) const noexcept { return static_cast<VertexId>(n_ + static_cast<std::size_t>(i)); }
  VertexId cluster_of(VertexId v) const { return cluster_.at(v); }
  const std::vector<VertexId>& clusters() const noexcept { return cluster_; }
  std::uint64_t cluster_change_count(VertexId v) const { return changes_.at(v); }

  // Tag expected on arc tail -> head under the current clusters.
  EsTree::Priority expected_tag(VertexId tail, VertexId head) const {
    const std::uint64_t scale = aux_n_ + 1;
    if (head >= n_) return 1;
    const std::uint64_t p = tail < n_ ? offsets_.priority[cluster_[tail]] : offsets_.priority[head];
    return p * scale + tail + 1;
  }

  // Parent edge of v in the cluster forest, if the parent is a real vertex.
  std::optional<Edge> forest_edge(VertexId v) const {
    const auto p = tree_->parent(v);
    if (!p || *p >= n_) return std::nullopt;
    return canonicalize(v, *p);
  }

  std::vector<Edge> forest_edges() const {
    std::vector<Edge> out;
    for (VertexId v = 0; v < n_; ++v)
      if (auto e = forest_edge(v)) out.push_back(*e);
    std::sort(out.begin(), out.end());
    return out;
  }

  Update delete_batch(std::span<const Edge> edges) {
    std::vector<Arc> arcs;
    arcs.reserve(2 * edges.size());
    for (const Edge& e : edges) {
      arcs.push_back({e.u, e.v});
      arcs.push_back({e.v, e.u});
    }
    std::unordered_map<VertexId, std::optional<Edge>> old_forest;
    const EsTree::ChangeReport report = tree_->delete_batch(arcs);
    Update up;
    up.dist_changes = report.dist_changes.size();

    std::vector<std::vector<VertexId>> bucket(static_cast<std::size_t>(t_) + 2);
    std::vector<char> marked(n_, 0);
    auto mark = [&](VertexId v) {
      if (v >= n_ || marked[v]) return;
      marked[v] = 1;
      bucket[tree_->dist(v)].push_back(v);
    };
    for (const auto& pc : report.parent_changes) {
      if (pc.v >= n_) continue;
      old_forest.try_emplace(pc.v, forest_edge_of_arc(pc.v, pc.old_arc));
      mark(pc.v);
    }
    for (const auto& dc : report.dist_changes) mark(dc.v);

    std::unordered_map<VertexId, VertexId> old_cluster;
    for (int d = 1; d <= t_; ++d) {
      for (std::size_t idx = 0; idx < bucket[d].size(); ++idx) {
        const VertexId v = bucket[d][idx];
        const EsTree::ArcId before = tree_->parent_arc(v);
        if (tree_->reselect_parent(v)) old_forest.try_emplace(v, forest_edge_of_arc(v, before));
        const VertexId c = derive_cluster(v);
        if (c == cluster_[v]) continue;
        old_cluster.try_emplace(v, cluster_[v]);
        cluster_[v] = c;
        ++changes_[v];
        retag_out(v);
        for (EsTree::ArcId a : tree_->out_arcs(v)) {
          const VertexId w = tree_->arc(a).head;
          if (tree_->alive(a) && w < n_ && tree_->dist(w) == d + 1) mark(w);
        }
      }
    }

    for (const auto& [v, oc] : old_cluster)
      if (oc != cluster_[v]) up.cluster_changes.push_back({v, oc, cluster_[v]});
    std::sort(up.cluster_changes.begin(), up.cluster_changes.end(),
              [](const ClusterChange& a, const ClusterChange& b) { return a.v < b.v; });
    for (const auto& [v, before] : old_forest) {
      const auto now = forest_edge(v);
      if (before == now) continue;
      if (before) up.forest_removed.push_back(*before);
      if (now) up.forest_added.push_back(*now);
    }
    std::sort(up.forest_removed.begin(), up.forest_removed.end());
    std::sort(up.forest_added.begin(), up.forest_added.end());
    return up;
  }

 private:
  std::optional<Edge> forest_edge_of_arc(VertexId v, EsTree::ArcId a) const {
    if (a == EsTree::kNoArc) return std::nullopt;
    const VertexId p = tree_->arc(a).tail;
    if (p >= n_) return std::nullopt;
    return canonicalize(v, p);
  }

  VertexId derive_cluster(VertexId v) const {
    const auto p = tree_->parent(v);
    if (!p) throw std::logic_error("ExpStartClustering: real vertex without parent");
    return *p >= n_ ? v : cluster_[*p];
  }

  void retag_in_arcs_of_entry(VertexId v) {
    const VertexId p = path(t_ - 1 - offsets_.d[v]);
    if (auto a = tree_->find_arc(p, v)) tree_->set_priority(*a, expected_tag(p, v));
  }

  void retag_out(VertexId v) {
    for (EsTree::ArcId a : tree_->out_arcs(v)) {
      if (!tree_->alive(a)) continue;
      const VertexId w = tree_->arc(a).head;
      tree_->set_priority(a, expected_tag(v, w));
    }
  }

  std::size_t n_;
  std::size_t aux_n_ = 0;
  int t_ = 1;
  ExpOffsets offsets_;
  std::optional<EsTree> tree_;
  std::vector<VertexId> cluster_;
  std::vector<std::uint64_t> changes_;
};

// Decremental (2k-1)-spanner: the cluster forest plus, for every vertex v and
// neighboring cluster c != Cluster(v), one picked edge from v into c.
class DecrementalSpanner {
 public:
  using output_type = Edge;

  static Edge as_identity_output(const Edge& e) { return e; }

  DecrementalSpanner(std::size_t n, std::span<const Edge> edges, int k, std::uint64_t seed)
      : k_(k), graph_(n, edges) {
    Rng rng(seed);
    clustering_.emplace(n, edges, sample_offsets(n, k, rng));
    for (const Edge& e : clustering_->forest_edges()) output_.add(e);
    std::unordered_set<std::uint64_t> touched;
    for (const Edge& e : graph_.edges()) bucket_insert(e, touched);
    settle(touched);
    output_.take_delta();
  }

  int k() const noexcept { return k_; }
  std::size_t num_vertices() const noexcept { return graph_.num_vertices(); }
  const Graph& graph() const noexcept { return graph_; }
  const ExpStartClustering& clustering() const noexcept { return *clustering_; }
  VertexId cluster_of(VertexId v) const { return clustering_->cluster_of(v); }

  std::vector<Edge> output() const { return output_.elements(); }
  std::size_t size() const noexcept { return output_.size(); }
  std::uint64_t last_cluster_changes() const noexcept { return last_cluster_changes_; }

  // Picked edge of InterCluster[(v, c)], if the bucket is nonempty.
  std::optional<Edge> pick(VertexId v, VertexId c) const {
    auto it = buckets_.find(key(v, c));
    if (it == buckets_.end()) return std::nullopt;
    return it->second.pick;
  }

  // Members of InterCluster[(v, c)], sorted.
  std::vector<Edge> bucket(VertexId v, VertexId c) const {
    auto it = buckets_.find(key(v, c));
    if (it == buckets_.end()) return {};
    return {it->second.edges.begin(), it->second.edges.end()};
  }

  std::size_t num_buckets() const noexcept { return buckets_.size(); }

  DeltaEdges<Edge> delete_batch(std::span<const Edge> edges) {
    std::vector<Edge> present;
    for (const Edge& e : edges)
      if (graph_.has_edge(e)) present.push_back(e);
    sort_unique(present);
    std::unordered_set<std::uint64_t> touched;
    for (const Edge& e : present) {
      bucket_erase(e, [&](VertexId x) { return cluster_of(x); }, touched);
      graph_.erase(e);
    }
    const auto up = clustering_->delete_batch(present);
    last_cluster_changes_ = up.cluster_changes.size();
    for (const Edge& e : up.forest_removed) output_.remove(e);
    for (const Edge& e : up.forest_added) output_.add(e);

    if (!up.cluster_changes.empty()) {
      std::unordered_map<VertexId, VertexId> old;
      for (const auto& c : up.cluster_changes) old.emplace(c.v, c.old_cluster);
      auto old_cluster = [&](VertexId x) {
        auto it = old.find(x);
        return it == old.end() ? cluster_of(x) : it->second;
      };
      std::vector<Edge> incident;
      for (const auto& c : up.cluster_changes)
        for (VertexId w : graph_.neighbors(c.v)) incident.push_back(canonicalize(c.v, w));
      sort_unique(incident);
      for (const Edge& e : incident) bucket_erase(e, old_cluster, touched);
      for (const Edge& e : incident) bucket_insert(e, touched);
    }
    settle(touched);
    return output_.take_delta();
  }

 private:
  struct Bucket {
    std::set<Edge> edges;
    std::optional<Edge> pick;
  };

  static std::uint64_t key(VertexId v, VertexId c) {
    return (static_cast<std::uint64_t>(v) << 32) | c;
  }

  void bucket_insert(const Edge& e, std::unordered_set<std::uint64_t>& touched) {
    const VertexId cu = cluster_of(e.u), cv = cluster_of(e.v);
    if (cu == cv) return;
    for (const auto& [x, c] : {std::pair{e.u, cv}, std::pair{e.v, cu}}) {
      const std::uint64_t kk = key(x, c);
      buckets_[kk].edges.insert(e);
      touched.insert(kk);
    }
  }

  template <class ClusterFn>
  void bucket_erase(const Edge& e, ClusterFn cluster, std::unordered_set<std::uint64_t>& touched) {
    const VertexId cu = cluster(e.u), cv = cluster(e.v);
    if (cu == cv) return;
    for (const auto& [x, c] : {std::pair{e.u, cv}, std::pair{e.v, cu}}) {
      const std::uint64_t kk = key(x, c);
      auto it = buckets_.find(kk);
      if (it == buckets_.end() || it->second.edges.erase(e) == 0)
        throw std::logic_error("DecrementalSpanner: inter-cluster bucket out of sync");
      touched.insert(kk);
    }
  }

  // Repairs picks of touched buckets: a surviving pick is kept, otherwise the
  // smallest member in canonical order is picked.
  void settle(const std::unordered_set<std::uint64_t>& touched) {
    std::vector<std::uint64_t> keys(touched.begin(), touched.end());
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t kk : keys) {
      auto it = buckets_.find(kk);
      if (it == buckets_.end()) continue;
      Bucket& b = it->second;
      if (b.pick && !b.edges.count(*b.pick)) {
        output_.remove(*b.pick);
        b.pick.reset();
      }
      if (!b.pick && !b.edges.empty()) {
        b.pick = *b.edges.begin();
        output_.add(*b.pick);
      }
      if (b.edges.empty()) buckets_.erase(it);
    }
  }

  int k_;
  Graph graph_;
  std::optional<ExpStartClustering> clustering_;
  std::unordered_map<std::uint64_t, Bucket> buckets_;
  EdgeUnion output_;
  std::uint64_t last_cluster_changes_ = 0;
};

}  // namespace bdsparse
