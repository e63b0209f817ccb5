#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bdsparse/rng.hpp"

namespace bdsparse {

using VertexId = std::uint32_t;

// Undirected edge in canonical form (u < v).
struct Edge {
  VertexId u = 0;
  VertexId v = 0;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;

  constexpr std::uint64_t key() const noexcept {
    return (static_cast<std::uint64_t>(u) << 32) | v;
  }
  constexpr VertexId other(VertexId x) const noexcept { return x == u ? v : u; }
};

inline Edge canonicalize(VertexId a, VertexId b) {
  if (a == b) {
    throw std::invalid_argument("self-loop (" + std::to_string(a) + "," + std::to_string(b) +
                                ") is not a valid edge");
  }
  return a < b ? Edge{a, b} : Edge{b, a};
}

struct EdgeHash {
  std::size_t operator()(const Edge& e) const noexcept {
    return static_cast<std::size_t>(mix64(e.key()));
  }
};

using EdgeSet = std::unordered_set<Edge, EdgeHash>;
template <class T>
using EdgeMap = std::unordered_map<Edge, T, EdgeHash>;

inline std::vector<Edge> sorted_edges(const EdgeSet& s) {
  std::vector<Edge> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  return out;
}

inline void sort_unique(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

struct UpdateBatch {
  std::vector<Edge> inserts;
  std::vector<Edge> deletes;

  bool empty() const noexcept { return inserts.empty() && deletes.empty(); }
  std::size_t size() const noexcept { return inserts.size() + deletes.size(); }
};

// The (inserted, deleted) change set every maintained structure emits per
// batch. T is Edge for spanners and WeightedEdge for sparsifiers.
template <class T>
struct DeltaEdges {
  std::vector<T> inserted;
  std::vector<T> deleted;

  bool empty() const noexcept { return inserted.empty() && deleted.empty(); }
  std::size_t size() const noexcept { return inserted.size() + deleted.size(); }

  void append(const DeltaEdges& other) {
    inserted.insert(inserted.end(), other.inserted.begin(), other.inserted.end());
    deleted.insert(deleted.end(), other.deleted.begin(), other.deleted.end());
  }

  friend bool operator==(const DeltaEdges&, const DeltaEdges&) = default;
};

// Multiset cancellation: each element present in both sides is removed once
// from each. Both sides come back sorted.
template <class T>
DeltaEdges<T> cancel(DeltaEdges<T> d) {
  std::sort(d.inserted.begin(), d.inserted.end());
  std::sort(d.deleted.begin(), d.deleted.end());
  DeltaEdges<T> out;
  std::set_difference(d.inserted.begin(), d.inserted.end(), d.deleted.begin(), d.deleted.end(),
                      std::back_inserter(out.inserted));
  std::set_difference(d.deleted.begin(), d.deleted.end(), d.inserted.begin(), d.inserted.end(),
                      std::back_inserter(out.deleted));
  return out;
}

// Reference-counted union of several edge sets. Records 0 -> 1 transitions
// as insertions and 1 -> 0 transitions as deletions.
template <class T, class Hash = std::hash<T>>
class CountedSet {
 public:
  void add(const T& x) {
    if (++count_[x] == 1) pending_.inserted.push_back(x);
  }

  void remove(const T& x) {
    auto it = count_.find(x);
    if (it == count_.end()) throw std::logic_error("CountedSet: removing absent element");
    if (--it->second == 0) {
      count_.erase(it);
      pending_.deleted.push_back(x);
    }
  }

  bool contains(const T& x) const { return count_.count(x) != 0; }
  std::size_t size() const noexcept { return count_.size(); }

  std::vector<T> elements() const {
    std::vector<T> out;
    out.reserve(count_.size());
    for (const auto& [x, c] : count_) out.push_back(x);
    std::sort(out.begin(), out.end());
    return out;
  }

  DeltaEdges<T> take_delta() {
    DeltaEdges<T> out = cancel(std::move(pending_));
    pending_ = {};
    return out;
  }

 private:
  std::unordered_map<T, std::uint32_t, Hash> count_;
  DeltaEdges<T> pending_;
};

using EdgeUnion = CountedSet<Edge, EdgeHash>;

// Undirected simple graph on a fixed vertex set [0, n).
class Graph {
 public:
  explicit Graph(std::size_t n = 0) : adj_(n) {}

  Graph(std::size_t n, std::span<const Edge> edges) : adj_(n) {
    for (const Edge& e : edges) insert(e);
  }

  std::size_t num_vertices() const noexcept { return adj_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  bool has_edge(const Edge& e) const { return edges_.count(e) != 0; }
  bool has_edge(VertexId a, VertexId b) const { return a != b && has_edge(canonicalize(a, b)); }

  const std::unordered_set<VertexId>& neighbors(VertexId v) const { return adj_.at(v); }
  std::size_t degree(VertexId v) const { return adj_.at(v).size(); }

  const EdgeSet& edge_set() const noexcept { return edges_; }
  std::vector<Edge> edges() const { return sorted_edges(edges_); }

  bool insert(const Edge& e) {
    check_edge(e);
    if (!edges_.insert(e).second) return false;
    adj_[e.u].insert(e.v);
    adj_[e.v].insert(e.u);
    return true;
  }

  bool erase(const Edge& e) {
    check_edge(e);
    if (edges_.erase(e) == 0) return false;
    adj_[e.u].erase(e.v);
    adj_[e.v].erase(e.u);
    return true;
  }

  // Applies a raw batch: duplicate inserts and absent deletes are dropped.
  // Returns the batch that was actually applied, sorted.
  UpdateBatch apply_batch(const UpdateBatch& raw) {
    UpdateBatch b = raw;
    for (const Edge& e : b.inserts) check_edge(e);
    for (const Edge& e : b.deletes) check_edge(e);
    sort_unique(b.inserts);
    sort_unique(b.deletes);
    std::vector<Edge> both;
    std::set_intersection(b.inserts.begin(), b.inserts.end(), b.deletes.begin(), b.deletes.end(),
                          std::back_inserter(both));
    if (!both.empty()) {
      throw std::invalid_argument("batch inserts and deletes edge (" + std::to_string(both[0].u) +
                                  "," + std::to_string(both[0].v) + ") simultaneously");
    }
    UpdateBatch applied;
    for (const Edge& e : b.deletes)
      if (erase(e)) applied.deletes.push_back(e);
    for (const Edge& e : b.inserts)
      if (insert(e)) applied.inserts.push_back(e);
    return applied;
  }

  // Throws if the adjacency and edge views disagree.
  void check_consistency() const {
    std::size_t total = 0;
    for (VertexId v = 0; v < adj_.size(); ++v) {
      for (VertexId w : adj_[v]) {
        if (w == v || !edges_.count(canonicalize(v, w)))
          throw std::logic_error("adjacency entry without matching edge");
      }
      total += adj_[v].size();
    }
    if (total != 2 * edges_.size()) throw std::logic_error("edge count mismatch");
  }

 private:
  void check_edge(const Edge& e) const {
    if (e.u >= e.v) throw std::invalid_argument("edge is not in canonical form");
    if (e.v >= adj_.size()) {
      throw std::out_of_range("vertex id " + std::to_string(e.v) + " out of range for n=" +
                              std::to_string(adj_.size()));
    }
  }

  std::vector<std::unordered_set<VertexId>> adj_;
  EdgeSet edges_;
};

}  // namespace bdsparse
