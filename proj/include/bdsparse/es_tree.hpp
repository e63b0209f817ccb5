#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdsparse/graph.hpp"
#include "bdsparse/ordered_list.hpp"

namespace bdsparse {

// Directed edge tail -> head.
struct Arc {
  VertexId tail = 0;
  VertexId head = 0;

  friend constexpr auto operator<=>(const Arc&, const Arc&) = default;
  constexpr std::uint64_t key() const noexcept {
    return (static_cast<std::uint64_t>(tail) << 32) | head;
  }
};

// Dist(v) = hop distance from s when it is at most depth, depth + 1 otherwise.
inline std::vector<int> bounded_bfs(std::size_t n, std::span<const Arc> arcs, VertexId source,
                                    int depth) {
  if (source >= n) throw std::out_of_range("bounded_bfs: source out of range");
  std::vector<std::vector<VertexId>> out(n);
  for (const Arc& a : arcs) out[a.tail].push_back(a.head);
  std::vector<int> dist(n, depth + 1);
  dist[source] = 0;
  std::vector<VertexId> frontier{source};
  for (int d = 0; d < depth && !frontier.empty(); ++d) {
    std::vector<VertexId> next;
    for (VertexId v : frontier) {
      for (VertexId w : out[v]) {
        if (dist[w] > d + 1) {
          dist[w] = d + 1;
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
  }
  return dist;
}

// Bounded-depth decremental shortest-path tree over a directed graph.
//
// Each In(v) is an OrderedList of arc ids in decreasing priority order, and
// the parent of v (the Scan pointer) is the first live arc of In(v) whose tail
// sits at distance Dist(v) - 1. Deleted arcs stay in the lists as tombstones.
class EsTree {
 public:
  using ArcId = std::uint32_t;
  using Priority = std::uint64_t;
  static constexpr ArcId kNoArc = ~ArcId{0};

  struct DistChange {
    VertexId v;
    int old_dist;
    int new_dist;
  };
  struct ParentChange {
    VertexId v;
    ArcId old_arc;
    ArcId new_arc;
  };
  struct ChangeReport {
    std::vector<DistChange> dist_changes;
    std::vector<ParentChange> parent_changes;
    std::size_t removed_arcs = 0;
    std::size_t removed_tree_arcs = 0;

    bool empty() const noexcept { return dist_changes.empty() && parent_changes.empty(); }
  };

  // priorities[i] is the priority of arcs[i] inside In(arcs[i].head); when
  // empty, tail + 1 is used. Priorities must be distinct within each In(v).
  EsTree(std::size_t n, VertexId source, int depth, std::vector<Arc> arcs,
         std::vector<Priority> priorities = {})
      : n_(n), source_(source), depth_(depth), arcs_(std::move(arcs)) {
    if (source >= n) throw std::out_of_range("EsTree: source out of range");
    if (depth < 0) throw std::invalid_argument("EsTree: negative depth");
    if (!priorities.empty() && priorities.size() != arcs_.size())
      throw std::invalid_argument("EsTree: priority count does not match arc count");
    alive_.assign(arcs_.size(), 1);
    priority_.resize(arcs_.size());
    out_.resize(n);
    std::vector<std::vector<std::pair<ArcId, Priority>>> in_items(n);
    index_.reserve(arcs_.size());
    for (ArcId id = 0; id < arcs_.size(); ++id) {
      const Arc& a = arcs_[id];
      if (a.tail >= n || a.head >= n) throw std::out_of_range("EsTree: arc endpoint out of range");
      if (a.tail == a.head) throw std::invalid_argument("EsTree: self-loop arc");
      if (!index_.emplace(a.key(), id).second) throw std::invalid_argument("EsTree: duplicate arc");
      priority_[id] = priorities.empty() ? Priority{a.tail} + 1 : priorities[id];
      out_[a.tail].push_back(id);
      in_items[a.head].emplace_back(id, priority_[id]);
    }
    in_.resize(n);
    initial_in_degree_.resize(n);
    for (VertexId v = 0; v < n; ++v) {
      initial_in_degree_[v] = in_items[v].size();
      in_[v].initialize(std::move(in_items[v]));
    }
    dist_ = bounded_bfs(n, arcs_, source, depth);
    parent_.assign(n, kNoArc);
    scan_moves_.assign(n, 0);
    for (VertexId v = 0; v < n; ++v) {
      if (dist_[v] >= 1 && dist_[v] <= depth_) {
        const std::size_t q = scan_from(v, 1);
        parent_[v] = in_[v].query(q);
      }
    }
  }

  std::size_t num_vertices() const noexcept { return n_; }
  VertexId source() const noexcept { return source_; }
  int depth() const noexcept { return depth_; }
  int dist(VertexId v) const { return dist_.at(v); }
  const std::vector<int>& distances() const noexcept { return dist_; }

  ArcId parent_arc(VertexId v) const { return parent_.at(v); }
  std::optional<VertexId> parent(VertexId v) const {
    const ArcId a = parent_.at(v);
    if (a == kNoArc) return std::nullopt;
    return arcs_[a].tail;
  }

  const Arc& arc(ArcId id) const { return arcs_.at(id); }
  bool alive(ArcId id) const { return alive_.at(id) != 0; }
  Priority priority(ArcId id) const { return priority_.at(id); }
  std::size_t num_arcs() const noexcept { return arcs_.size(); }

  std::optional<ArcId> find_arc(VertexId tail, VertexId head) const {
    auto it = index_.find(Arc{tail, head}.key());
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<ArcId>& out_arcs(VertexId v) const { return out_.at(v); }
  const OrderedList<ArcId>& in_list(VertexId v) const { return in_.at(v); }

  // Forward scan distance accumulated by v's pointer (amortization audit).
  std::uint64_t scan_moves(VertexId v) const { return scan_moves_.at(v); }
  std::size_t initial_in_degree(VertexId v) const { return initial_in_degree_.at(v); }

  // Deletes a batch of arcs. Arcs not present (or already deleted) are ignored.
  ChangeReport delete_batch(std::span<const Arc> batch) {
    ChangeReport report;
    std::vector<std::vector<VertexId>> bucket(static_cast<std::size_t>(depth_) + 2);
    std::unordered_map<VertexId, int> old_dist;
    std::unordered_map<VertexId, ArcId> old_parent;
    std::vector<char> queued(n_, 0);

    for (const Arc& a : batch) {
      const auto id = find_arc(a.tail, a.head);
      if (!id || !alive_[*id]) continue;
      alive_[*id] = 0;
      ++report.removed_arcs;
      const VertexId v = a.head;
      if (parent_[v] == *id) {
        ++report.removed_tree_arcs;
        old_parent.try_emplace(v, parent_[v]);
        if (!queued[v]) {
          queued[v] = 1;
          bucket[dist_[v]].push_back(v);
        }
      }
    }

    for (int i = 1; i <= depth_; ++i) {
      std::vector<VertexId> current;
      current.swap(bucket[i]);
      for (VertexId v : current) queued[v] = 0;
      for (VertexId v : current) {
        if (dist_[v] != i) continue;
        const ArcId prev = parent_[v];
        const std::size_t start =
            prev == kNoArc ? 1 : in_[v].find(priority_[prev]).count_at_least;
        const std::size_t q = scan_from(v, start);
        if (q <= in_[v].size()) {
          parent_[v] = in_[v].query(q);
          continue;
        }
        // No parent at distance i - 1: v and its tree children move down.
        old_dist.try_emplace(v, dist_[v]);
        old_parent.try_emplace(v, prev);
        parent_[v] = kNoArc;
        dist_[v] = i + 1;
        if (i + 1 <= depth_) {
          if (!queued[v]) {
            queued[v] = 1;
            bucket[i + 1].push_back(v);
          }
          for (ArcId out : out_[v]) {
            if (!alive_[out]) continue;
            const VertexId w = arcs_[out].head;
            if (parent_[w] == out && !queued[w]) {
              old_parent.try_emplace(w, out);
              queued[w] = 1;
              bucket[i + 1].push_back(w);
            }
          }
        }
      }
    }

    for (const auto& [v, d] : old_dist) {
      if (dist_[v] != d) report.dist_changes.push_back({v, d, dist_[v]});
    }
    for (const auto& [v, a] : old_parent) {
      if (parent_[v] != a) report.parent_changes.push_back({v, a, parent_[v]});
    }
    std::sort(report.dist_changes.begin(), report.dist_changes.end(),
              [](const DistChange& x, const DistChange& y) { return x.v < y.v; });
    std::sort(report.parent_changes.begin(), report.parent_changes.end(),
              [](const ParentChange& x, const ParentChange& y) { return x.v < y.v; });
    return report;
  }

  // Changes the priority of an arc inside In(head). Does not touch parents;
  // callers follow up with reselect_parent where it matters.
  void set_priority(ArcId id, Priority p) {
    const Arc& a = arcs_.at(id);
    if (priority_[id] == p) return;
    const std::size_t rank = in_[a.head].find(priority_[id]).count_at_least;
    in_[a.head].update_priority(rank, p);
    priority_[id] = p;
  }

  // Recomputes the parent of v by scanning In(v) from the front. Returns true
  // when the parent changed.
  bool reselect_parent(VertexId v) {
    if (dist_[v] < 1 || dist_[v] > depth_) return false;
    const std::size_t q = in_[v].next_with(1, [&](ArcId id) { return is_candidate(id, dist_[v]); });
    if (q > in_[v].size()) throw std::logic_error("EsTree: vertex lost every parent candidate");
    const ArcId chosen = in_[v].query(q);
    if (chosen == parent_[v]) return false;
    parent_[v] = chosen;
    return true;
  }

  // First candidate of In(v) under the current priorities, by linear scan.
  // Used by audits.
  ArcId first_candidate(VertexId v) const {
    if (dist_[v] < 1 || dist_[v] > depth_) return kNoArc;
    for (std::size_t r = 1; r <= in_[v].size(); ++r) {
      const ArcId id = in_[v].query(r);
      if (is_candidate(id, dist_[v])) return id;
    }
    return kNoArc;
  }

 private:
  bool is_candidate(ArcId id, int d) const {
    return alive_[id] && dist_[arcs_[id].tail] == d - 1;
  }

  std::size_t scan_from(VertexId v, std::size_t start) {
    const int d = dist_[v];
    const std::size_t q = in_[v].next_with(start, [&](ArcId id) { return is_candidate(id, d); });
    scan_moves_[v] += q - start;
    return q;
  }

  std::size_t n_;
  VertexId source_;
  int depth_;
  std::vector<Arc> arcs_;
  std::vector<char> alive_;
  std::vector<Priority> priority_;
  std::unordered_map<std::uint64_t, ArcId> index_;
  std::vector<std::vector<ArcId>> out_;
  std::vector<OrderedList<ArcId>> in_;
  std::vector<std::size_t> initial_in_degree_;
  std::vector<int> dist_;
  std::vector<ArcId> parent_;
  std::vector<std::uint64_t> scan_moves_;
};

}  // namespace bdsparse
