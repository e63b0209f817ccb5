#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bdsparse/dynamic_wrapper.hpp"
#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"
#include "bdsparse/spanner.hpp"

namespace bdsparse {

struct Schedule {
  std::vector<double> x;

  std::size_t size() const noexcept { return x.size(); }
  bool empty() const noexcept { return x.empty(); }
  double product() const {
    double p = 1.0;
    for (double v : x) p *= v;
    return p;
  }
};

// Compression factors x_0..x_{L-1}: a prefix of x_0 = 100,
// x_i = 100^(1.5^i - 1.5^(i-1)) truncated so the product reaches log2 n, with
// the last factor scaled down to hit it exactly (dropped if it would fall
// below 2). Empty when log2 n < 4.
inline Schedule build_schedule(std::size_t n) {
  if (n < 2) throw std::invalid_argument("build_schedule: n must be at least 2");
  Schedule s;
  const double target = std::log2(static_cast<double>(n));
  if (target < 4.0) return s;
  const double lll = std::log2(std::log2(target));
  const int max_len = std::max(1, static_cast<int>(std::ceil(3.0 * lll)) + 1);
  double product = 1.0;
  for (int i = 0; i < max_len; ++i) {
    const double xi = i == 0 ? 100.0 : std::pow(100.0, std::pow(1.5, i) - std::pow(1.5, i - 1));
    if (product * xi >= target) {
      const double last = target / product;
      if (last >= 2.0) s.x.push_back(last);
      break;
    }
    s.x.push_back(xi);
    product *= xi;
  }
  return s;
}

inline constexpr int kEmptySampleRetries = 50;

// Samples each vertex with probability 1/x; retries when nothing is sampled
// and finally falls back to {0}.
inline std::vector<char> sample_vertices(std::size_t n, double x, Rng& rng) {
  std::vector<char> s(n, 0);
  if (n == 0) return s;
  for (int attempt = 0; attempt < kEmptySampleRetries; ++attempt) {
    bool any = false;
    for (std::size_t v = 0; v < n; ++v) {
      s[v] = x <= 1.0 ? 1 : rng.bernoulli(1.0 / x);
      any |= s[v] != 0;
    }
    if (any) return s;
  }
  std::fill(s.begin(), s.end(), 0);
  s[0] = 1;
  return s;
}

// One contraction layer maintained under batches of insertions and deletions.
// Vertices of this layer are 0..n-1; sampled vertices are renumbered densely
// to form the next layer. Head(v) = v for sampled v, otherwise the sampled
// neighbor whose edge has the smallest random key, or -1.
class ContractionLayer {
 public:
  static constexpr std::int64_t kNone = -1;

  enum Case : int { D1, D2, D3, D4, I1, I2, I3, I4, I5, kNumCases };

  struct Result {
    std::vector<Edge> next_ins;
    std::vector<Edge> next_del;
  };

  ContractionLayer(std::size_t n, std::span<const Edge> edges, std::vector<char> sampled,
                   std::uint64_t seed)
      : n_(n), sampled_(std::move(sampled)), rng_(seed), adj_(n) {
    if (sampled_.size() != n) throw std::invalid_argument("ContractionLayer: sample size mismatch");
    next_id_.assign(n, -1);
    for (VertexId v = 0; v < n; ++v)
      if (sampled_[v]) next_id_[v] = static_cast<std::int64_t>(next_n_++);
    head_.assign(n, kNone);
    for (VertexId v = 0; v < n; ++v)
      if (sampled_[v]) head_[v] = v;
    std::vector<Edge> sorted(edges.begin(), edges.end());
    sort_unique(sorted);
    for (const Edge& e : sorted) add_adjacency(e, /*initial=*/true);
    for (VertexId v = 0; v < n; ++v)
      if (!sampled_[v]) head_[v] = scan_head(v);
    for (const Edge& e : sorted) place(e);
    std::vector<Edge> births, deaths;
    settle(births, deaths);
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t next_size() const noexcept { return next_n_; }
  bool sampled(VertexId v) const { return sampled_.at(v) != 0; }
  std::int64_t head(VertexId v) const { return head_.at(v); }
  std::int64_t next_id(VertexId v) const { return next_id_.at(v); }
  std::uint64_t rand_of(const Edge& e) const { return rand_.at(e); }
  std::size_t num_edges() const noexcept { return rand_.size(); }
  bool has_edge(const Edge& e) const { return rand_.count(e) != 0; }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& [e, r] : rand_) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<Edge> h_edges() const { return sorted_edges(h_); }
  // Next-layer edges (E_{i+1}), sorted.
  std::vector<Edge> next_edges() const {
    std::vector<Edge> out;
    for (const auto& [g, members] : groups_) out.push_back(g);
    std::sort(out.begin(), out.end());
    return out;
  }
  // All members of NextLevelEdges as (group, edge) pairs, sorted.
  std::vector<std::pair<Edge, Edge>> next_level_entries() const {
    std::vector<std::pair<Edge, Edge>> out;
    for (const auto& [g, members] : groups_)
      for (const Edge& e : members) out.emplace_back(g, e);
    std::sort(out.begin(), out.end());
    return out;
  }
  const EdgeMap<Edge>& bwd() const noexcept { return bwd_; }
  const EdgeMap<Edge>& fwd() const noexcept { return fwd_; }
  std::vector<Edge> output() const { return output_.elements(); }
  std::size_t output_size() const noexcept { return output_.size(); }
  const std::array<std::uint64_t, kNumCases>& case_counts() const noexcept { return cases_; }
  std::uint64_t head_recomputations() const noexcept { return recomputations_; }

  // Group of e under the current heads, if e is a NextLevelEdges member.
  std::optional<Edge> group_of(const Edge& e) const {
    const std::int64_t hu = head_[e.u], hv = head_[e.v];
    if (hu == kNone || hv == kNone || hu == hv) return std::nullopt;
    return canonicalize(static_cast<VertexId>(next_id_[hu]), static_cast<VertexId>(next_id_[hv]));
  }

  // Applies deletions then insertions; returns the resulting E_{i+1} churn.
  // Inputs must be consistent with this layer's edge set.
  Result update(std::span<const Edge> dels, std::span<const Edge> ins) {
    std::vector<Edge> del(dels.begin(), dels.end()), add(ins.begin(), ins.end());
    sort_unique(del);
    sort_unique(add);
    for (const Edge& e : del)
      if (!has_edge(e)) throw std::invalid_argument("ContractionLayer: deleting absent edge");
    for (const Edge& e : add) {
      if (e.v >= n_) throw std::out_of_range("ContractionLayer: edge endpoint out of range");
      if (has_edge(e)) throw std::invalid_argument("ContractionLayer: inserting present edge");
    }
    touched_.clear();

    std::array<std::vector<Edge>, kNumCases> by_case;
    for (const Edge& e : del) by_case[classify_delete(e)].push_back(e);
    for (const Edge& e : by_case[D1]) {
      unplace(e);
      remove_adjacency(e);
    }
    for (const Edge& e : by_case[D2]) {
      unplace(e);
      remove_adjacency(e);
    }
    for (const Edge& e : by_case[D3]) remove_adjacency(e);
    std::vector<VertexId> recompute;
    for (const Edge& e : by_case[D4]) {
      unplace(e);
      remove_adjacency(e);
      for (VertexId x : {e.u, e.v})
        if (!sampled_[x]) recompute.push_back(x);
    }
    recompute_heads(recompute);

    for (const Edge& e : add) by_case[classify_insert(e)].push_back(e);
    for (const Edge& e : by_case[I1]) {
      add_adjacency(e, false);
      place(e);
    }
    for (int c : {I2, I3}) {
      for (const Edge& e : by_case[c]) {
        add_adjacency(e, false);
        place(e);
      }
    }
    recompute.clear();
    for (const Edge& e : by_case[I4]) {
      add_adjacency(e, false);
      place(e);
      recompute.push_back(sampled_[e.u] ? e.v : e.u);
    }
    recompute_heads(recompute);
    recompute.clear();
    for (const Edge& e : by_case[I5]) {
      const VertexId x = sampled_[e.u] ? e.v : e.u;
      add_adjacency(e, false);
      place(e);
      if (beats_head(x, e)) recompute.push_back(x);
    }
    recompute_heads(recompute);

    for (int c = 0; c < kNumCases; ++c) cases_[c] += by_case[c].size();
    Result r;
    settle(r.next_ins, r.next_del);
    std::sort(r.next_ins.begin(), r.next_ins.end());
    std::sort(r.next_del.begin(), r.next_del.end());
    return r;
  }

  // Applies the change of the next layer's spanner and returns this layer's
  // accumulated output change (including witness swaps from update()).
  DeltaEdges<Edge> lift(const DeltaEdges<Edge>& deeper) {
    for (const Edge& g : deeper.deleted) {
      auto it = lifted_.find(g);
      if (it == lifted_.end()) continue;
      output_.remove(it->second);
      lifted_.erase(it);
    }
    for (const Edge& g : deeper.inserted) {
      auto it = bwd_.find(g);
      if (it == bwd_.end()) throw std::logic_error("ContractionLayer: lifted edge has no witness");
      if (!lifted_.emplace(g, it->second).second) continue;
      output_.add(it->second);
    }
    return output_.take_delta();
  }

  // Witnesses of the given next-layer edges.
  std::vector<Edge> lift_edges(std::span<const Edge> next) const {
    std::vector<Edge> out;
    for (const Edge& g : next) {
      auto it = bwd_.find(g);
      if (it == bwd_.end()) throw std::logic_error("ContractionLayer: missing correspondence");
      out.push_back(it->second);
    }
    return out;
  }

 private:
  struct AdjKey {
    std::uint8_t unmark;
    std::uint64_t rand;
    VertexId w;
    friend auto operator<=>(const AdjKey&, const AdjKey&) = default;
  };

  struct GroupSnapshot {
    bool existed;
    std::optional<Edge> witness;
  };

  Case classify_delete(const Edge& e) const {
    const std::int64_t hu = head_[e.u], hv = head_[e.v];
    if (hu == kNone || hv == kNone) return D1;
    if (hu != hv) return D2;
    if (hu != e.u && hu != e.v) return D3;
    return D4;
  }

  Case classify_insert(const Edge& e) const {
    const bool su = head_[e.u] == e.u, sv = head_[e.v] == e.v;
    const bool none = head_[e.u] == kNone || head_[e.v] == kNone;
    if (!su && !sv) return none ? I1 : I2;
    if (su && sv) return I3;
    return none ? I4 : I5;
  }

  std::uint64_t draw_rand(const Edge& e, bool initial) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      const std::uint64_t r = rng_.next();
      if (!rand_in_use(e.u, r) && !rand_in_use(e.v, r)) return r;
      if (!initial) throw std::runtime_error("ContractionLayer: random key collision");
    }
    throw std::runtime_error("ContractionLayer: random key collision");
  }

  bool rand_in_use(VertexId v, std::uint64_t r) const {
    for (std::uint8_t um : {std::uint8_t{0}, std::uint8_t{1}}) {
      auto it = adj_[v].lower_bound(AdjKey{um, r, 0});
      if (it != adj_[v].end() && it->unmark == um && it->rand == r) return true;
    }
    return false;
  }

  void add_adjacency(const Edge& e, bool initial) {
    const std::uint64_t r = draw_rand(e, initial);
    rand_.emplace(e, r);
    adj_[e.u].insert(AdjKey{static_cast<std::uint8_t>(sampled_[e.v] ? 0 : 1), r, e.v});
    adj_[e.v].insert(AdjKey{static_cast<std::uint8_t>(sampled_[e.u] ? 0 : 1), r, e.u});
  }

  void remove_adjacency(const Edge& e) {
    const std::uint64_t r = rand_.at(e);
    adj_[e.u].erase(AdjKey{static_cast<std::uint8_t>(sampled_[e.v] ? 0 : 1), r, e.v});
    adj_[e.v].erase(AdjKey{static_cast<std::uint8_t>(sampled_[e.u] ? 0 : 1), r, e.u});
    rand_.erase(e);
  }

  std::int64_t scan_head(VertexId v) const {
    if (sampled_[v]) return v;
    if (adj_[v].empty() || adj_[v].begin()->unmark != 0) return kNone;
    return adj_[v].begin()->w;
  }

  // True when the new edge e at x has a smaller key than x's head edge.
  bool beats_head(VertexId x, const Edge& e) const {
    const Edge he = canonicalize(x, static_cast<VertexId>(head_[x]));
    return rand_.at(e) < rand_.at(he);
  }

  void touch_group(const Edge& g) {
    if (touched_.count(g)) return;
    auto it = groups_.find(g);
    GroupSnapshot snap{it != groups_.end() && !it->second.empty(), std::nullopt};
    if (auto b = bwd_.find(g); b != bwd_.end()) snap.witness = b->second;
    touched_.emplace(g, snap);
  }

  // Puts e in H_i, a NextLevelEdges group, or nowhere, per current heads.
  void place(const Edge& e) {
    const std::int64_t hu = head_[e.u], hv = head_[e.v];
    if (hu == kNone || hv == kNone || (hu == hv && (hu == e.u || hu == e.v))) {
      h_.insert(e);
      output_.add(e);
      return;
    }
    if (hu == hv) return;
    const Edge g = *group_of(e);
    touch_group(g);
    groups_[g].insert(e);
  }

  void unplace(const Edge& e) {
    if (h_.erase(e)) {
      output_.remove(e);
      return;
    }
    if (auto g = group_of(e)) {
      touch_group(*g);
      auto it = groups_.find(*g);
      if (it == groups_.end() || it->second.erase(e) == 0)
        throw std::logic_error("ContractionLayer: NextLevelEdges out of sync");
    }
  }

  void recompute_heads(std::vector<VertexId>& vs) {
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (VertexId v : vs) {
      const std::int64_t h = scan_head(v);
      if (h == head_[v]) continue;
      ++recomputations_;
      std::vector<Edge> incident;
      incident.reserve(adj_[v].size());
      for (const AdjKey& a : adj_[v]) incident.push_back(canonicalize(v, a.w));
      for (const Edge& e : incident) unplace(e);
      head_[v] = h;
      for (const Edge& e : incident) place(e);
    }
  }

  // Resolves witnesses of touched groups and reports group births and deaths.
  void settle(std::vector<Edge>& births, std::vector<Edge>& deaths) {
    std::vector<Edge> keys;
    for (const auto& [g, snap] : touched_) keys.push_back(g);
    std::sort(keys.begin(), keys.end());
    // A witness can move between groups, so every old correspondence is
    // dropped before any new one is recorded.
    std::vector<std::pair<Edge, std::optional<Edge>>> changed;
    for (const Edge& g : keys) {
      const GroupSnapshot& snap = touched_.at(g);
      auto it = groups_.find(g);
      const bool now = it != groups_.end() && !it->second.empty();
      std::optional<Edge> witness;
      if (now) {
        witness = snap.witness && it->second.count(*snap.witness) ? *snap.witness
                                                                  : *it->second.begin();
      } else if (it != groups_.end()) {
        groups_.erase(it);
      }
      if (snap.witness != witness) {
        if (snap.witness) {
          fwd_.erase(*snap.witness);
          bwd_.erase(g);
        }
        changed.emplace_back(g, witness);
      }
      if (!snap.existed && now) births.push_back(g);
      if (snap.existed && !now) deaths.push_back(g);
    }
    for (const auto& [g, witness] : changed) {
      if (witness) {
        bwd_[g] = *witness;
        fwd_[*witness] = g;
      }
      if (auto l = lifted_.find(g); l != lifted_.end()) {
        output_.remove(l->second);
        if (witness) {
          l->second = *witness;
          output_.add(*witness);
        } else {
          lifted_.erase(l);
        }
      }
    }
    touched_.clear();
  }

  std::size_t n_;
  std::vector<char> sampled_;
  Rng rng_;
  std::vector<std::int64_t> next_id_;
  std::size_t next_n_ = 0;
  std::vector<std::int64_t> head_;
  std::vector<std::set<AdjKey>> adj_;
  EdgeMap<std::uint64_t> rand_;
  EdgeSet h_;
  EdgeMap<std::set<Edge>> groups_;
  EdgeMap<Edge> bwd_;
  EdgeMap<Edge> fwd_;
  EdgeMap<Edge> lifted_;
  EdgeUnion output_;
  EdgeMap<GroupSnapshot> touched_;
  std::array<std::uint64_t, kNumCases> cases_{};
  std::uint64_t recomputations_ = 0;
};

// Static contraction: the next-layer graph G', the kept edges H and the head
// map f, with witnesses for every edge of G'.
struct ContractionResult {
  Graph g_prime;
  std::vector<Edge> h;
  std::vector<std::int64_t> head;     // f in this graph's vertex ids, -1 for none
  std::vector<std::int64_t> next_id;  // index in V' for sampled vertices, else -1
  EdgeMap<Edge> witness;              // edge of G' -> corresponding edge of G
};

inline ContractionResult contract_static(const Graph& g, double x, Rng& rng) {
  const std::size_t n = g.num_vertices();
  std::vector<char> sampled = sample_vertices(n, x, rng);
  const std::vector<Edge> edges = g.edges();
  ContractionLayer layer(n, edges, sampled, rng.fork());
  ContractionResult r;
  r.g_prime = Graph(layer.next_size());
  for (const Edge& e : layer.next_edges()) r.g_prime.insert(e);
  r.h = layer.h_edges();
  r.head.resize(n);
  r.next_id.resize(n);
  for (VertexId v = 0; v < n; ++v) {
    r.head[v] = layer.head(v);
    r.next_id[v] = layer.next_id(v);
  }
  for (const auto& [gp, e] : layer.bwd()) r.witness.emplace(gp, e);
  return r;
}

// H together with the witnesses of every edge of the spanner h_prime of G'.
inline std::vector<Edge> lift_spanner(std::span<const Edge> h_prime, const ContractionResult& r) {
  std::vector<Edge> out = r.h;
  for (const Edge& e : h_prime) {
    auto it = r.witness.find(e);
    if (it == r.witness.end()) throw std::logic_error("lift_spanner: edge of H' has no witness");
    out.push_back(it->second);
  }
  sort_unique(out);
  return out;
}

struct SparseSpannerOptions {
  std::optional<Schedule> schedule;  // default: build_schedule(n)
  std::size_t base_capacity = 0;     // default: n_L^(1 + 1/k)
  std::uint64_t rebuild_every = 0;   // forwarded to the base wrapper
  bool sample_all = false;           // test hook: every vertex survives every layer
};

// Fully-dynamic sparse spanner: contraction layers 0..L-1 on top of a
// fully-dynamic (2k-1)-spanner for the last layer's graph.
class SparseSpanner {
 public:
  using Base = DynamicWrapper<DecrementalSpanner>;

  using Options = SparseSpannerOptions;

  struct Propagation {
    std::uint64_t updated = 0;    // edges handed to layers 0..L-1
    std::uint64_t forwarded = 0;  // edges those layers forwarded down
  };

  SparseSpanner(std::size_t n, std::span<const Edge> edges, std::uint64_t seed, Options opt = {})
      : graph_(n, edges), seed_(seed) {
    schedule_ = opt.schedule ? *opt.schedule : (n >= 2 ? build_schedule(n) : Schedule{});
    std::vector<Edge> current = graph_.edges();
    std::size_t cur_n = n;
    for (std::size_t i = 0; i < schedule_.size(); ++i) {
      Rng rng(derive_seed(seed, 2 * i + 1));
      std::vector<char> sampled = sample_vertices(cur_n, opt.sample_all ? 1.0 : schedule_.x[i], rng);
      layers_.push_back(std::make_unique<ContractionLayer>(cur_n, current, std::move(sampled),
                                                           derive_seed(seed, 2 * i + 2)));
      current = layers_.back()->next_edges();
      cur_n = layers_.back()->next_size();
    }
    base_n_ = cur_n;
    base_k_ = std::max(1, static_cast<int>(std::ceil(std::log2(std::max<double>(base_n_, 1.0)))));
    std::size_t cap = opt.base_capacity;
    if (cap == 0) {
      cap = static_cast<std::size_t>(
          std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(base_n_, 1)),
                             1.0 + 1.0 / base_k_)));
    }
    const int k = base_k_;
    base_ = std::make_unique<Base>(
        base_n_, current,
        [k](std::size_t nn, std::vector<Edge> es, std::uint64_t s) {
          return std::make_unique<DecrementalSpanner>(nn, es, k, s);
        },
        Base::Options{cap, opt.rebuild_every, derive_seed(seed, 0)});
    DeltaEdges<Edge> d{base_->output(), {}};
    for (std::size_t i = layers_.size(); i-- > 0;) d = layers_[i]->lift(d);
    for (const Edge& e : d.inserted) output_.insert(e);
  }

  std::size_t num_vertices() const noexcept { return graph_.num_vertices(); }
  const Graph& graph() const noexcept { return graph_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  const ContractionLayer& layer(std::size_t i) const { return *layers_.at(i); }
  const Base& base() const noexcept { return *base_; }
  int base_k() const noexcept { return base_k_; }
  std::size_t base_vertices() const noexcept { return base_n_; }
  const Propagation& propagation() const noexcept { return prop_; }

  // s_L = 2k - 1 for the base, s_i = 3 s_{i+1} + 2 for each layer above it.
  std::uint64_t stretch_bound() const {
    std::uint64_t s = 2 * static_cast<std::uint64_t>(base_k_) - 1;
    for (std::size_t i = 0; i < layers_.size(); ++i) s = 3 * s + 2;
    return s;
  }

  std::vector<Edge> output() const { return sorted_edges(output_); }
  std::size_t size() const noexcept { return output_.size(); }

  DeltaEdges<Edge> update(const UpdateBatch& raw) {
    const UpdateBatch b = graph_.apply_batch(raw);
    std::vector<Edge> dels = b.deletes, ins = b.inserts;
    for (auto& layer : layers_) {
      prop_.updated += dels.size() + ins.size();
      auto r = layer->update(dels, ins);
      prop_.forwarded += r.next_del.size() + r.next_ins.size();
      dels = std::move(r.next_del);
      ins = std::move(r.next_ins);
    }
    DeltaEdges<Edge> d = base_->update(UpdateBatch{ins, dels});
    for (std::size_t i = layers_.size(); i-- > 0;) d = layers_[i]->lift(d);
    for (const Edge& e : d.deleted) output_.erase(e);
    for (const Edge& e : d.inserted) output_.insert(e);
    return d;
  }

 private:
  Graph graph_;
  std::uint64_t seed_;
  Schedule schedule_;
  std::vector<std::unique_ptr<ContractionLayer>> layers_;
  std::unique_ptr<Base> base_;
  std::size_t base_n_ = 0;
  int base_k_ = 1;
  EdgeSet output_;
  Propagation prop_;
};

}  // namespace bdsparse
