#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bdsparse/bundle.hpp"
#include "bdsparse/dynamic_wrapper.hpp"
#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"

namespace bdsparse {

struct WeightedEdge {
  Edge edge;
  std::uint64_t weight = 1;

  friend constexpr auto operator<=>(const WeightedEdge&, const WeightedEdge&) = default;
};

inline std::uint64_t pow4(std::size_t j) {
  if (j >= 32) throw std::overflow_error("pow4: weight does not fit in 64 bits");
  return std::uint64_t{1} << (2 * j);
}

struct SparsifierParams {
  double eps = 0.5;
  double c_t = 1.0;
  std::size_t t_override = 0;        // nonzero replaces the computed bundle size
  std::size_t stop_override = 0;     // nonzero replaces ceil(4 log2 n)
  MonotoneOptions bundle_opt{};
};

// t = ceil(c_t * eps^-2 * log2^3(max(n, 4))).
inline std::size_t bundle_size(std::size_t n, double eps, double c_t) {
  if (!(eps > 0.0)) throw std::invalid_argument("bundle_size: eps must be positive");
  const double l = std::log2(static_cast<double>(std::max<std::size_t>(n, 4)));
  const double t = std::ceil(c_t * l * l * l / (eps * eps));
  return static_cast<std::size_t>(std::max(1.0, std::min(t, 1e15)));
}

inline std::size_t stop_threshold(std::size_t n) {
  return static_cast<std::size_t>(
      std::ceil(4.0 * std::log2(static_cast<double>(std::max<std::size_t>(n, 2)))));
}

struct LightSparsifyResult {
  std::unique_ptr<BundleChain> bundle;
  std::vector<Edge> sampled;  // each edge of g minus the bundle kept with probability 1/4
};

inline LightSparsifyResult light_sparsify_init(std::size_t n, std::span<const Edge> edges,
                                               std::size_t t, Rng& rng,
                                               MonotoneOptions opt = {}) {
  LightSparsifyResult r;
  r.bundle = std::make_unique<BundleChain>(n, edges, t, rng.fork(), opt);
  std::vector<Edge> all(edges.begin(), edges.end());
  sort_unique(all);
  for (const Edge& e : all)
    if (!r.bundle->contains(e) && rng.bernoulli(0.25)) r.sampled.push_back(e);
  return r;
}

// Decremental sparsifier chain: G_0 = G, B_i a t-bundle of G_{i-1}, G_i a
// quarter-sample of G_{i-1} minus B_i, stopping once a residual is small.
// Output: B_j at weight 4^(j-1), the last residual G_k at weight 4^k.
class SparsifierChain {
 public:
  using output_type = WeightedEdge;

  static WeightedEdge as_identity_output(const Edge& e) { return {e, 1}; }

  SparsifierChain(std::size_t n, std::span<const Edge> edges, std::uint64_t seed,
                  SparsifierParams params = {})
      : n_(n), params_(params), rng_(seed) {
    std::vector<Edge> g0(edges.begin(), edges.end());
    sort_unique(g0);
    const std::size_t m = std::max<std::size_t>(g0.size(), 2);
    k_max_ = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m))));
    const double level_eps = params_.eps / (2.0 * static_cast<double>(std::max<std::size_t>(k_max_, 1)));
    t_ = params_.t_override ? params_.t_override : bundle_size(n, level_eps, params_.c_t);
    stop_ = params_.stop_override ? params_.stop_override : stop_threshold(n);
    residual_.push_back(EdgeSet(g0.begin(), g0.end()));
    while (levels() < k_max_ && residual_.back().size() >= stop_) {
      const std::vector<Edge> prev = sorted_edges(residual_.back());
      auto light = light_sparsify_init(n, prev, t_, rng_, params_.bundle_opt);
      bundles_.push_back(std::move(light.bundle));
      residual_.push_back(EdgeSet(light.sampled.begin(), light.sampled.end()));
    }
    for (const Edge& e : g0)
      if (auto w = weight_of(e)) output_.emplace(e, *w);
    for (const auto& [e, w] : output_) ever_.insert(e);
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t levels() const noexcept { return bundles_.size(); }
  std::size_t k_max() const noexcept { return k_max_; }
  std::size_t t() const noexcept { return t_; }
  std::size_t stop() const noexcept { return stop_; }
  const BundleChain& bundle(std::size_t j) const { return *bundles_.at(j - 1); }
  const EdgeSet& residual(std::size_t i) const { return residual_.at(i); }
  std::uint64_t support_reentries() const noexcept { return reentries_; }

  std::vector<WeightedEdge> output() const {
    std::vector<WeightedEdge> out;
    out.reserve(output_.size());
    for (const auto& [e, w] : output_) out.push_back({e, w});
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t size() const noexcept { return output_.size(); }

  // Weight the chain state assigns to e, if e is in the output.
  std::optional<std::uint64_t> weight_of(const Edge& e) const {
    for (std::size_t j = 1; j <= levels(); ++j)
      if (bundles_[j - 1]->contains(e)) return pow4(j - 1);
    if (residual_.back().count(e)) return pow4(levels());
    return std::nullopt;
  }

  DeltaEdges<WeightedEdge> delete_batch(std::span<const Edge> edges) {
    std::vector<Edge> dels;
    for (const Edge& e : edges)
      if (residual_[0].count(e)) dels.push_back(e);
    sort_unique(dels);
    EdgeSet touched(dels.begin(), dels.end());
    for (const Edge& e : dels) residual_[0].erase(e);

    std::size_t cut_at = residual_[0].size() < stop_ ? 0 : levels();
    for (std::size_t i = 1; i <= cut_at; ++i) {
      const auto d = bundles_[i - 1]->delete_batch(dels);
      for (const Edge& e : d.inserted) touched.insert(e);
      for (const Edge& e : d.deleted) touched.insert(e);
      std::vector<Edge> next;
      for (const Edge& e : dels)
        if (residual_[i].count(e)) next.push_back(e);
      for (const Edge& e : d.inserted)
        if (residual_[i].count(e)) next.push_back(e);
      sort_unique(next);
      for (const Edge& e : next) {
        residual_[i].erase(e);
        touched.insert(e);
      }
      dels = std::move(next);
      if (residual_[i].size() < stop_ && i < cut_at) {
        cut_at = i;
        break;
      }
    }
    if (cut_at < levels()) {
      for (std::size_t j = cut_at + 1; j <= levels(); ++j) {
        for (const Edge& e : bundles_[j - 1]->output()) touched.insert(e);
        for (const Edge& e : residual_[j]) touched.insert(e);
      }
      for (const Edge& e : residual_[cut_at]) touched.insert(e);
      bundles_.resize(cut_at);
      residual_.resize(cut_at + 1);
    }

    DeltaEdges<WeightedEdge> delta;
    std::vector<Edge> order(touched.begin(), touched.end());
    std::sort(order.begin(), order.end());
    for (const Edge& e : order) {
      auto it = output_.find(e);
      const bool was_in = it != output_.end();
      const auto now = residual_[0].count(e) ? weight_of(e) : std::nullopt;
      if (was_in && now && it->second == *now) continue;
      if (was_in) {
        delta.deleted.push_back({e, it->second});
        output_.erase(it);
      }
      if (now) {
        delta.inserted.push_back({e, *now});
        output_.emplace(e, *now);
        if (!was_in && !ever_.insert(e).second) ++reentries_;
      }
    }
    return delta;
  }

 private:
  std::size_t n_;
  SparsifierParams params_;
  Rng rng_;
  std::size_t k_max_ = 0;
  std::size_t t_ = 1;
  std::size_t stop_ = 1;
  std::vector<std::unique_ptr<BundleChain>> bundles_;
  std::vector<EdgeSet> residual_;  // residual_[0] = G_0
  EdgeMap<std::uint64_t> output_;
  EdgeSet ever_;
  std::uint64_t reentries_ = 0;
};

// Fully-dynamic sparsifier: sparsifier chains under the logarithmic method with
// capacity base n.
class FullyDynamicSparsifier {
 public:
  using Wrapper = DynamicWrapper<SparsifierChain>;

  FullyDynamicSparsifier(std::size_t n, std::span<const Edge> edges, std::uint64_t seed,
                         SparsifierParams params = {}, std::size_t capacity_base = 0,
                         std::uint64_t rebuild_every = 0)
      : wrapper_(n, edges,
                 [params](std::size_t nn, std::vector<Edge> es, std::uint64_t s) {
                   return std::make_unique<SparsifierChain>(nn, es, s, params);
                 },
                 Wrapper::Options{capacity_base ? capacity_base : std::max<std::size_t>(n, 1),
                                  rebuild_every, seed}) {}

  const Wrapper& wrapper() const noexcept { return wrapper_; }
  std::vector<WeightedEdge> output() const { return wrapper_.output(); }
  DeltaEdges<WeightedEdge> update(const UpdateBatch& b) { return wrapper_.update(b); }
  DeltaEdges<WeightedEdge> insert_batch(std::span<const Edge> es) { return wrapper_.insert_batch(es); }
  DeltaEdges<WeightedEdge> delete_batch(std::span<const Edge> es) { return wrapper_.delete_batch(es); }

 private:
  Wrapper wrapper_;
};

}  // namespace bdsparse
