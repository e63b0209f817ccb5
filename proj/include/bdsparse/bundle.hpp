#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"
#include "bdsparse/spanner.hpp"

namespace bdsparse {

struct MonotoneOptions {
  double beta = 0.25;
  int instances_per_log = 2;  // R = instances_per_log * ceil(log2 n)
};

// Decremental O(log n)-spanner whose output changes O(polylog n) times per
// vertex in total: the union of the cluster forests of R independent
// exponential start-time clusterings, with no inter-cluster edges.
class MonotoneSpanner {
 public:
  using Options = MonotoneOptions;

  MonotoneSpanner(std::size_t n, std::span<const Edge> edges, std::uint64_t seed, Options opt = {})
      : n_(n), opt_(opt), graph_(n, edges) {
    if (!(opt_.beta > 0.0)) throw std::invalid_argument("MonotoneSpanner: beta must be positive");
    const int logn = n >= 2 ? static_cast<int>(std::ceil(std::log2(static_cast<double>(n)))) : 1;
    const int r = std::max(1, opt_.instances_per_log * logn);
    const double cap = std::max(1.0, std::ceil(20.0 / opt_.beta * std::log(static_cast<double>(std::max<std::size_t>(n, 2)))));
    Rng rng(seed);
    const std::vector<Edge> all = graph_.edges();
    std::size_t cut = 0;
    for (int i = 0; i < r; ++i) {
      instances_.emplace_back(n, all, sample_offsets_bounded(n, opt_.beta, cap, rng));
      const auto& inst = instances_.back();
      for (const Edge& e : inst.forest_edges()) output_.add(e);
      for (const Edge& e : all) cut += inst.cluster_of(e.u) != inst.cluster_of(e.v);
    }
    output_.take_delta();
    cut_fraction_ = all.empty() ? 0.0 : static_cast<double>(cut) / (static_cast<double>(all.size()) * r);
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_instances() const noexcept { return instances_.size(); }
  const ExpStartClustering& instance(std::size_t i) const { return instances_.at(i); }
  const Graph& graph() const noexcept { return graph_; }

  // Mean fraction of edges cut by a clustering at initialization.
  double initial_cut_fraction() const noexcept { return cut_fraction_; }

  // Largest ES depth bound across instances.
  int depth() const {
    int d = 0;
    for (const auto& inst : instances_) d = std::max(d, inst.depth());
    return d;
  }

  std::vector<Edge> output() const { return output_.elements(); }
  std::size_t size() const noexcept { return output_.size(); }
  bool contains(const Edge& e) const { return output_.contains(e); }
  std::uint64_t recourse() const noexcept { return recourse_; }

  DeltaEdges<Edge> delete_batch(std::span<const Edge> edges) {
    std::vector<Edge> present;
    for (const Edge& e : edges)
      if (graph_.has_edge(e)) present.push_back(e);
    sort_unique(present);
    for (const Edge& e : present) graph_.erase(e);
    for (auto& inst : instances_) {
      const auto up = inst.delete_batch(present);
      for (const Edge& e : up.forest_removed) output_.remove(e);
      for (const Edge& e : up.forest_added) output_.add(e);
    }
    auto d = output_.take_delta();
    recourse_ += d.size();
    return d;
  }

 private:
  std::size_t n_;
  Options opt_;
  Graph graph_;
  std::vector<ExpStartClustering> instances_;
  EdgeUnion output_;
  double cut_fraction_ = 0.0;
  std::uint64_t recourse_ = 0;
};

// Decremental t-bundle: H_i = spanner(D_i) + J_i where D_i runs on
// G minus (H_1 + ... + H_{i-1}) and the journal J_i keeps every edge D_i once
// output, until the edge leaves D_i's graph.
class BundleChain {
 public:
  struct Level {
    Graph graph;
    std::unique_ptr<MonotoneSpanner> spanner;
    EdgeSet journal;
    EdgeSet h;
  };

  BundleChain(std::size_t n, std::span<const Edge> edges, std::size_t t, std::uint64_t seed,
              MonotoneOptions opt = {})
      : n_(n), t_(t), graph_(n, edges) {
    if (t == 0) throw std::invalid_argument("BundleChain: t must be at least 1");
    std::vector<Edge> residual = graph_.edges();
    while (!residual.empty() && levels_.size() < t_) {
      Level lv{Graph(n, residual), nullptr, {}, {}};
      lv.spanner = std::make_unique<MonotoneSpanner>(n, residual, derive_seed(seed, levels_.size()), opt);
      for (const Edge& e : lv.spanner->output()) {
        lv.h.insert(e);
        bundle_.add(e);
      }
      std::erase_if(residual, [&](const Edge& e) { return lv.h.count(e) != 0; });
      levels_.push_back(std::move(lv));
    }
    bundle_.take_delta();
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t t() const noexcept { return t_; }
  std::size_t num_levels() const noexcept { return levels_.size(); }
  const Level& level(std::size_t i) const { return levels_.at(i); }
  const Graph& graph() const noexcept { return graph_; }
  std::vector<Edge> output() const { return bundle_.elements(); }
  std::size_t size() const noexcept { return bundle_.size(); }
  bool contains(const Edge& e) const { return bundle_.contains(e); }
  std::uint64_t recourse() const noexcept { return recourse_; }

  const EdgeSet& journal(std::size_t i) const { return levels_.at(i).journal; }

  DeltaEdges<Edge> delete_batch(std::span<const Edge> edges) {
    std::vector<Edge> raw;
    for (const Edge& e : edges)
      if (graph_.has_edge(e)) raw.push_back(e);
    sort_unique(raw);
    for (const Edge& e : raw) graph_.erase(e);

    std::vector<Edge> dels = raw;
    for (Level& lv : levels_) {
      std::vector<Edge> local;
      for (const Edge& e : dels)
        if (lv.graph.has_edge(e)) local.push_back(e);
      if (local.empty()) continue;
      for (const Edge& e : local) lv.graph.erase(e);
      const DeltaEdges<Edge> d = lv.spanner->delete_batch(local);
      for (const Edge& e : local) {
        lv.journal.erase(e);
        if (lv.h.erase(e)) bundle_.remove(e);
      }
      for (const Edge& e : d.deleted)
        if (lv.graph.has_edge(e)) lv.journal.insert(e);
      std::vector<Edge> promoted;
      for (const Edge& e : d.inserted) {
        if (lv.h.insert(e).second) {
          bundle_.add(e);
          promoted.push_back(e);
        }
      }
      dels.insert(dels.end(), promoted.begin(), promoted.end());
      sort_unique(dels);
    }
    auto out = bundle_.take_delta();
    recourse_ += out.size();
    return out;
  }

 private:
  std::size_t n_;
  std::size_t t_;
  Graph graph_;
  std::vector<Level> levels_;
  EdgeUnion bundle_;
  std::uint64_t recourse_ = 0;
};

}  // namespace bdsparse
