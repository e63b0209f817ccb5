#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bdsparse/bundle.hpp"
#include "bdsparse/contraction.hpp"
#include "bdsparse/dynamic_wrapper.hpp"
#include "bdsparse/es_tree.hpp"
#include "bdsparse/graph.hpp"
#include "bdsparse/oracle.hpp"
#include "bdsparse/sparsifier.hpp"
#include "bdsparse/spanner.hpp"
#include "bdsparse/trace.hpp"

namespace bdsparse {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSeedEnv = "BDSPARSE_SEED";

// Default seed: $BDSPARSE_SEED when set and numeric, otherwise 1.
inline std::uint64_t default_seed() {
  if (const char* s = std::getenv(kSeedEnv)) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0') return v;
  }
  return 1;
}

struct RunConfig {
  std::string structure = "spanner";  // estree | spanner | sparse | bundle | sparsifier
  int k = 2;
  std::size_t t = 0;          // bundle levels; 0 means 2 for bundle, the formula for sparsifier
  double eps = 0.5;
  double c_t = 1.0;
  std::uint64_t seed = 1;
  std::size_t verify_every = 1;  // 0 disables checks
  std::uint64_t rebuild_every = 0;
  int depth = 16;             // estree only
  std::size_t capacity = 0;   // wrapper class-0 capacity; 0 means the structure default
  bool timing = false;        // adds wall-time fields to the stats
  std::size_t cut_samples = 20000;  // sampled cuts when n is too large for enumeration
};

inline bool is_decremental(const std::string& structure) {
  return structure == "estree" || structure == "bundle";
}

struct CheckResult {
  bool ok = true;
  std::string failure;  // fatal oracle violation
  Json report = Json::object();
};

// One maintained structure behind a uniform replay interface.
class Driver {
 public:
  virtual ~Driver() = default;
  // Applies a filtered batch; returns the size of the output delta.
  virtual std::pair<std::size_t, std::size_t> apply(const UpdateBatch& b) = 0;
  virtual std::size_t size() const = 0;
  virtual CheckResult verify() = 0;
  virtual Json work() const = 0;
  virtual std::vector<WeightedEdge> structure() const = 0;
};

namespace detail {

inline std::vector<WeightedEdge> unit(const std::vector<Edge>& es) { return oracle::unit_weights(es); }

inline Json stretch_json(const oracle::StretchReport& r, std::uint64_t bound) {
  Json j;
  j["bound"] = bound;
  j["worst"] = r.worst;
  j["checked"] = r.checked;
  j["ok"] = r.ok;
  return j;
}

inline std::string edge_str(const Edge& e) {
  return "(" + std::to_string(e.u) + "," + std::to_string(e.v) + ")";
}

template <class W>
void check_wrapper(const W& w, CheckResult& r) {
  try {
    w.check_invariants();
  } catch (const std::logic_error& ex) {
    r.ok = false;
    r.failure = std::string("wrapper invariant: ") + ex.what();
  }
  Json j;
  j["classes"] = w.num_classes();
  j["phi"] = w.phi();
  j["index_violations"] = w.stats().index_violations;
  r.report["wrapper"] = j;
}

class EsTreeDriver : public Driver {
 public:
  EsTreeDriver(std::size_t n, const std::vector<Edge>& init, const RunConfig& c) : g_(n, init) {
    std::vector<Arc> arcs;
    for (const Edge& e : init) {
      arcs.push_back({e.u, e.v});
      arcs.push_back({e.v, e.u});
    }
    tree_ = std::make_unique<EsTree>(n, 0, c.depth, std::move(arcs));
  }
  std::pair<std::size_t, std::size_t> apply(const UpdateBatch& b) override {
    if (!b.inserts.empty()) throw std::invalid_argument("estree: insertions are not supported");
    std::vector<Arc> arcs;
    for (const Edge& e : b.deletes) {
      g_.erase(e);
      arcs.push_back({e.u, e.v});
      arcs.push_back({e.v, e.u});
    }
    const auto rep = tree_->delete_batch(arcs);
    dist_changes_ += rep.dist_changes.size();
    return {rep.parent_changes.size(), rep.removed_tree_arcs};
  }
  std::size_t size() const override {
    std::size_t s = 0;
    for (int d : tree_->distances()) s += d <= tree_->depth();
    return s;
  }
  CheckResult verify() override {
    CheckResult r;
    std::vector<Arc> arcs;
    for (const Edge& e : g_.edges()) {
      arcs.push_back({e.u, e.v});
      arcs.push_back({e.v, e.u});
    }
    const auto dist = bounded_bfs(g_.num_vertices(), arcs, tree_->source(), tree_->depth());
    std::size_t mismatches = 0;
    for (VertexId v = 0; v < dist.size(); ++v) mismatches += dist[v] != tree_->dist(v);
    if (mismatches) {
      r.ok = false;
      r.failure = std::to_string(mismatches) + " Dist values differ from bounded BFS";
    } else if (auto err = oracle::check_es_tree(*tree_)) {
      r.ok = false;
      r.failure = *err;
    }
    r.report["dist_mismatches"] = mismatches;
    return r;
  }
  Json work() const override {
    std::uint64_t moves = 0;
    for (VertexId v = 0; v < g_.num_vertices(); ++v) moves += tree_->scan_moves(v);
    Json j;
    j["scan_moves"] = moves;
    j["dist_changes"] = dist_changes_;
    return j;
  }
  std::vector<WeightedEdge> structure() const override {
    std::vector<WeightedEdge> out;
    for (VertexId v = 0; v < g_.num_vertices(); ++v)
      if (auto p = tree_->parent(v)) out.push_back({canonicalize(*p, v), 1});
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  Graph g_;
  std::unique_ptr<EsTree> tree_;
  std::uint64_t dist_changes_ = 0;
};

class SpannerDriver : public Driver {
 public:
  using W = DynamicWrapper<DecrementalSpanner>;

  SpannerDriver(std::size_t n, const std::vector<Edge>& init, const RunConfig& c)
      : g_(n, init), k_(c.k) {
    if (c.k < 1) throw std::invalid_argument("spanner: k must be at least 1");
    std::size_t cap = c.capacity;
    if (cap == 0)
      cap = static_cast<std::size_t>(std::ceil(
          std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), 1.0 + 1.0 / c.k)));
    const int k = c.k;
    w_ = std::make_unique<W>(
        n, init,
        [k](std::size_t nn, std::vector<Edge> es, std::uint64_t s) {
          return std::make_unique<DecrementalSpanner>(nn, es, k, s);
        },
        W::Options{cap, c.rebuild_every, c.seed});
  }
  std::pair<std::size_t, std::size_t> apply(const UpdateBatch& b) override {
    g_.apply_batch(b);
    const auto d = w_->update(b);
    return {d.inserted.size(), d.deleted.size()};
  }
  std::size_t size() const override { return w_->output().size(); }
  CheckResult verify() override {
    CheckResult r;
    const std::uint64_t s = 2 * static_cast<std::uint64_t>(k_) - 1;
    const auto h = w_->output();
    const auto st = oracle::check_stretch(g_, h, s);
    r.report["stretch"] = stretch_json(st, s);
    if (!st.ok) {
      r.ok = false;
      r.failure = "stretch exceeds " + std::to_string(s) + " on edge " + edge_str(*st.witness);
    }
    std::size_t cluster_mismatches = 0;
    for (std::size_t i = 1; i < w_->num_classes(); ++i) {
      const DecrementalSpanner* inst = w_->instance(i);
      if (!inst) continue;
      const auto expect = oracle::brute_cluster(inst->num_vertices(), inst->graph().edges(),
                                                inst->clustering().offsets());
      for (VertexId v = 0; v < expect.size(); ++v) cluster_mismatches += expect[v] != inst->cluster_of(v);
    }
    r.report["cluster_mismatches"] = cluster_mismatches;
    if (cluster_mismatches && r.ok) {
      r.ok = false;
      r.failure = std::to_string(cluster_mismatches) + " cluster assignments differ from brute force";
    }
    check_wrapper(*w_, r);
    return r;
  }
  Json work() const override {
    Json j;
    j["instances_built"] = w_->stats().instances_built;
    j["rebuilds"] = w_->stats().rebuilds;
    j["max_phi"] = w_->stats().max_phi;
    j["max_participation"] = w_->stats().max_participation;
    std::uint64_t scans = 0;
    for (std::size_t i = 1; i < w_->num_classes(); ++i)
      if (const auto* inst = w_->instance(i))
        for (VertexId v = 0; v < inst->clustering().tree().num_vertices(); ++v)
          scans += inst->clustering().tree().scan_moves(v);
    j["scan_moves_live"] = scans;
    return j;
  }
  std::vector<WeightedEdge> structure() const override { return unit(w_->output()); }

 private:
  Graph g_;
  int k_;
  std::unique_ptr<W> w_;
};

class SparseDriver : public Driver {
 public:
  SparseDriver(std::size_t n, const std::vector<Edge>& init, const RunConfig& c) {
    SparseSpannerOptions opt;
    opt.base_capacity = c.capacity;
    opt.rebuild_every = c.rebuild_every;
    s_ = std::make_unique<SparseSpanner>(n, init, c.seed, opt);
  }
  std::pair<std::size_t, std::size_t> apply(const UpdateBatch& b) override {
    const auto d = s_->update(b);
    return {d.inserted.size(), d.deleted.size()};
  }
  std::size_t size() const override { return s_->size(); }
  CheckResult verify() override {
    CheckResult r;
    const std::uint64_t bound = s_->stretch_bound();
    const auto st = oracle::check_stretch(s_->graph(), s_->output(), bound);
    r.report["stretch"] = stretch_json(st, bound);
    if (!st.ok) {
      r.ok = false;
      r.failure = "stretch exceeds " + std::to_string(bound) + " on edge " + edge_str(*st.witness);
    }
    for (std::size_t i = 0; i < s_->num_layers() && r.ok; ++i) {
      if (auto err = oracle::check_contraction_layer(s_->layer(i))) {
        r.ok = false;
        r.failure = "layer " + std::to_string(i) + ": " + *err;
      }
    }
    if (r.ok) check_wrapper(s_->base(), r);
    r.report["layers"] = s_->num_layers();
    return r;
  }
  Json work() const override {
    Json j;
    j["edges_updated"] = s_->propagation().updated;
    j["edges_forwarded"] = s_->propagation().forwarded;
    std::uint64_t cases = 0, recomputations = 0;
    for (std::size_t i = 0; i < s_->num_layers(); ++i) {
      for (auto c : s_->layer(i).case_counts()) cases += c;
      recomputations += s_->layer(i).head_recomputations();
    }
    j["case_events"] = cases;
    j["head_recomputations"] = recomputations;
    j["base_instances_built"] = s_->base().stats().instances_built;
    return j;
  }
  std::vector<WeightedEdge> structure() const override { return unit(s_->output()); }

 private:
  std::unique_ptr<SparseSpanner> s_;
};

class BundleDriver : public Driver {
 public:
  BundleDriver(std::size_t n, const std::vector<Edge>& init, const RunConfig& c) {
    b_ = std::make_unique<BundleChain>(n, init, c.t ? c.t : 2, c.seed);
  }
  std::pair<std::size_t, std::size_t> apply(const UpdateBatch& b) override {
    if (!b.inserts.empty()) throw std::invalid_argument("bundle: insertions are not supported");
    const auto d = b_->delete_batch(b.deletes);
    return {d.inserted.size(), d.deleted.size()};
  }
  std::size_t size() const override { return b_->size(); }
  CheckResult verify() override {
    CheckResult r;
    Json levels = Json::array();
    EdgeSet union_h;
    for (std::size_t i = 0; i < b_->num_levels(); ++i) {
      const auto& lv = b_->level(i);
      std::uint32_t depth = 0;
      for (std::size_t q = 0; q < lv.spanner->num_instances(); ++q)
        depth = std::max(depth, oracle::forest_depth(lv.spanner->instance(q)));
      const std::uint64_t bound = 2 * static_cast<std::uint64_t>(depth) + 1;
      const auto h = sorted_edges(lv.h);
      const auto st = oracle::check_stretch(lv.graph, h, bound);
      levels.push_back(stretch_json(st, bound));
      if (!st.ok && r.ok) {
        r.ok = false;
        r.failure = "level " + std::to_string(i) + ": stretch exceeds " + std::to_string(bound) +
                    " on edge " + edge_str(*st.witness);
      }
      for (const Edge& e : h) {
        union_h.insert(e);
        if (!lv.graph.has_edge(e) && r.ok) {
          r.ok = false;
          r.failure = "level " + std::to_string(i) + " keeps a deleted edge " + edge_str(e);
        }
      }
    }
    if (r.ok && sorted_edges(union_h) != b_->output()) {
      r.ok = false;
      r.failure = "bundle output differs from the union of its levels";
    }
    r.report["levels"] = levels;
    return r;
  }
  Json work() const override {
    Json j;
    j["recourse"] = b_->recourse();
    j["levels"] = b_->num_levels();
    return j;
  }
  std::vector<WeightedEdge> structure() const override { return unit(b_->output()); }

 private:
  std::unique_ptr<BundleChain> b_;
};

class SparsifierDriver : public Driver {
 public:
  SparsifierDriver(std::size_t n, const std::vector<Edge>& init, const RunConfig& c)
      : g_(n, init), eps_(c.eps), seed_(c.seed), cut_samples_(c.cut_samples) {
    SparsifierParams p;
    p.eps = c.eps;
    p.c_t = c.c_t;
    p.t_override = c.t;
    s_ = std::make_unique<FullyDynamicSparsifier>(n, init, c.seed, p, c.capacity, c.rebuild_every);
  }
  std::pair<std::size_t, std::size_t> apply(const UpdateBatch& b) override {
    g_.apply_batch(b);
    const auto d = s_->update(b);
    return {d.inserted.size(), d.deleted.size()};
  }
  std::size_t size() const override { return s_->output().size(); }
  CheckResult verify() override {
    CheckResult r;
    const auto& w = s_->wrapper();
    std::size_t bad_weights = 0;
    for (std::size_t i = 1; i < w.num_classes(); ++i) {
      const SparsifierChain* chain = w.instance(i);
      if (!chain) continue;
      for (const auto& we : chain->output()) {
        std::optional<std::uint64_t> expect;
        for (std::size_t j = 1; j <= chain->levels() && !expect; ++j)
          if (chain->bundle(j).contains(we.edge)) expect = pow4(j - 1);
        if (!expect && chain->residual(chain->levels()).count(we.edge)) expect = pow4(chain->levels());
        bad_weights += !expect || *expect != we.weight;
      }
    }
    r.report["weight_mismatches"] = bad_weights;
    if (bad_weights) {
      r.ok = false;
      r.failure = std::to_string(bad_weights) + " output weights differ from their level";
    }
    check_wrapper(w, r);
    const auto h = s_->output();
    const auto gw = oracle::unit_weights(g_.edges());
    const std::size_t n = g_.num_vertices();
    const auto cuts = oracle::enumerate_cuts(n, gw, h, eps_, derive_seed(seed_, ++checks_), cut_samples_);
    Json cj;
    cj["ok"] = cuts.ok;
    cj["exhaustive"] = cuts.exhaustive;
    cj["cuts"] = cuts.cuts;
    cj["worst_ratio"] = std::isfinite(cuts.worst_ratio) ? Json(cuts.worst_ratio) : Json(nullptr);
    r.report["cuts"] = cj;
    if (n <= 512) {
      const auto q = oracle::quadratic_form_check(oracle::laplacian(n, gw), oracle::laplacian(n, h),
                                                  eps_, 100, derive_seed(seed_, ~checks_));
      Json qj;
      qj["ok"] = q.ok;
      qj["trials"] = q.trials;
      qj["worst_ratio"] = std::isfinite(q.worst_ratio) ? Json(q.worst_ratio) : Json(nullptr);
      r.report["quadratic_form"] = qj;
    }
    return r;
  }
  Json work() const override {
    const auto& w = s_->wrapper();
    Json j;
    j["instances_built"] = w.stats().instances_built;
    j["rebuilds"] = w.stats().rebuilds;
    j["max_phi"] = w.stats().max_phi;
    std::uint64_t reentries = 0;
    for (std::size_t i = 1; i < w.num_classes(); ++i)
      if (const auto* chain = w.instance(i)) reentries += chain->support_reentries();
    j["support_reentries_live"] = reentries;
    return j;
  }
  std::vector<WeightedEdge> structure() const override { return s_->output(); }

 private:
  Graph g_;
  double eps_;
  std::uint64_t seed_;
  std::size_t cut_samples_;
  std::uint64_t checks_ = 0;
  std::unique_ptr<FullyDynamicSparsifier> s_;
};

}  // namespace detail

inline std::unique_ptr<Driver> make_driver(std::size_t n, const std::vector<Edge>& init,
                                           const RunConfig& c) {
  if (c.structure == "estree") return std::make_unique<detail::EsTreeDriver>(n, init, c);
  if (c.structure == "spanner") return std::make_unique<detail::SpannerDriver>(n, init, c);
  if (c.structure == "sparse") return std::make_unique<detail::SparseDriver>(n, init, c);
  if (c.structure == "bundle") return std::make_unique<detail::BundleDriver>(n, init, c);
  if (c.structure == "sparsifier") return std::make_unique<detail::SparsifierDriver>(n, init, c);
  throw std::invalid_argument("unknown structure '" + c.structure + "'");
}

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 oracle violation
  std::size_t batches = 0;
  std::size_t checks = 0;
  std::optional<std::size_t> failed_batch;
  std::string failure;
  Json summary;
};

inline void write_dump(std::ostream& out, const Graph& g, const std::vector<WeightedEdge>& h,
                       const std::string& structure, std::size_t batch, const Json& report) {
  out << "# structure " << structure << " after batch " << batch << '\n';
  out << "# report " << report.dump() << '\n';
  out << "N " << g.num_vertices() << '\n';
  for (const Edge& e : g.edges()) out << "I " << e.u << ' ' << e.v << '\n';
  out << "B\n";
  write_structure(out, h);
}

// Replays a trace. Writes one JSON record per batch and a summary record to
// `stats`; on an oracle violation writes a dump to `dump` (when given) and
// stops with exit code 2. Batch 0 is the initial graph.
inline RunResult run_trace(const Trace& trace, const RunConfig& c, std::ostream& stats,
                           std::ostream* dump = nullptr) {
  using Clock = std::chrono::steady_clock;
  if (is_decremental(c.structure) && trace.has_inserts())
    throw std::invalid_argument(c.structure + " is decremental but the trace inserts edges");
  RunResult res;
  const auto t0 = Clock::now();
  Graph g(trace.n, trace.initial);
  auto driver = make_driver(trace.n, trace.initial, c);
  const std::size_t initial_size = driver->size();
  std::uint64_t recourse = 0;
  std::size_t cut_failures = 0, quad_failures = 0;

  auto check = [&](std::size_t batch, Json& rec) {
    const bool due = c.verify_every != 0 && batch % c.verify_every == 0;
    rec["verified"] = due;
    if (!due) return true;
    ++res.checks;
    CheckResult cr = driver->verify();
    if (cr.report.contains("cuts") && !cr.report["cuts"]["ok"].get<bool>()) ++cut_failures;
    if (cr.report.contains("quadratic_form") && !cr.report["quadratic_form"]["ok"].get<bool>()) ++quad_failures;
    rec["check"] = cr.report;
    rec["ok"] = cr.ok;
    if (cr.ok) return true;
    res.exit_code = 2;
    res.failed_batch = batch;
    res.failure = cr.failure;
    rec["failure"] = cr.failure;
    if (dump) write_dump(*dump, g, driver->structure(), c.structure, batch, cr.report);
    return false;
  };

  {
    Json rec;
    rec["type"] = "init";
    rec["batch"] = 0;
    rec["n"] = trace.n;
    rec["edges"] = g.num_edges();
    rec["size"] = initial_size;
    const bool ok = check(0, rec);
    if (c.timing) rec["wall_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    stats << rec.dump() << '\n';
    if (!ok) return res;
  }

  for (std::size_t i = 0; i < trace.batches.size(); ++i) {
    const auto tb = Clock::now();
    const UpdateBatch b = g.apply_batch(trace.batches[i]);
    const auto [ins, del] = driver->apply(b);
    recourse += ins + del;
    ++res.batches;
    Json rec;
    rec["type"] = "batch";
    rec["batch"] = i + 1;
    rec["inserts"] = b.inserts.size();
    rec["deletes"] = b.deletes.size();
    rec["delta_inserted"] = ins;
    rec["delta_deleted"] = del;
    rec["recourse"] = recourse;
    rec["edges"] = g.num_edges();
    rec["size"] = driver->size();
    const bool ok = check(i + 1, rec);
    rec["work"] = driver->work();
    if (c.timing) rec["wall_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - tb).count();
    stats << rec.dump() << '\n';
    if (!ok) break;
  }

  Json s;
  s["type"] = "summary";
  s["structure"] = c.structure;
  s["seed"] = c.seed;
  s["n"] = trace.n;
  s["batches"] = res.batches;
  s["trace_batches"] = trace.batches.size();
  s["edges"] = g.num_edges();
  s["initial_size"] = initial_size;
  s["final_size"] = driver->size();
  s["recourse"] = recourse;
  s["checks"] = res.checks;
  s["ok"] = res.exit_code == 0;
  if (res.failed_batch) s["failed_batch"] = *res.failed_batch;
  if (c.structure == "sparsifier") {
    s["cut_failures"] = cut_failures;
    s["quadratic_form_failures"] = quad_failures;
  }
  s["work"] = driver->work();
  if (c.timing) s["wall_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  stats << s.dump() << '\n';
  res.summary = s;
  return res;
}

// Final-state dump of a full replay without checks, for determinism audits.
inline std::string replay_dump(const Trace& trace, RunConfig c) {
  c.verify_every = 0;
  Graph g(trace.n, trace.initial);
  auto driver = make_driver(trace.n, trace.initial, c);
  std::ostringstream out;
  out << "# initial\n";
  write_structure(out, driver->structure());
  for (std::size_t i = 0; i < trace.batches.size(); ++i) {
    const UpdateBatch b = g.apply_batch(trace.batches[i]);
    const auto [ins, del] = driver->apply(b);
    out << "# batch " << i + 1 << " +" << ins << " -" << del << '\n';
  }
  out << "# final\n";
  write_structure(out, driver->structure());
  return out.str();
}

}  // namespace bdsparse
