#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"

namespace bdsparse {

// Decremental structure usable inside DynamicWrapper.
template <class D>
concept DecrementalStructure = requires(D& d, const D& cd, std::span<const Edge> es, Edge e) {
  typename D::output_type;
  { cd.output() } -> std::convertible_to<std::vector<typename D::output_type>>;
  { d.delete_batch(es) } -> std::convertible_to<DeltaEdges<typename D::output_type>>;
  { D::as_identity_output(e) } -> std::convertible_to<typename D::output_type>;
};

// Fully-dynamic structure from a decremental one via the logarithmic method.
// Edges are partitioned into classes E_0..E_b with |E_i| <= 2^(i + l0). Class
// 0 is kept verbatim (its edges are output as they are); every nonempty class
// i >= 1 owns one decremental instance built on exactly its edges.
template <DecrementalStructure D>
class DynamicWrapper {
 public:
  using output_type = typename D::output_type;
  using Delta = DeltaEdges<output_type>;
  using Factory =
      std::function<std::unique_ptr<D>(std::size_t n, std::vector<Edge> edges, std::uint64_t seed)>;

  struct Options {
    std::size_t capacity_base = 1;
    std::uint64_t rebuild_every = 0;  // 0 means n^3
    std::uint64_t seed = 0;
  };

  struct Stats {
    std::uint64_t instances_built = 0;
    std::uint64_t rebuilds = 0;
    std::uint64_t index_violations = 0;
    std::uint64_t max_phi = 0;
    std::uint32_t max_participation = 0;
  };

  DynamicWrapper(std::size_t n, std::span<const Edge> edges, Factory factory, Options opt)
      : n_(n), factory_(std::move(factory)), opt_(opt) {
    if (!factory_) throw std::invalid_argument("DynamicWrapper: missing factory");
    l0_ = 0;
    while ((std::uint64_t{1} << l0_) < std::max<std::size_t>(opt_.capacity_base, 1)) ++l0_;
    if (opt_.rebuild_every == 0) {
      const std::uint64_t nn = std::max<std::uint64_t>(n, 2);
      opt_.rebuild_every = nn * nn * nn;
    }
    std::vector<Edge> init(edges.begin(), edges.end());
    sort_unique(init);
    for (const Edge& e : init)
      if (e.v >= n_ || e.u >= e.v) throw std::invalid_argument("DynamicWrapper: invalid edge");
    Delta scratch;
    build_from(std::move(init), scratch);
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return index_.size(); }
  int l0() const noexcept { return l0_; }
  std::size_t num_classes() const noexcept { return classes_.size(); }
  std::size_t class_size(std::size_t i) const {
    return i < classes_.size() ? classes_[i].edges.size() : 0;
  }
  std::uint64_t capacity(std::size_t i) const { return std::uint64_t{1} << (l0_ + i); }
  const D* instance(std::size_t i) const {
    return i < classes_.size() ? classes_[i].inst.get() : nullptr;
  }
  int index_of(const Edge& e) const {
    auto it = index_.find(e);
    return it == index_.end() ? -1 : it->second;
  }
  bool has_edge(const Edge& e) const { return index_.count(e) != 0; }
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(index_.size());
    for (const auto& [e, i] : index_) out.push_back(e);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::uint64_t phi() const {
    std::uint64_t p = 0;
    for (std::size_t i = 0; i < classes_.size(); ++i)
      if (!classes_[i].edges.empty()) p += std::uint64_t{1} << i;
    return p;
  }

  const Stats& stats() const noexcept { return stats_; }

  std::vector<output_type> output() const {
    std::vector<output_type> out;
    for (std::size_t i = 0; i < classes_.size(); ++i) append_output(i, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  // Throws std::logic_error naming the first broken invariant.
  void check_invariants() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      const auto& c = classes_[i];
      if (c.edges.size() > capacity(i))
        throw std::logic_error("class " + std::to_string(i) + " holds " +
                               std::to_string(c.edges.size()) + " edges, capacity " +
                               std::to_string(capacity(i)));
      if (i >= 1 && (c.inst != nullptr) != !c.edges.empty())
        throw std::logic_error("class " + std::to_string(i) + " instance presence mismatch");
      for (const Edge& e : c.edges) {
        auto it = index_.find(e);
        if (it == index_.end() || it->second != static_cast<int>(i))
          throw std::logic_error("index disagrees with class membership");
      }
      total += c.edges.size();
    }
    if (total != index_.size()) throw std::logic_error("index holds edges outside every class");
    if (stats_.index_violations != 0) throw std::logic_error("index-increase audit failed");
    if (phi() > 4 * (inserted_since_build_ + built_size_ + 1))
      throw std::logic_error("potential exceeds the binary-counter bound");
  }

  Delta insert_batch(std::span<const Edge> raw) {
    std::vector<Edge> u;
    for (const Edge& e : raw) {
      if (e.v >= n_ || e.u >= e.v) throw std::invalid_argument("DynamicWrapper: invalid edge");
      if (!index_.count(e)) u.push_back(e);
    }
    sort_unique(u);
    Delta delta;
    if (u.empty()) return delta;
    inserted_since_build_ += u.size();

    const std::uint64_t base = capacity(0);
    std::vector<std::vector<Edge>> chunks;  // chunks[i] has size 2^(l0 + i) or 0
    std::size_t pos = 0;
    const std::uint64_t units = u.size() / base;
    for (std::size_t i = 0; (units >> i) != 0; ++i) {
      chunks.emplace_back();
      if ((units >> i) & 1) {
        const std::size_t len = static_cast<std::size_t>(capacity(i));
        chunks[i].assign(u.begin() + static_cast<std::ptrdiff_t>(pos),
                         u.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
      }
    }
    std::vector<Edge> rest(u.begin() + static_cast<std::ptrdiff_t>(pos), u.end());

    // Plan on plain edge sets; only dirty classes get new instances.
    std::vector<char> dirty(classes_.size(), 0);
    std::vector<std::vector<Edge>> removed_from(classes_.size());
    std::vector<Edge> class0_added;
    for (std::size_t i = chunks.size(); i-- > 0;) {
      if (chunks[i].empty()) continue;
      merge_into_empty(i, std::move(chunks[i]), dirty, removed_from);
    }
    if (!rest.empty()) {
      if (classes_.empty()) grow(1, dirty, removed_from);
      if (rest.size() + classes_[0].edges.size() <= base) {
        for (const Edge& e : rest) {
          classes_[0].edges.push_back(e);
          index_[e] = 0;
          class0_added.push_back(e);
        }
      } else {
        merge_into_empty(1, std::move(rest), dirty, removed_from, /*include_class0=*/true);
      }
    }

    for (std::size_t i = 0; i < classes_.size(); ++i) {
      if (i == 0) {
        for (const Edge& e : removed_from[0]) delta.deleted.push_back(D::as_identity_output(e));
        if (dirty[0]) {
          for (const Edge& e : classes_[0].edges) delta.inserted.push_back(D::as_identity_output(e));
        } else {
          for (const Edge& e : class0_added) delta.inserted.push_back(D::as_identity_output(e));
        }
        continue;
      }
      if (!dirty[i]) continue;
      if (classes_[i].inst) {
        for (auto& x : classes_[i].inst->output()) delta.deleted.push_back(x);
        classes_[i].inst.reset();
      }
      if (!classes_[i].edges.empty()) {
        build_instance(i);
        for (auto& x : classes_[i].inst->output()) delta.inserted.push_back(x);
      }
    }
    updates_ += u.size();
    stats_.max_phi = std::max(stats_.max_phi, phi());
    maybe_rebuild(delta);
    return cancel(std::move(delta));
  }

  Delta delete_batch(std::span<const Edge> raw) {
    std::vector<std::vector<Edge>> per(classes_.size());
    std::size_t count = 0;
    for (const Edge& e : raw) {
      auto it = index_.find(e);
      if (it == index_.end()) continue;
      per[static_cast<std::size_t>(it->second)].push_back(e);
      index_.erase(it);
      ++count;
    }
    Delta delta;
    for (std::size_t i = 0; i < per.size(); ++i) {
      if (per[i].empty()) continue;
      sort_unique(per[i]);
      auto& c = classes_[i];
      remove_edges(c.edges, per[i]);
      if (i == 0) {
        for (const Edge& e : per[i]) delta.deleted.push_back(D::as_identity_output(e));
        continue;
      }
      delta.append(c.inst->delete_batch(per[i]));
      if (c.edges.empty()) {
        for (auto& x : c.inst->output()) delta.deleted.push_back(x);
        c.inst.reset();
      }
    }
    updates_ += count;
    maybe_rebuild(delta);
    return cancel(std::move(delta));
  }

  // Deletions first, then insertions.
  Delta update(const UpdateBatch& b) {
    Delta d = delete_batch(b.deletes);
    d.append(insert_batch(b.inserts));
    return cancel(std::move(d));
  }

  // Destroys every class and rebuilds from the current edge set.
  Delta rebuild() {
    Delta delta;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
      std::vector<output_type> out;
      append_output(i, out);
      delta.deleted.insert(delta.deleted.end(), out.begin(), out.end());
    }
    build_from(edges(), delta);
    ++stats_.rebuilds;
    return cancel(std::move(delta));
  }

 private:
  struct Class {
    std::vector<Edge> edges;
    std::unique_ptr<D> inst;
  };

  static void remove_edges(std::vector<Edge>& from, const std::vector<Edge>& sorted_gone) {
    std::erase_if(from, [&](const Edge& e) {
      return std::binary_search(sorted_gone.begin(), sorted_gone.end(), e);
    });
  }

  void append_output(std::size_t i, std::vector<output_type>& out) const {
    const auto& c = classes_[i];
    if (i == 0) {
      for (const Edge& e : c.edges) out.push_back(D::as_identity_output(e));
    } else if (c.inst) {
      auto o = c.inst->output();
      out.insert(out.end(), o.begin(), o.end());
    }
  }

  void grow(std::size_t size, std::vector<char>& dirty, std::vector<std::vector<Edge>>& removed) {
    if (classes_.size() < size) classes_.resize(size);
    if (dirty.size() < size) dirty.resize(size, 0);
    if (removed.size() < size) removed.resize(size);
  }

  // Places `incoming` plus classes from..j-1 into the smallest empty class
  // j >= from. With include_class0, class 0 joins the merge as well.
  void merge_into_empty(std::size_t from, std::vector<Edge> incoming, std::vector<char>& dirty,
                        std::vector<std::vector<Edge>>& removed, bool include_class0 = false) {
    std::size_t j = from;
    grow(j + 1, dirty, removed);
    while (!classes_[j].edges.empty()) grow(++j + 1, dirty, removed);
    std::vector<Edge> merged = std::move(incoming);
    const std::size_t lo = include_class0 ? 0 : from;
    for (std::size_t i = lo; i < j; ++i) {
      for (const Edge& e : classes_[i].edges) {
        const int old = index_.at(e);
        if (old >= static_cast<int>(j)) ++stats_.index_violations;
        merged.push_back(e);
        if (i == 0 && !dirty[0]) removed[0].push_back(e);
      }
      classes_[i].edges.clear();
      dirty[i] = 1;
    }
    if (merged.size() > capacity(j))
      throw std::logic_error("DynamicWrapper: merged class exceeds its capacity");
    std::sort(merged.begin(), merged.end());
    for (const Edge& e : merged) index_[e] = static_cast<int>(j);
    classes_[j].edges = std::move(merged);
    dirty[j] = 1;
  }

  void build_instance(std::size_t i) {
    auto& c = classes_[i];
    for (const Edge& e : c.edges) {
      auto& p = participation_[e];
      ++p;
      stats_.max_participation = std::max(stats_.max_participation, p);
    }
    c.inst = factory_(n_, c.edges, derive_seed(opt_.seed, ++stats_.instances_built));
  }

  void build_from(std::vector<Edge> all, Delta& delta) {
    classes_.clear();
    index_.clear();
    participation_.clear();
    inserted_since_build_ = 0;
    updates_ = 0;
    built_size_ = all.size();
    if (all.empty()) return;
    std::size_t j = 0;
    while (capacity(j) < all.size()) ++j;
    classes_.resize(j + 1);
    for (const Edge& e : all) index_[e] = static_cast<int>(j);
    classes_[j].edges = std::move(all);
    if (j == 0) {
      for (const Edge& e : classes_[0].edges) delta.inserted.push_back(D::as_identity_output(e));
    } else {
      build_instance(j);
      for (auto& x : classes_[j].inst->output()) delta.inserted.push_back(x);
    }
    stats_.max_phi = std::max(stats_.max_phi, phi());
  }

  void maybe_rebuild(Delta& delta) {
    if (updates_ < opt_.rebuild_every) return;
    delta.append(rebuild());
  }

  std::size_t n_;
  Factory factory_;
  Options opt_;
  int l0_ = 0;
  std::vector<Class> classes_;
  EdgeMap<int> index_;
  EdgeMap<std::uint32_t> participation_;
  std::uint64_t updates_ = 0;
  std::uint64_t inserted_since_build_ = 0;
  std::uint64_t built_size_ = 0;
  Stats stats_;
};

}  // namespace bdsparse
