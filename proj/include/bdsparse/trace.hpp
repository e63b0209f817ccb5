#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdsparse/graph.hpp"
#include "bdsparse/rng.hpp"
#include "bdsparse/sparsifier.hpp"

namespace bdsparse {

class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Records before the first `B` form the initial graph; every later `B`
// closes one update batch. A trailing unterminated batch is kept.
struct Trace {
  std::size_t n = 0;
  std::vector<Edge> initial;
  std::vector<UpdateBatch> batches;

  bool has_inserts() const {
    return std::any_of(batches.begin(), batches.end(),
                       [](const UpdateBatch& b) { return !b.inserts.empty(); });
  }
};

inline Trace parse_trace(std::istream& in) {
  Trace t;
  bool have_n = false, in_initial = true;
  UpdateBatch cur;
  bool cur_open = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    auto read_edge = [&]() {
      long long a = -1, b = -1;
      if (!(ss >> a >> b)) throw TraceError(lineno, "expected two vertex ids");
      if (!have_n) throw TraceError(lineno, "edge record before the N header");
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= t.n || static_cast<std::size_t>(b) >= t.n)
        throw TraceError(lineno, "vertex id out of range");
      if (a == b) throw TraceError(lineno, "self-loop");
      return canonicalize(static_cast<VertexId>(a), static_cast<VertexId>(b));
    };
    if (tag == "N") {
      long long n = -1;
      if (have_n) throw TraceError(lineno, "duplicate N header");
      if (!(ss >> n) || n < 0) throw TraceError(lineno, "bad vertex count");
      t.n = static_cast<std::size_t>(n);
      have_n = true;
    } else if (tag == "I") {
      const Edge e = read_edge();
      if (in_initial) {
        t.initial.push_back(e);
      } else {
        cur.inserts.push_back(e);
        cur_open = true;
      }
    } else if (tag == "D") {
      const Edge e = read_edge();
      if (in_initial) throw TraceError(lineno, "deletion inside the initial graph");
      cur.deletes.push_back(e);
      cur_open = true;
    } else if (tag == "B") {
      if (!have_n) throw TraceError(lineno, "batch marker before the N header");
      if (in_initial) {
        in_initial = false;
      } else {
        t.batches.push_back(std::move(cur));
        cur = {};
        cur_open = false;
      }
    } else {
      throw TraceError(lineno, "unknown record '" + tag + "'");
    }
    std::string extra;
    if (ss >> extra) throw TraceError(lineno, "trailing tokens");
  }
  if (!have_n) throw TraceError(lineno, "missing N header");
  if (cur_open) t.batches.push_back(std::move(cur));
  sort_unique(t.initial);
  return t;
}

inline Trace parse_trace(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

inline void write_trace(std::ostream& out, const Trace& t) {
  out << "N " << t.n << '\n';
  for (const Edge& e : t.initial) out << "I " << e.u << ' ' << e.v << '\n';
  out << "B\n";
  for (const UpdateBatch& b : t.batches) {
    for (const Edge& e : b.deletes) out << "D " << e.u << ' ' << e.v << '\n';
    for (const Edge& e : b.inserts) out << "I " << e.u << ' ' << e.v << '\n';
    out << "B\n";
  }
}

inline std::string trace_to_string(const Trace& t) {
  std::ostringstream out;
  write_trace(out, t);
  return out.str();
}

// Structure files: one `S u v w` line per output edge.
inline void write_structure(std::ostream& out, const std::vector<WeightedEdge>& h) {
  for (const auto& we : h) out << "S " << we.edge.u << ' ' << we.edge.v << ' ' << we.weight << '\n';
}

inline std::vector<WeightedEdge> parse_structure(std::istream& in, std::size_t n) {
  std::vector<WeightedEdge> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag != "S") throw TraceError(lineno, "expected an S record");
    long long a = -1, b = -1;
    long long w = 1;
    if (!(ss >> a >> b)) throw TraceError(lineno, "expected two vertex ids");
    if (!(ss >> w)) w = 1;
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n || a == b)
      throw TraceError(lineno, "bad edge");
    if (w <= 0) throw TraceError(lineno, "weight must be positive");
    out.push_back({canonicalize(static_cast<VertexId>(a), static_cast<VertexId>(b)),
                   static_cast<std::uint64_t>(w)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct GenParams {
  std::string model = "uniform";  // uniform | window | pa
  std::size_t n = 64;
  std::size_t m = 256;
  std::size_t batches = 8;
  std::size_t batch_size = 16;
  double mix = 0.0;  // fraction of updates that are insertions
  std::uint64_t seed = 1;
};

namespace detail {

// Edge set with O(1) uniform sampling and removal, iteration in a
// seed-determined order.
class EdgePool {
 public:
  bool contains(const Edge& e) const { return pos_.count(e) != 0; }
  std::size_t size() const noexcept { return items_.size(); }
  bool add(const Edge& e) {
    if (!pos_.emplace(e, items_.size()).second) return false;
    items_.push_back(e);
    return true;
  }
  void remove(const Edge& e) {
    auto it = pos_.find(e);
    const std::size_t i = it->second;
    pos_.erase(it);
    if (i + 1 != items_.size()) {
      items_[i] = items_.back();
      pos_[items_[i]] = i;
    }
    items_.pop_back();
  }
  const Edge& at(std::size_t i) const { return items_[i]; }

 private:
  std::vector<Edge> items_;
  EdgeMap<std::size_t> pos_;
};

}  // namespace detail

// Oblivious update streams: every choice depends on the seed and the
// generator's own state only.
inline Trace generate_trace(const GenParams& p) {
  if (p.model != "uniform" && p.model != "window" && p.model != "pa")
    throw std::invalid_argument("gen: unknown model '" + p.model + "'");
  if (!(p.mix >= 0.0 && p.mix <= 1.0)) throw std::invalid_argument("gen: mix must be in [0, 1]");
  if (p.n < 2) throw std::invalid_argument("gen: need at least 2 vertices");
  const std::uint64_t max_edges = static_cast<std::uint64_t>(p.n) * (p.n - 1) / 2;
  if (p.m > max_edges) throw std::invalid_argument("gen: m exceeds n(n-1)/2");

  Rng rng(p.seed);
  Trace t;
  t.n = p.n;
  detail::EdgePool pool;
  std::vector<Edge> fifo;  // insertion order, for the window model
  std::size_t fifo_head = 0;
  std::vector<VertexId> endpoints;  // degree-weighted vertex list, for pa

  auto random_pair = [&]() -> Edge {
    for (;;) {
      VertexId a = static_cast<VertexId>(rng.below(p.n));
      VertexId b;
      if (p.model == "pa" && !endpoints.empty() && rng.bernoulli(0.75))
        b = endpoints[rng.below(endpoints.size())];
      else
        b = static_cast<VertexId>(rng.below(p.n));
      if (a != b) return canonicalize(a, b);
    }
  };
  auto add = [&](const Edge& e) {
    pool.add(e);
    fifo.push_back(e);
    endpoints.push_back(e.u);
    endpoints.push_back(e.v);
  };

  const bool dense = p.m * 2 > max_edges;
  while (pool.size() < p.m) {
    Edge e = random_pair();
    if (dense) {
      // Rejection sampling slows down near saturation; fall back to a scan.
      for (std::uint64_t tries = 0; pool.contains(e) && tries < max_edges; ++tries) {
        VertexId v = e.v + 1, u = e.u;
        if (v >= p.n) {
          u = (u + 1) % static_cast<VertexId>(p.n - 1);
          v = u + 1;
        }
        e = Edge{u, v};
      }
    }
    if (!pool.contains(e)) add(e);
  }
  for (std::size_t i = 0; i < pool.size(); ++i) t.initial.push_back(pool.at(i));
  sort_unique(t.initial);

  for (std::size_t b = 0; b < p.batches; ++b) {
    UpdateBatch batch;
    EdgeSet touched;
    for (std::size_t k = 0; k < p.batch_size; ++k) {
      const bool insert = p.mix > 0.0 && rng.bernoulli(p.mix);
      if (insert) {
        if (pool.size() >= max_edges) continue;
        Edge e = random_pair();
        int tries = 0;
        while ((pool.contains(e) || touched.count(e)) && ++tries < 64) e = random_pair();
        if (pool.contains(e) || touched.count(e)) continue;
        touched.insert(e);
        batch.inserts.push_back(e);
      } else {
        Edge e{};
        bool found = false;
        if (p.model == "window") {
          while (fifo_head < fifo.size()) {
            const Edge c = fifo[fifo_head++];
            if (pool.contains(c) && !touched.count(c)) {
              e = c;
              found = true;
              break;
            }
          }
        } else {
          for (int tries = 0; tries < 64 && pool.size() > 0; ++tries) {
            const Edge c = pool.at(rng.below(pool.size()));
            if (!touched.count(c)) {
              e = c;
              found = true;
              break;
            }
          }
        }
        if (!found) continue;
        touched.insert(e);
        batch.deletes.push_back(e);
      }
    }
    for (const Edge& e : batch.deletes) pool.remove(e);
    for (const Edge& e : batch.inserts) add(e);
    sort_unique(batch.deletes);
    sort_unique(batch.inserts);
    t.batches.push_back(std::move(batch));
  }
  return t;
}

}  // namespace bdsparse
