#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdsparse/rng.hpp"

namespace bdsparse {

// A list of values ordered by decreasing priority, addressed by 1-based rank.
// Priorities are distinct positive integers. Backed by a treap with subtree
// sizes; heap keys are a hash of the priority so the shape is deterministic.
template <class T>
class OrderedList {
 public:
  using Priority = std::uint64_t;

  struct FindResult {
    const T& value;
    std::size_t count_at_least;  // number of elements with priority >= p (= rank)
  };

  OrderedList() = default;

  explicit OrderedList(std::vector<std::pair<T, Priority>> items) { initialize(std::move(items)); }

  void initialize(std::vector<std::pair<T, Priority>> items) {
    nodes_.clear();
    free_.clear();
    root_ = kNil;
    nodes_.reserve(items.size());
    for (auto& [value, p] : items) insert(std::move(value), p);
  }

  std::size_t size() const noexcept { return size_of(root_); }
  bool empty() const noexcept { return root_ == kNil; }

  const T& query(std::size_t rank) const { return nodes_[node_at(rank)].value; }
  Priority priority_at(std::size_t rank) const { return nodes_[node_at(rank)].priority; }

  void update_value(std::size_t rank, T value) { nodes_[node_at(rank)].value = std::move(value); }

  void update_priority(std::size_t rank, Priority p) {
    const std::int32_t x = node_at(rank);
    if (nodes_[x].priority == p) return;
    if (locate(p) != kNil) {
      throw std::invalid_argument("OrderedList: priority " + std::to_string(p) + " already in use");
    }
    T value = std::move(nodes_[x].value);
    erase_node(x);
    insert(std::move(value), p);
  }

  FindResult find(Priority p) const {
    std::int32_t x = root_;
    std::size_t before = 0;
    while (x != kNil) {
      const Node& nd = nodes_[x];
      if (p == nd.priority) return {nd.value, before + size_of(nd.left) + 1};
      if (p > nd.priority) {
        x = nd.left;
      } else {
        before += size_of(nd.left) + 1;
        x = nd.right;
      }
    }
    throw std::out_of_range("OrderedList: priority " + std::to_string(p) + " not present");
  }

  bool contains(Priority p) const { return locate(p) != kNil; }

  // Smallest rank q >= rank whose value satisfies pred, or size()+1.
  // Cost is O(log n + (q - rank)).
  template <class Pred>
  std::size_t next_with(std::size_t rank, Pred&& pred) const {
    if (rank < 1) rank = 1;
    const std::size_t n = size();
    if (rank > n) return n + 1;
    // Stack of ancestors whose in-order position is still ahead of us.
    std::vector<std::int32_t> stack;
    std::int32_t x = root_;
    std::size_t k = rank;
    while (x != kNil) {
      const std::size_t left = size_of(nodes_[x].left);
      if (k <= left) {
        stack.push_back(x);
        x = nodes_[x].left;
      } else if (k == left + 1) {
        stack.push_back(x);
        break;
      } else {
        k -= left + 1;
        x = nodes_[x].right;
      }
    }
    std::size_t q = rank;
    while (!stack.empty()) {
      const std::int32_t cur = stack.back();
      stack.pop_back();
      if (pred(nodes_[cur].value)) return q;
      ++q;
      for (std::int32_t c = nodes_[cur].right; c != kNil; c = nodes_[c].left) stack.push_back(c);
    }
    return n + 1;
  }

  void insert(T value, Priority p) {
    if (p == 0) throw std::invalid_argument("OrderedList: priorities must be positive");
    if (locate(p) != kNil) {
      throw std::invalid_argument("OrderedList: duplicate priority " + std::to_string(p));
    }
    const std::int32_t x = alloc(std::move(value), p);
    auto [l, r] = split(root_, p);
    root_ = merge(merge(l, x), r);
  }

  void erase_rank(std::size_t rank) { erase_node(node_at(rank)); }

 private:
  static constexpr std::int32_t kNil = -1;

  struct Node {
    Priority priority;
    std::uint64_t heap;
    std::int32_t left;
    std::int32_t right;
    std::uint32_t size;
    T value;
  };

  std::uint32_t size_of(std::int32_t x) const noexcept { return x == kNil ? 0 : nodes_[x].size; }

  void pull(std::int32_t x) {
    nodes_[x].size = 1 + size_of(nodes_[x].left) + size_of(nodes_[x].right);
  }

  std::int32_t alloc(T value, Priority p) {
    Node nd{p, mix64(p), kNil, kNil, 1, std::move(value)};
    if (!free_.empty()) {
      const std::int32_t x = free_.back();
      free_.pop_back();
      nodes_[x] = std::move(nd);
      return x;
    }
    nodes_.push_back(std::move(nd));
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

  std::int32_t node_at(std::size_t rank) const {
    if (rank < 1 || rank > size()) {
      throw std::out_of_range("OrderedList: rank " + std::to_string(rank) + " out of [1, " +
                              std::to_string(size()) + "]");
    }
    std::int32_t x = root_;
    while (true) {
      const std::size_t left = size_of(nodes_[x].left);
      if (rank <= left) {
        x = nodes_[x].left;
      } else if (rank == left + 1) {
        return x;
      } else {
        rank -= left + 1;
        x = nodes_[x].right;
      }
    }
  }

  std::int32_t locate(Priority p) const {
    std::int32_t x = root_;
    while (x != kNil && nodes_[x].priority != p) x = p > nodes_[x].priority ? nodes_[x].left : nodes_[x].right;
    return x;
  }

  // Left part holds priorities > p, right part holds priorities <= p.
  std::pair<std::int32_t, std::int32_t> split(std::int32_t x, Priority p) {
    if (x == kNil) return {kNil, kNil};
    if (nodes_[x].priority > p) {
      auto [l, r] = split(nodes_[x].right, p);
      nodes_[x].right = l;
      pull(x);
      return {x, r};
    }
    auto [l, r] = split(nodes_[x].left, p);
    nodes_[x].left = r;
    pull(x);
    return {l, x};
  }

  std::int32_t merge(std::int32_t a, std::int32_t b) {
    if (a == kNil) return b;
    if (b == kNil) return a;
    if (nodes_[a].heap > nodes_[b].heap) {
      nodes_[a].right = merge(nodes_[a].right, b);
      pull(a);
      return a;
    }
    nodes_[b].left = merge(a, nodes_[b].left);
    pull(b);
    return b;
  }

  void erase_node(std::int32_t x) {
    const Priority p = nodes_[x].priority;
    // Remove by splitting around p: (> p), (== p), (< p).
    auto [l, rest] = split(root_, p);
    auto [mid, r] = split_strict(rest, p);
    (void)mid;
    root_ = merge(l, r);
    free_.push_back(x);
  }

  // Left part holds priorities >= p, right part holds priorities < p.
  std::pair<std::int32_t, std::int32_t> split_strict(std::int32_t x, Priority p) {
    if (x == kNil) return {kNil, kNil};
    if (nodes_[x].priority >= p) {
      auto [l, r] = split_strict(nodes_[x].right, p);
      nodes_[x].right = l;
      pull(x);
      return {x, r};
    }
    auto [l, r] = split_strict(nodes_[x].left, p);
    nodes_[x].left = r;
    pull(x);
    return {l, x};
  }

  std::vector<Node> nodes_;
  std::vector<std::int32_t> free_;
  std::int32_t root_ = kNil;
};

}  // namespace bdsparse
