#include <gtest/gtest.h>

#include <map>

#include "bdsparse/ordered_list.hpp"
#include "bdsparse/rng.hpp"

using namespace bdsparse;

namespace {

std::string order(const OrderedList<char>& l) {
  std::string s;
  for (std::size_t r = 1; r <= l.size(); ++r) s += l.query(r);
  return s;
}

OrderedList<char> cab() { return OrderedList<char>({{'a', 5}, {'b', 3}, {'c', 9}}); }

}  // namespace

TEST(OrderedList, InitializeSortsByPriorityDescending) {
  EXPECT_EQ(order(cab()), "cab");
  OrderedList<char> empty(std::vector<std::pair<char, std::uint64_t>>{});
  EXPECT_EQ(empty.size(), 0u);
  OrderedList<char> one({{'x', 1}});
  EXPECT_EQ(one.query(1), 'x');
}

TEST(OrderedList, UpdateValue) {
  auto l = cab();
  l.update_value(2, 'z');
  EXPECT_EQ(order(l), "czb");
  OrderedList<char> one({{'x', 1}});
  one.update_value(1, 'y');
  EXPECT_EQ(order(one), "y");
  EXPECT_THROW(l.update_value(4, 'q'), std::out_of_range);
}

TEST(OrderedList, UpdatePriority) {
  auto l = cab();
  l.update_priority(3, 7);
  EXPECT_EQ(order(l), "cba");
  l.update_priority(1, 10);
  EXPECT_EQ(order(l), "cba");
  EXPECT_THROW(l.update_priority(2, 10), std::invalid_argument);
}

TEST(OrderedList, Find) {
  const auto l = cab();
  EXPECT_EQ(l.find(5).value, 'a');
  EXPECT_EQ(l.find(5).count_at_least, 2u);
  EXPECT_EQ(l.find(9).value, 'c');
  EXPECT_EQ(l.find(9).count_at_least, 1u);
  EXPECT_THROW(l.find(4), std::out_of_range);
}

TEST(OrderedList, NextWith) {
  const auto l = cab();
  EXPECT_EQ(l.next_with(1, [](char v) { return v == 'b'; }), 3u);
  EXPECT_EQ(l.next_with(1, [](char) { return false; }), 4u);
  EXPECT_EQ(l.next_with(2, [](char) { return true; }), 2u);
}

TEST(OrderedList, MatchesSortedMapUnderRandomOps) {
  Rng rng(17);
  OrderedList<int> l;
  std::map<std::uint64_t, int, std::greater<>> ref;
  for (int step = 0; step < 5000; ++step) {
    const int op = static_cast<int>(rng.below(4));
    if (op == 0 || ref.empty()) {
      const std::uint64_t p = 1 + rng.below(1000);
      if (ref.count(p)) continue;
      const int v = static_cast<int>(rng.below(100000));
      l.insert(v, p);
      ref[p] = v;
    } else if (op == 1) {
      const std::size_t r = 1 + rng.below(ref.size());
      auto it = std::next(ref.begin(), static_cast<long>(r - 1));
      ASSERT_EQ(l.query(r), it->second);
      l.erase_rank(r);
      ref.erase(it);
    } else if (op == 2) {
      const std::size_t r = 1 + rng.below(ref.size());
      const std::uint64_t p = 1 + rng.below(1000);
      auto it = std::next(ref.begin(), static_cast<long>(r - 1));
      if (ref.count(p) && p != it->first) {
        EXPECT_THROW(l.update_priority(r, p), std::invalid_argument);
        continue;
      }
      const int v = it->second;
      ref.erase(it);
      ref[p] = v;
      l.update_priority(r, p);
    } else {
      const int target = static_cast<int>(rng.below(100000));
      const std::size_t start = 1 + rng.below(ref.size());
      std::size_t expect = ref.size() + 1, r = 1;
      for (auto it = ref.begin(); it != ref.end(); ++it, ++r)
        if (r >= start && it->second >= target) {
          expect = r;
          break;
        }
      EXPECT_EQ(l.next_with(start, [&](int v) { return v >= target; }), expect);
    }
    ASSERT_EQ(l.size(), ref.size());
  }
  std::size_t r = 1;
  for (const auto& [p, v] : ref) {
    EXPECT_EQ(l.priority_at(r), p);
    EXPECT_EQ(l.find(p).count_at_least, r);
    EXPECT_EQ(l.query(r++), v);
  }
}
