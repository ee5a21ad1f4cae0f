#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "hetmpc/primitives.hpp"

using namespace hetmpc;
using namespace hetmpc::prim;

namespace {

ClusterConfig cfg(std::uint64_t n, std::uint64_t m, double c = 2.0, int e = 3, std::uint64_t seed = 11) {
  ClusterConfig k;
  k.n = n;
  k.m = m;
  k.gamma = 0.5;
  k.polylog_c = c;
  k.polylog_e = e;
  k.seed = seed;
  return k;
}

Shards<Word> random_items(std::uint32_t k, std::size_t per, std::uint64_t seed, Word range) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Word> d(0, range);
  Shards<Word> s(k);
  for (auto& sh : s)
    for (std::size_t i = 0; i < per; ++i) sh.push_back(d(rng));
  return s;
}

}  // namespace

TEST_CASE("owner of rank matches the balanced layout") {
  for (std::uint64_t n : {1, 5, 16, 17, 100}) {
    for (std::uint32_t k : {1u, 3u, 4u, 7u}) {
      for (std::uint64_t r = 0; r < n; ++r) {
        std::uint32_t expect = 0;
        for (std::uint32_t j = 0; j < k; ++j)
          if (j * n / k <= r && r < (j + 1) * n / k) expect = j + 1;
        CHECK(detail::owner_of_rank(r, n, k) == expect);
      }
    }
  }
}

TEST_CASE("het_sort produces a balanced global order in six rounds") {
  Cluster c(cfg(256, 4096));
  const auto k = c.small_count();
  auto items = random_items(k, 16, 3, 1000);
  std::vector<Word> all;
  for (const auto& s : items) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end());

  auto sorted = het_sort(c, items);
  CHECK(c.rounds_used() == kSortRounds);
  std::vector<Word> got;
  const std::uint64_t n = all.size();
  for (std::uint32_t j = 0; j < k; ++j) {
    CHECK(sorted[j].size() == (j + 1) * n / k - j * n / k);
    got.insert(got.end(), sorted[j].begin(), sorted[j].end());
  }
  CHECK(got == all);
  CHECK(c.violations().empty());
}

TEST_CASE("het_sort with equal keys and empty input") {
  Cluster c(cfg(64, 256));
  const auto k = c.small_count();
  Shards<Word> same(k, std::vector<Word>(5, 42));
  auto s = het_sort(c, same);
  std::size_t total = 0;
  for (const auto& sh : s) {
    total += sh.size();
    for (auto x : sh) CHECK(x == 42);
  }
  CHECK(total == 5 * k);

  Cluster e(cfg(64, 256));
  auto empty = het_sort(e, Shards<Word>(e.small_count()));
  CHECK(e.rounds_used() == kSortRounds);
  for (const auto& sh : empty) CHECK(sh.empty());
}

TEST_CASE("het_sort orders by a custom comparator with stable ties") {
  Cluster c(cfg(64, 256));
  const auto k = c.small_count();
  Shards<std::pair<Word, Word>> items(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (Word j = 0; j < 4; ++j) items[i].emplace_back(j % 2, Word(i) * 10 + j);
  auto s = het_sort(c, items, [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Word, Word>> flat;
  for (const auto& sh : s) flat.insert(flat.end(), sh.begin(), sh.end());
  REQUIRE(flat.size() == 4 * k);
  for (std::size_t i = 1; i < flat.size(); ++i) {
    CHECK(flat[i - 1].first <= flat[i].first);
    if (flat[i - 1].first == flat[i].first) CHECK(flat[i - 1].second < flat[i].second);
  }
}

TEST_CASE("tree shapes") {
  TreeShape t{3, 12, 3};
  CHECK(t.size() == 10);
  CHECK(!t.parent(3).has_value());
  CHECK(*t.parent(4) == 3);
  CHECK(*t.parent(6) == 3);
  CHECK(*t.parent(7) == 4);
  CHECK(t.children(3) == std::vector<std::uint32_t>{4, 5, 6});
  CHECK(t.children(5) == std::vector<std::uint32_t>{10, 11, 12});
  CHECK(t.children(6).empty());
  CHECK(t.depth() == 2);
  CHECK(TreeShape{5, 5, 4}.depth() == 0);

  // consecutive ranges sharing boundary machines: each machine is an inner
  // node of at most one tree
  std::vector<TreeShape> ranges{{1, 4, 2}, {4, 4, 2}, {4, 9, 2}, {9, 15, 2}, {15, 15, 2}};
  std::map<std::uint32_t, int> inner;
  for (const auto& r : ranges)
    for (std::uint32_t m = r.first; m <= r.last; ++m)
      if (!r.children(m).empty()) ++inner[m];
  for (const auto& [m, cnt] : inner) CHECK(cnt == 1);
}

TEST_CASE("aggregate sums per key with a fixed round count") {
  for (std::uint64_t seed : {1, 2, 3}) {
    Cluster c(cfg(256, 4096, 2.0, 3, seed));
    const auto k = c.small_count();
    std::mt19937_64 rng(seed);
    Shards<KeyValue<Word>> elems(k);
    std::map<Word, Word> expect;
    for (std::uint32_t i = 0; i < k; ++i)
      for (int j = 0; j < 12; ++j) {
        Word key = static_cast<Word>(rng() % 40);
        Word v = static_cast<Word>(rng() % 100);
        elems[i].push_back({key, v});
        expect[key] += v;
      }
    auto got = aggregate(c, elems, [](Word a, Word b) { return a + b; });
    CHECK(got == expect);
    CHECK(c.rounds_used() == aggregate_rounds(c, true));
  }
}

TEST_CASE("disseminate delivers to every requester and nothing else") {
  Cluster c(cfg(256, 4096));
  const auto k = c.small_count();
  std::map<Word, std::vector<Word>> x;
  for (Word key = 0; key < 60; key += 2) x[key] = {key, key * key};
  std::vector<std::vector<Word>> req(k);
  std::mt19937_64 rng(5);
  for (std::uint32_t i = 0; i < k; ++i)
    for (int j = 0; j < 6; ++j) req[i].push_back(static_cast<Word>(rng() % 60));
  auto got = disseminate(c, x, req);
  CHECK(c.rounds_used() == disseminate_rounds(c));
  for (std::uint32_t i = 0; i < k; ++i) {
    std::set<Word> want;
    for (Word key : req[i])
      if (key % 2 == 0) want.insert(key);
    std::set<Word> have;
    for (const auto& [key, v] : got[i]) {
      have.insert(key);
      CHECK(v == x[key]);
    }
    CHECK(have == want);
  }
}

TEST_CASE("disseminate of one part to all machines acts as a broadcast") {
  Cluster c(cfg(256, 4096));
  const auto k = c.small_count();
  std::map<Word, Word> x{{1, 99}};
  std::vector<std::vector<Word>> req(k, std::vector<Word>{1});
  auto got = disseminate(c, x, req);
  for (std::uint32_t i = 0; i < k; ++i) CHECK(got[i].at(1) == 99);
}

TEST_CASE("small machine allreduce") {
  Cluster c(cfg(256, 4096));
  std::vector<std::uint64_t> v(c.small_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  auto total = small_allreduce_sum(c, v);
  CHECK(total == v.size() * (v.size() - 1) / 2);
  CHECK(c.rounds_used() == 2 * TreeShape{1, c.small_count(), branching(c)}.depth());
}
