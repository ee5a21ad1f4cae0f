#include <map>
#include <random>

#include "doctest.h"
#include "hetmpc/connectivity.hpp"
#include "hetmpc/generators.hpp"
#include "oracles.hpp"

using namespace hetmpc;
using namespace hetmpc::conn;

namespace {

HashKeys keys_for(std::uint64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return HashKeys::generate(shape_for(n), rng);
}

std::vector<L0Sketch> vertex_sketches(const SimGraph& g, const HashKeys& keys) {
  std::vector<L0Sketch> s(g.n, L0Sketch(keys.shape));
  for (const auto& e : g.edges) {
    auto c = coordinate(g.n, e.u, e.v);
    s[e.u].add(keys, c, e.u < e.v ? 1 : -1);
    s[e.v].add(keys, c, e.v < e.u ? 1 : -1);
  }
  return s;
}

L0Sketch set_sum(const std::vector<L0Sketch>& s, const std::vector<Vertex>& set) {
  L0Sketch out(s.front().shape());
  for (auto v : set) out += s[v];
  return out;
}

bool same_labels(const std::vector<Vertex>& got, const SimGraph& g) {
  auto want = oracle::components(g.n, g.edges);
  for (std::size_t v = 0; v < g.n; ++v)
    if (got[v] != want[v]) return false;
  return true;
}

}  // namespace

TEST_CASE("field arithmetic") {
  CHECK(mulmod(kPrime - 1, kPrime - 1) == 1);
  CHECK(powmod(3, 0) == 1);
  CHECK(powmod(2, 61) == 1);
  CHECK(mulmod(123456789, powmod(123456789, kPrime - 2)) == 1);
  auto s = shape_for(256);
  CHECK(s.instances == 8);
  CHECK(s.levels == 16);
  CHECK(s.t == 16);
}

TEST_CASE("sketches are linear and sparse sums match dense sums") {
  auto keys = keys_for(64, 5);
  std::mt19937_64 rng(9);
  L0Sketch x(keys.shape), y(keys.shape), both(keys.shape);
  for (int i = 0; i < 40; ++i) {
    auto cx = rng() % (64 * 64), cy = rng() % (64 * 64);
    x.add(keys, cx, 1);
    both.add(keys, cx, 1);
    y.add(keys, cy, -1);
    both.add(keys, cy, -1);
  }
  L0Sketch sum = x;
  sum += y;
  CHECK(sum == both);
  auto sp = SparseSketch::from(x) + SparseSketch::from(y);
  L0Sketch dense(keys.shape);
  sp.add_into(dense);
  CHECK(dense == both);

  Payload p;
  put(p, sp);
  CHECK(p.size() == 1 + 4 * sp.cells.size());
  Reader r(p);
  CHECK(Codec<SparseSketch>::get(r).cells.size() == sp.cells.size());
}

TEST_CASE("sampler basics") {
  auto keys = keys_for(16, 1);
  L0Sketch zero(keys.shape);
  CHECK(std::holds_alternative<Empty>(l0_sample(zero, keys, 0)));

  SimGraph one;
  one.n = 16;
  one.edges = {{1, 2, 1}};
  auto s = vertex_sketches(one, keys);
  CHECK(std::holds_alternative<Empty>(l0_sample(s[0], keys, 0)));
  CHECK(std::holds_alternative<Empty>(l0_sample(set_sum(s, {1, 2}), keys, 0)));
  for (std::uint32_t r = 0; r < keys.shape.instances; ++r) {
    auto got = l0_sample(s[1], keys, r);
    REQUIRE(std::holds_alternative<Edge>(got));
    CHECK(std::get<Edge>(got) == Edge{1, 2, 1});
  }

  SimGraph path;
  path.n = 16;
  path.edges = {{1, 2, 1}, {2, 3, 1}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto k = keys_for(16, seed);
    auto ps = vertex_sketches(path, k);
    for (std::uint32_t r = 0; r < k.shape.instances; ++r) {
      auto got = l0_sample(set_sum(ps, {1, 2}), k, r);
      CHECK_FALSE(std::holds_alternative<Empty>(got));
      if (auto* e = std::get_if<Edge>(&got)) CHECK(*e == Edge{2, 3, 1});
    }
  }
}

TEST_CASE("summed sketch support is the cut") {
  auto g = gnm(12, 30, 4);
  auto keys = keys_for(12, 2);
  auto s = vertex_sketches(g, keys);
  std::vector<Vertex> set = {0, 3, 5, 7};
  L0Sketch expect(keys.shape);
  for (const auto& e : g.edges) {
    bool a = std::count(set.begin(), set.end(), e.u) > 0, b = std::count(set.begin(), set.end(), e.v) > 0;
    if (a != b) expect.add(keys, coordinate(12, e.u, e.v), a == (e.u < e.v) ? 1 : -1);
  }
  CHECK(set_sum(s, set) == expect);
}

TEST_CASE("sampler on a cut of 16 edges") {
  // star centre 0 with 16 leaves; the centre's sketch is the cut
  SimGraph star;
  star.n = 17;
  for (Vertex v = 1; v <= 16; ++v) star.edges.push_back({0, v, 1});
  std::map<Vertex, int> hits;
  int fails = 0, wrong = 0;
  const int trials = 10000;
  std::uint64_t seed = 100;
  int done = 0;
  while (done < trials) {
    auto keys = keys_for(17, seed++);
    auto s = vertex_sketches(star, keys);
    for (std::uint32_t r = 0; r < keys.shape.instances && done < trials; ++r, ++done) {
      auto got = l0_sample(s[0], keys, r);
      if (auto* e = std::get_if<Edge>(&got)) {
        if (e->u != 0 || e->v < 1 || e->v > 16)
          ++wrong;
        else
          ++hits[e->v];
      } else {
        CHECK(std::holds_alternative<Fail>(got));
        ++fails;
      }
    }
  }
  CHECK(wrong == 0);
  CHECK(fails <= trials / 10);
  const double succ = trials - fails, p = 1.0 / 16;
  const double sigma = std::sqrt(succ * p * (1 - p));
  for (Vertex v = 1; v <= 16; ++v) CHECK(std::abs(hits[v] - succ * p) <= 5 * sigma);
}

TEST_CASE("connected components on small inputs") {
  SimGraph tri;
  tri.n = 6;
  tri.edges = {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}};
  Cluster c(config_for(tri, 0.5, 16.0, 4, 1));
  auto r = connected_components(c, tri);
  CHECK(r.count == 2);
  CHECK(r.component == std::vector<Vertex>{0, 0, 0, 3, 3, 3});

  SimGraph lone;
  lone.n = 5;
  Cluster c2(config_for(lone, 0.5, 16.0, 4, 1));
  CHECK(connected_components(c2, lone).count == 5);
}

TEST_CASE("one cycle versus two cycles") {
  auto one = cycle_graph(256);
  auto two = two_cycles(256);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Cluster a(config_for(one, 0.5, 2.0, 4, seed));
    Cluster b(config_for(two, 0.5, 2.0, 4, seed));
    CHECK(connected_components(a, one).count == 1);
    auto rb = connected_components(b, two);
    CHECK(rb.count == 2);
    CHECK(same_labels(rb.component, two));
    CHECK(a.violations().empty());
  }
}

TEST_CASE("connected components agree with union-find on sparse random graphs") {
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = gnp(256, 1.2 / 256, seed);
    Cluster c(config_for(g, 0.5, 2.0, 4, seed));
    auto r = connected_components(c, g);
    agree += same_labels(r.component, g);
  }
  CHECK(agree >= 19);
}

TEST_CASE("threshold estimator") {
  CHECK(threshold_estimate(10, 0.5, {3}) == doctest::Approx(7));
  // path 0-1-2 with weights 1 and 2, eps 1: thresholds 1, 2
  CHECK(threshold_estimate(3, 1.0, {2, 1}) == doctest::Approx(3));
}

TEST_CASE("mst weight estimate") {
  auto unit = gnp(64, 0.05, 3);
  Cluster c(config_for(unit, 0.5, 4.0, 4, 2));
  auto r = mst_weight_estimate(c, unit, 0.2);
  CHECK(r.r == 0);
  CHECK(r.estimate == doctest::Approx(64.0 - oracle::component_count(unit.n, unit.edges)));

  SimGraph tree = path_graph(40);
  tree.weighted = true;
  for (std::size_t i = 0; i < tree.edges.size(); ++i) tree.edges[i].w = 1 + static_cast<Weight>(i % 2);
  const double exact = oracle::weight(oracle::kruskal(tree));
  Cluster c2(config_for(tree, 0.5, 4.0, 4, 5));
  auto r2 = mst_weight_estimate(c2, tree, 0.1);
  CHECK(r2.estimate >= (1 - 0.2) * exact);
  CHECK(r2.estimate <= (1 + 0.2) * exact);

  auto g = gnm(128, 512, 8);
  assign_weights(g, 64, 9);
  const double w = oracle::weight(oracle::kruskal(g));
  Cluster c3(config_for(g, 0.5, 4.0, 4, 8));
  auto r3 = mst_weight_estimate(c3, g, 0.1);
  CHECK(r3.estimate / w >= 0.8);
  CHECK(r3.estimate / w <= 1.2);
  CHECK(c3.violations().empty());
}
