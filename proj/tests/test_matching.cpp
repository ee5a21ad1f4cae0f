#include <set>

#include "doctest.h"
#include "hetmpc/errors.hpp"
#include "hetmpc/generators.hpp"
#include "hetmpc/matching.hpp"
#include "oracles.hpp"

using namespace hetmpc;
using namespace hetmpc::matching;

namespace {

ClusterConfig cfg_for(const SimGraph& g, std::uint64_t seed, double c = 4.0) { return config_for(g, 0.5, c, 3, seed); }

SimGraph with_hubs(std::uint64_t n, std::uint64_t m, int hubs, std::uint64_t seed) {
  auto g = gnm(n, m, seed);
  std::set<std::pair<Vertex, Vertex>> have;
  for (const auto& e : g.edges) have.insert(pair_key(e.u, e.v));
  for (int h = 0; h < hubs; ++h)
    for (Vertex v = 0; v < Vertex(n); v += 2) {
      Vertex hub = Vertex(n) - 1 - h;
      if (v == hub || have.count(pair_key(hub, v))) continue;
      have.insert(pair_key(hub, v));
      g.edges.push_back({hub, v, 1});
    }
  return g;
}

void check_maximal(const SimGraph& g, const std::vector<Edge>& m) {
  CHECK(oracle::is_subgraph(g, m));
  CHECK(oracle::is_matching(g, m));
  CHECK(oracle::is_maximal(g, m));
}

}  // namespace

TEST_CASE("average degree and greedy extension") {
  CHECK(average_degree(10, 0) == 1);
  CHECK(average_degree(10, 12) == 3);
  CHECK(average_degree(256, 2048) == 16);
  std::vector<char> matched(4, 0);
  auto m = greedy_extend({{0, 1, 1}, {1, 2, 1}, {2, 3, 1}}, matched);
  CHECK(m == std::vector<Edge>{{0, 1, 1}, {2, 3, 1}});
  CHECK(post_phase1_rounds(2) == 9);
}

TEST_CASE("matching on small inputs") {
  SimGraph empty;
  empty.n = 6;
  Cluster c0(cfg_for(empty, 1));
  CHECK(maximal_matching(c0, empty).matching.empty());

  SimGraph perfect;
  perfect.n = 40;
  for (Vertex v = 0; v < 40; v += 2) perfect.edges.push_back({v, v + 1, 1});
  Cluster c1(cfg_for(perfect, 1));
  auto r1 = maximal_matching(c1, perfect);
  CHECK(r1.high.empty());
  CHECK(r1.phase1.size() == 20);
  CHECK(r1.matching.size() == 20);

  SimGraph kb;
  kb.n = 16;
  for (Vertex a = 0; a < 8; ++a)
    for (Vertex b = 8; b < 16; ++b) kb.edges.push_back({a, b, 1});
  Cluster c2(cfg_for(kb, 2));
  auto r2 = maximal_matching(c2, kb);
  CHECK(r2.matching.size() == 8);
  check_maximal(kb, r2.matching);

  // a maximal matching of C9 has 3 or 4 edges
  auto c9 = cycle_graph(9);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Cluster c3(cfg_for(c9, seed, 8.0));
    auto r3 = maximal_matching(c3, c9);
    check_maximal(c9, r3.matching);
    CHECK(r3.matching.size() >= 3);
    CHECK(r3.matching.size() <= 4);
  }
}

TEST_CASE("phase 1 is maximal on the low-degree part") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto g = gnm(256, 2048, seed);
    Cluster c(cfg_for(g, seed));
    auto r = maximal_matching(c, g);
    auto deg = degrees(g);
    std::vector<char> in_m1(g.n, 0);
    for (const auto& e : r.phase1) in_m1[e.u] = in_m1[e.v] = 1;
    const auto d2 = r.d * r.d;
    for (const auto& e : g.edges)
      if (deg[e.u] <= d2 && deg[e.v] <= d2) CHECK((in_m1[e.u] || in_m1[e.v]));
    check_maximal(g, r.matching);
    CHECK(c.violations().empty());
  }
}

TEST_CASE("a single hub is matched once in phase 2") {
  auto g = star_graph(41);
  Cluster c(cfg_for(g, 3));
  auto r = maximal_matching(c, g);
  CHECK(r.high == std::vector<Vertex>{0});
  CHECK(r.m1 == 0);
  CHECK(r.m2 == 1);
  CHECK(r.m3 == 0);
  check_maximal(g, r.matching);
}

TEST_CASE("planted hubs") {
  std::set<std::uint64_t> post;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto g = with_hubs(300, 600, 3, seed);
    Cluster c(cfg_for(g, seed));
    auto r = maximal_matching(c, g);
    check_maximal(g, r.matching);
    CHECK(r.high.size() >= 3);
    CHECK(r.high.size() <= g.n / r.d);
    CHECK(r.residual <= 2 * g.n);
    CHECK(r.collected_words <= 8 * g.n * ceil_log2(g.n));
    CHECK(r.m1 + r.m2 + r.m3 == r.matching.size());
    post.insert(r.post_rounds);
  }
  CHECK(post.size() == 1);
}

TEST_CASE("matching on random graphs") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    auto g = seed % 2 ? gnp(200 + 20 * seed, 0.03, seed) : gnm(120, 1500, seed);
    Cluster c(cfg_for(g, seed));
    auto r = maximal_matching(c, g);
    check_maximal(g, r.matching);
    CHECK(r.residual <= 2 * g.n);
    CHECK(r.attempts == 1);
  }
}

TEST_CASE("superlinear matching") {
  auto g = complete_graph(64);
  auto cfg = cfg_for(g, 1);
  cfg.superlinear = Rational{1, 2};
  Cluster c(cfg);
  auto r = matching_superlinear(c, g);
  CHECK(r.depth == 1);
  check_maximal(g, r.matching);

  auto dense = gnm(256, 16384, 4);
  auto cfg2 = cfg_for(dense, 4);
  cfg2.superlinear = Rational{1, 2};
  Cluster c2(cfg2);
  Options opt;
  opt.super_c = 1.0;
  auto r2 = matching_superlinear(c2, dense, opt);
  CHECK(r2.depth == 2);
  CHECK(r2.level_edges[0] == 16384);
  check_maximal(dense, r2.matching);

  Cluster plain(cfg_for(g, 1));
  CHECK_THROWS_AS(matching_superlinear(plain, g), ConfigError);
}
