#include <cmath>
#include <set>

#include "doctest.h"
#include "hetmpc/errors.hpp"
#include "hetmpc/generators.hpp"
#include "hetmpc/spanner.hpp"
#include "oracles.hpp"

using namespace hetmpc;
using namespace hetmpc::spanner;

namespace {

Shards<Link> plain_links(Cluster& c, const SimGraph& g) {
  auto shards = distribute_edges(c, g, {});
  Shards<Link> out(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i)
    for (const auto& e : shards[i]) {
      auto w = normalized(e);
      out[i].push_back(Link{0, w.u, w.v, w.u, w.v});
    }
  return out;
}

std::vector<Vertex> all_vertices(std::uint64_t n) {
  std::vector<Vertex> v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = Vertex(i);
  return v;
}

std::vector<Edge> witnesses(const std::vector<Link>& ls) {
  std::vector<Edge> out;
  for (const auto& l : ls) out.push_back(l.witness());
  return out;
}

}  // namespace

TEST_CASE("size claim over a grid") {
  for (double l = 1; l <= 1e6; l *= 1.7)
    for (double x = 1.001; x <= 1e4; x *= 1.9) CHECK(size_claim_holds(l, x));
  CHECK(size_claim_holds(1e4, 1e4));
}

TEST_CASE("level probabilities") {
  CHECK(level_probability(2, 0) == 1.0);
  CHECK(level_probability(2, 1) == 1.0);
  CHECK(level_probability(2, 5) == 1.0);
  CHECK(level_probability(2, 6) == doctest::Approx(4 * std::pow(6.0, 1.5) / 64));
  CHECK(level_probability(1, 4) == doctest::Approx(16.0 / 16));
  CHECK(level_probability(1, 5) == doctest::Approx(25.0 / 32));
}

TEST_CASE("clustering graphs cover every edge") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto g = seed == 1 ? star_graph(9) : gnp(96, 0.12, seed);
    Cluster c(config_for(g, 0.5, 4.0, 3, seed));
    auto shards = distribute_edges(c, g, {});
    auto d = clustering_graphs(c, shards, g.n);
    std::set<std::tuple<Word, Vertex, Vertex>> links;
    for (std::uint32_t i = 0; i < d.levels; ++i)
      for (const auto& l : d.level_links(i)) links.insert({l.level, l.c, l.d});
    std::set<std::pair<Vertex, Vertex>> stars;
    for (const auto& e : d.stars) stars.insert({e.u, e.v});
    for (std::uint64_t v = 0; v < g.n; ++v) {
      auto s = d.sigma[v];
      if (s != Vertex(v)) CHECK(stars.count({std::min<Vertex>(v, s), std::max<Vertex>(v, s)}));
    }
    for (const auto& e : g.edges) {
      auto a = d.sigma[e.u], b = d.sigma[e.v];
      if (a == b) continue;
      auto mn = std::min(d.degree[e.u], d.degree[e.v]);
      Word level = std::min<Word>(d.levels - 1, Word(std::floor(std::log2(double(mn)))));
      CHECK(links.count({level, std::min(a, b), std::max(a, b)}));
    }
    if (seed == 1) {
      CHECK(d.delta == 8);
      for (Vertex v = 1; v <= 8; ++v) CHECK((d.sigma[v] == v || d.sigma[v] == 0));
    }
  }
}

TEST_CASE("clustering graph sizes stay within the measured constants") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto g = gnp(256, 0.1, seed);
    Cluster c(config_for(g, 0.5, 2.0, 3, seed));
    auto d = clustering_graphs(c, distribute_edges(c, g, {}), g.n);
    for (std::uint32_t i = 0; i < d.levels; ++i) {
      CHECK(d.level_links(i).size() <= 8 * g.n * (std::uint64_t{1} << i));
      CHECK(double(d.vertices[i].size()) <= 8.0 * g.n * std::max(1u, i) / std::ldexp(1.0, int(i)));
    }
    CHECK(d.vertices[0].size() == g.n);
  }
}

TEST_CASE("modified Baswana-Sen with p = 1 and with k = 1") {
  auto g = gnp(64, 0.15, 7);
  Cluster c(config_for(g, 0.5, 4.0, 3, 2));
  auto links = plain_links(c, g);
  auto r = modified_baswana_sen(c, links, all_vertices(64), 2, 1.0);
  auto h = witnesses(r.edges);
  CHECK(oracle::is_subgraph(g, h));
  auto s = oracle::max_edge_stretch(g, h);
  CHECK(s >= 1);
  CHECK(s <= 3);
  for (std::size_t v = 0; v < 64; ++v) {
    CHECK(r.history[v].size() == r.removed_at[v]);
    CHECK(r.history[v][0] == Vertex(v));
  }
  CHECK(r.rounds == baswana_sen_rounds(c));

  Cluster c1(config_for(g, 0.5, 4.0, 3, 3));
  auto r1 = modified_baswana_sen(c1, plain_links(c1, g), all_vertices(64), 1, 1.0);
  CHECK(r1.edges.size() == g.edges.size());
  for (auto t : r1.removed_at) CHECK(t == 1);
}

TEST_CASE("modified Baswana-Sen with sub-sampling") {
  const std::uint64_t n = 512;
  double total = 0;
  const int seeds = 5;
  for (int seed = 1; seed <= seeds; ++seed) {
    auto g = gnm(n, 8000, seed);
    Cluster c(config_for(g, 0.5, 4.0, 3, seed));
    auto r = modified_baswana_sen(c, plain_links(c, g), all_vertices(n), 3, 0.25);
    auto h = witnesses(r.edges);
    auto s = oracle::max_edge_stretch(g, h);
    CHECK(s >= 1);
    CHECK(s <= 5);
    total += double(h.size());
  }
  CHECK(total / seeds <= 8.0 * 3 * std::pow(double(n), 4.0 / 3) / 0.25);
}

TEST_CASE("greedy spanner and combine") {
  auto g = gnp(60, 0.2, 4);
  std::vector<Link> a;
  for (const auto& e : g.edges) a.push_back(Link{0, e.u, e.v, e.u, e.v});
  for (std::uint32_t k = 1; k <= 3; ++k) {
    auto h = witnesses(greedy_spanner(a, k));
    auto s = oracle::max_edge_stretch(g, h);
    CHECK(s <= Word(2 * k - 1));
    if (k == 1) CHECK(h.size() == g.edges.size());
  }

  Decomposition d;
  d.sigma = {0, 0, 2, 2};
  d.stars = {{0, 1, 1}, {2, 3, 1}};
  CHECK(combine_spanners(d, {{Link{1, 0, 2, 1, 3}}}).size() == 3);
  CHECK_THROWS_AS(combine_spanners(d, {{Link{1, 0, 2, 0, 1}}}), std::logic_error);
}

TEST_CASE("spanner of trees and stars is the whole graph") {
  auto star = star_graph(9);
  Cluster c(config_for(star, 0.5, 8.0, 3, 1));
  CHECK(spanner::spanner(c, star, 2).edges == star.edges);

  SimGraph tree = path_graph(50);
  for (Vertex v = 50; v < 80; ++v) tree.edges.push_back({v % 37, v, 1});
  tree.n = 80;
  Cluster c2(config_for(tree, 0.5, 8.0, 3, 1));
  auto h = spanner::spanner(c2, tree, 3).edges;
  auto sorted = tree.edges;
  for (auto& e : sorted) e = normalized(e);
  std::sort(sorted.begin(), sorted.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  CHECK(h == sorted);
}

TEST_CASE("spanner stretch and size on random graphs") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto g = gnp(128, 0.1, seed);
    Cluster c(config_for(g, 0.5, 4.0, 3, seed));
    auto r = spanner::spanner(c, g, 2);
    CHECK(oracle::is_subgraph(g, r.edges));
    auto s = oracle::max_edge_stretch(g, r.edges);
    CHECK(s >= 1);
    CHECK(s <= 11);
  }
  auto g = gnm(256, 8192, 5);
  Cluster c(config_for(g, 0.5, 4.0, 3, 5));
  auto r = spanner::spanner(c, g, 8);
  auto s = oracle::max_edge_stretch(g, r.edges);
  CHECK(s >= 1);
  CHECK(s <= 6 * 8 - 1);
  CHECK(r.edges.size() <= g.edges.size());
  CHECK_THROWS_AS(spanner::spanner(c, g, 9), ConfigError);
}

TEST_CASE("spanner round count depends only on gamma") {
  std::set<std::uint64_t> rounds;
  for (std::uint64_t n : {64u, 200u, 512u}) {
    auto g = gnm(n, 12 * n, n);
    Cluster c(config_for(g, 0.5, 4.0, 3, 1));
    rounds.insert(spanner::spanner(c, g, 2).rounds);
  }
  auto dense = gnp(200, 0.6, 3);
  Cluster c(config_for(dense, 0.5, 4.0, 3, 1));
  rounds.insert(spanner::spanner(c, dense, 2).rounds);
  CHECK(rounds.size() == 1);
}

TEST_CASE("spanner with sub-sampled levels") {
  auto g = gnp(256, 0.5, 11);
  Cluster c(config_for(g, 0.5, 4.0, 3, 11));
  auto r = spanner::spanner(c, g, 2);
  bool sampled = false;
  for (const auto& l : r.levels) sampled = sampled || !l.whole;
  CHECK(sampled);
  auto s = oracle::max_edge_stretch(g, r.edges);
  CHECK(s >= 1);
  CHECK(s <= 11);
  CHECK(r.edges.size() <= 16.0 * std::pow(256.0, 1.5));
  MESSAGE("edges " << r.edges.size() << " of " << g.edges.size() << ", violations " << c.violations().size()
                   << ", rounds " << r.rounds);
  for (const auto& l : r.levels)
    MESSAGE("level " << l.level << " p " << l.p << " whole " << l.whole << " V " << l.vertices << " E " << l.links
                     << " H " << l.spanner_links);
}
