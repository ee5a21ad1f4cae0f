#include "verify.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

namespace hetmpc::verify {

namespace {

struct UnionFind {
  std::vector<std::uint64_t> p;
  explicit UnionFind(std::uint64_t n) : p(n) { std::iota(p.begin(), p.end(), std::uint64_t{0}); }
  std::uint64_t find(std::uint64_t x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  bool join(std::uint64_t a, std::uint64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

using Adj = std::vector<std::vector<Vertex>>;

Adj adjacency(std::uint64_t n, const std::vector<Edge>& es) {
  Adj adj(n);
  for (const auto& e : es) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

std::set<std::pair<Vertex, Vertex>> edge_set(const std::vector<Edge>& es) {
  std::set<std::pair<Vertex, Vertex>> s;
  for (const auto& e : es) s.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
  return s;
}

}  // namespace

std::vector<Edge> kruskal(const SimGraph& g) {
  auto es = g.edges;
  auto key = [](const Edge& e) { return std::make_tuple(e.w, std::min(e.u, e.v), std::max(e.u, e.v)); };
  std::sort(es.begin(), es.end(), [&](const Edge& a, const Edge& b) { return key(a) < key(b); });
  UnionFind uf(g.n);
  std::vector<Edge> out;
  for (const auto& e : es)
    if (uf.join(e.u, e.v)) out.push_back(normalized(e));
  return out;
}

std::vector<Vertex> components(std::uint64_t n, const std::vector<Edge>& edges) {
  UnionFind uf(n);
  for (const auto& e : edges) uf.join(e.u, e.v);
  std::vector<Vertex> label(n);
  for (std::uint64_t v = 0; v < n; ++v) label[v] = static_cast<Vertex>(uf.find(v));
  return label;
}

std::int64_t max_stretch(const SimGraph& g, const std::vector<Edge>& h) {
  auto adj = adjacency(g.n, h);
  auto gadj = adjacency(g.n, g.edges);
  std::int64_t worst = 0;
  std::vector<std::int64_t> dist(g.n, -1);
  for (std::uint64_t s = 0; s < g.n; ++s) {
    if (gadj[s].empty()) continue;
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<Vertex> q;
    dist[s] = 0;
    q.push(static_cast<Vertex>(s));
    while (!q.empty()) {
      auto x = q.front();
      q.pop();
      for (auto y : adj[x])
        if (dist[y] < 0) {
          dist[y] = dist[x] + 1;
          q.push(y);
        }
    }
    for (auto t : gadj[s]) {
      if (dist[t] < 0) return -1;
      worst = std::max(worst, dist[t]);
    }
  }
  return worst;
}

Check mst(const SimGraph& g, const std::vector<Edge>& forest) {
  auto ref = kruskal(g);
  auto got = forest;
  for (auto& e : got) e = normalized(e);
  std::sort(got.begin(), got.end(), lighter);
  std::sort(ref.begin(), ref.end(), lighter);
  if (got == ref) return {true, "equals Kruskal"};
  std::uint64_t wr = 0, wg = 0;
  for (const auto& e : ref) wr += static_cast<std::uint64_t>(e.w);
  for (const auto& e : got) wg += static_cast<std::uint64_t>(e.w);
  return {false, "differs from Kruskal: " + std::to_string(got.size()) + " edges weight " + std::to_string(wg) +
                     " vs " + std::to_string(ref.size()) + " edges weight " + std::to_string(wr)};
}

Check spanner(const SimGraph& g, const std::vector<Edge>& h, std::int64_t bound) {
  auto es = edge_set(g.edges);
  for (const auto& e : h)
    if (!es.count({std::min(e.u, e.v), std::max(e.u, e.v)})) return {false, "edge not in graph"};
  auto s = max_stretch(g, h);
  if (s < 0) return {false, "spanner disconnects an edge"};
  return {s <= bound, "stretch " + std::to_string(s) + " bound " + std::to_string(bound)};
}

Check matching(const SimGraph& g, const std::vector<Edge>& m) {
  auto es = edge_set(g.edges);
  std::vector<char> used(g.n, 0);
  for (const auto& e : m) {
    if (!es.count({std::min(e.u, e.v), std::max(e.u, e.v)})) return {false, "edge not in graph"};
    if (used[e.u] || used[e.v]) return {false, "vertex matched twice"};
    used[e.u] = used[e.v] = 1;
  }
  for (const auto& e : g.edges)
    if (!used[e.u] && !used[e.v])
      return {false, "not maximal: " + std::to_string(e.u) + "-" + std::to_string(e.v) + " is free"};
  return {true, "maximal matching"};
}

Check components(const SimGraph& g, const std::vector<Vertex>& labels) {
  auto ref = components(g.n, g.edges);
  if (labels == ref) return {true, "equals union-find"};
  std::uint64_t bad = 0;
  for (std::uint64_t v = 0; v < g.n && v < labels.size(); ++v) bad += labels[v] != ref[v];
  return {false, std::to_string(bad) + " labels differ from union-find"};
}

}  // namespace hetmpc::verify
