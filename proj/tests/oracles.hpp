#pragma once

// Reference implementations used only by tests. Deliberately written without
// any of the library's algorithm code.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <vector>

#include "hetmpc/graph.hpp"

namespace oracle {

using hetmpc::Edge;
using hetmpc::SimGraph;

struct UnionFind {
  std::vector<std::size_t> p;
  explicit UnionFind(std::size_t n) : p(n) { std::iota(p.begin(), p.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

inline auto order_key(const Edge& e) { return std::make_tuple(e.w, std::min(e.u, e.v), std::max(e.u, e.v)); }

// Kruskal with ties broken by (w, min endpoint, max endpoint).
inline std::vector<Edge> kruskal(const SimGraph& g) {
  auto es = g.edges;
  std::sort(es.begin(), es.end(), [](const Edge& a, const Edge& b) { return order_key(a) < order_key(b); });
  UnionFind uf(g.n);
  std::vector<Edge> out;
  for (auto e : es)
    if (uf.join(e.u, e.v)) {
      if (e.u > e.v) std::swap(e.u, e.v);
      out.push_back(e);
    }
  return out;
}

inline std::uint64_t weight(const std::vector<Edge>& es) {
  std::uint64_t s = 0;
  for (const auto& e : es) s += static_cast<std::uint64_t>(e.w);
  return s;
}

inline std::vector<std::vector<std::int64_t>> adjacency(std::uint64_t n, const std::vector<Edge>& es) {
  std::vector<std::vector<std::int64_t>> adj(n);
  for (const auto& e : es) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  return adj;
}

// Component label = smallest vertex of the component, via BFS.
inline std::vector<std::int64_t> components(std::uint64_t n, const std::vector<Edge>& es) {
  auto adj = adjacency(n, es);
  std::vector<std::int64_t> comp(n, -1);
  for (std::uint64_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::queue<std::int64_t> q;
    q.push(static_cast<std::int64_t>(s));
    comp[s] = static_cast<std::int64_t>(s);
    while (!q.empty()) {
      auto x = q.front();
      q.pop();
      for (auto y : adj[x])
        if (comp[y] < 0) {
          comp[y] = static_cast<std::int64_t>(s);
          q.push(y);
        }
    }
  }
  return comp;
}

inline std::uint64_t component_count(std::uint64_t n, const std::vector<Edge>& es) {
  auto c = components(n, es);
  std::uint64_t k = 0;
  for (std::uint64_t v = 0; v < n; ++v) k += c[v] == static_cast<std::int64_t>(v);
  return k;
}

inline std::vector<std::int64_t> bfs(const std::vector<std::vector<std::int64_t>>& adj, std::int64_t s) {
  std::vector<std::int64_t> d(adj.size(), -1);
  std::queue<std::int64_t> q;
  d[s] = 0;
  q.push(s);
  while (!q.empty()) {
    auto x = q.front();
    q.pop();
    for (auto y : adj[x])
      if (d[y] < 0) {
        d[y] = d[x] + 1;
        q.push(y);
      }
  }
  return d;
}

// Max over edges (u,v) of G of dist_H(u, v); -1 if some edge is disconnected in H.
inline std::int64_t max_edge_stretch(const SimGraph& g, const std::vector<Edge>& h) {
  auto adj = adjacency(g.n, h);
  std::map<std::int64_t, std::vector<std::int64_t>> cache;
  std::int64_t worst = 0;
  for (const auto& e : g.edges) {
    auto it = cache.find(e.u);
    if (it == cache.end()) it = cache.emplace(e.u, bfs(adj, e.u)).first;
    auto d = it->second[e.v];
    if (d < 0) return -1;
    worst = std::max(worst, d);
  }
  return worst;
}

inline bool is_subgraph(const SimGraph& g, const std::vector<Edge>& h) {
  std::set<std::pair<std::int64_t, std::int64_t>> es;
  for (const auto& e : g.edges) es.insert({std::min(e.u, e.v), std::max(e.u, e.v)});
  for (const auto& e : h)
    if (!es.count({std::min(e.u, e.v), std::max(e.u, e.v)})) return false;
  return true;
}

inline bool is_matching(const SimGraph& g, const std::vector<Edge>& m) {
  if (!is_subgraph(g, m)) return false;
  std::vector<int> used(g.n, 0);
  for (const auto& e : m)
    if (used[e.u]++ || used[e.v]++) return false;
  return true;
}

inline bool is_maximal(const SimGraph& g, const std::vector<Edge>& m) {
  std::vector<int> used(g.n, 0);
  for (const auto& e : m) used[e.u] = used[e.v] = 1;
  for (const auto& e : g.edges)
    if (!used[e.u] && !used[e.v]) return false;
  return true;
}

// Max weight on the path between a and b in a forest, -1 if disconnected.
inline std::int64_t forest_path_max(std::uint64_t n, const std::vector<Edge>& forest, std::int64_t a, std::int64_t b) {
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> adj(n);
  for (const auto& e : forest) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }
  std::vector<std::int64_t> best(n, -2);
  best[a] = 0;
  std::vector<std::int64_t> stack{a};
  while (!stack.empty()) {
    auto x = stack.back();
    stack.pop_back();
    for (auto [y, w] : adj[x])
      if (best[y] == -2) {
        best[y] = std::max(best[x], w);
        stack.push_back(y);
      }
  }
  return best[b] == -2 ? -1 : best[b];
}

}  // namespace oracle
