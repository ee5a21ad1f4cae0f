#pragma once

#include <compare>
#include <cstdint>
#include <tuple>
#include <utility>
#include <vector>

namespace hetmpc {

using Word = std::int64_t;
using Payload = std::vector<Word>;
using Vertex = std::int64_t;
using Weight = std::int64_t;

constexpr Vertex kNoVertex = -1;

// Undirected edge, stored with u < v after normalization.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  Weight w = 1;

  friend bool operator==(const Edge&, const Edge&) = default;
};

inline Edge normalized(Edge e) {
  if (e.u > e.v) std::swap(e.u, e.v);
  return e;
}

// Total order used everywhere an edge weight is compared: (w, min, max).
struct EdgeKey {
  Weight w;
  Vertex a;
  Vertex b;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

inline EdgeKey edge_key(Weight w, Vertex x, Vertex y) { return x < y ? EdgeKey{w, x, y} : EdgeKey{w, y, x}; }
inline EdgeKey edge_key(const Edge& e) { return edge_key(e.w, e.u, e.v); }

inline bool lighter(const Edge& a, const Edge& b) { return edge_key(a) < edge_key(b); }

// Sort key for an unordered vertex pair.
inline std::pair<Vertex, Vertex> pair_key(Vertex x, Vertex y) { return x < y ? std::pair{x, y} : std::pair{y, x}; }

}  // namespace hetmpc
