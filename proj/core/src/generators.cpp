#include "hetmpc/generators.hpp"

#include <cmath>
#include <random>
#include <unordered_set>

#include "hetmpc/errors.hpp"

namespace hetmpc {

SimGraph gnm(std::uint64_t n, std::uint64_t m, std::uint64_t seed) {
  if (n < 2) throw ConfigError("gnm needs n >= 2");
  const std::uint64_t maxm = n * (n - 1) / 2;
  if (m > maxm) throw ConfigError("gnm: m = " + std::to_string(m) + " exceeds n(n-1)/2 = " + std::to_string(maxm));
  SimGraph g;
  g.n = n;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
  if (m * 2 > maxm) {
    // dense: shuffle all pairs
    std::vector<Edge> all;
    all.reserve(maxm);
    for (std::uint64_t u = 0; u < n; ++u)
      for (std::uint64_t v = u + 1; v < n; ++v) all.push_back({Vertex(u), Vertex(v), 1});
    for (std::uint64_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::uint64_t> j(i, all.size() - 1);
      std::swap(all[i], all[j(rng)]);
    }
    all.resize(m);
    g.edges = std::move(all);
    return g;
  }
  std::unordered_set<std::uint64_t> seen;
  while (g.edges.size() < m) {
    auto a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert(a * n + b).second) g.edges.push_back({Vertex(a), Vertex(b), 1});
  }
  return g;
}

SimGraph gnp(std::uint64_t n, double p, std::uint64_t seed) {
  if (n < 2) throw ConfigError("gnp needs n >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("gnp: p must lie in [0, 1]");
  SimGraph g;
  g.n = n;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  for (std::uint64_t u = 0; u < n; ++u)
    for (std::uint64_t v = u + 1; v < n; ++v)
      if (coin(rng)) g.edges.push_back({Vertex(u), Vertex(v), 1});
  return g;
}

SimGraph cycle_graph(std::uint64_t n) {
  if (n < 3) throw ConfigError("cycle needs n >= 3");
  SimGraph g;
  g.n = n;
  for (std::uint64_t i = 0; i < n; ++i) g.edges.push_back(normalized({Vertex(i), Vertex((i + 1) % n), 1}));
  return g;
}

SimGraph path_graph(std::uint64_t n) {
  if (n < 2) throw ConfigError("path needs n >= 2");
  SimGraph g;
  g.n = n;
  for (std::uint64_t i = 0; i + 1 < n; ++i) g.edges.push_back({Vertex(i), Vertex(i + 1), 1});
  return g;
}

SimGraph two_cycles(std::uint64_t n) {
  if (n < 6 || n % 2) throw ConfigError("two-cycles needs an even n >= 6");
  SimGraph g;
  g.n = n;
  const auto h = n / 2;
  for (std::uint64_t c = 0; c < 2; ++c)
    for (std::uint64_t i = 0; i < h; ++i)
      g.edges.push_back(normalized({Vertex(c * h + i), Vertex(c * h + (i + 1) % h), 1}));
  return g;
}

SimGraph grid_graph(std::uint64_t rows, std::uint64_t cols) {
  if (rows == 0 || cols == 0 || rows * cols < 2) throw ConfigError("grid needs at least 2 vertices");
  SimGraph g;
  g.n = rows * cols;
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c) {
      auto id = Vertex(r * cols + c);
      if (c + 1 < cols) g.edges.push_back({id, id + 1, 1});
      if (r + 1 < rows) g.edges.push_back({id, id + Vertex(cols), 1});
    }
  return g;
}

SimGraph star_graph(std::uint64_t n) {
  if (n < 2) throw ConfigError("star needs n >= 2");
  SimGraph g;
  g.n = n;
  for (std::uint64_t i = 1; i < n; ++i) g.edges.push_back({0, Vertex(i), 1});
  return g;
}

SimGraph complete_graph(std::uint64_t n) {
  if (n < 2) throw ConfigError("complete needs n >= 2");
  SimGraph g;
  g.n = n;
  for (std::uint64_t u = 0; u < n; ++u)
    for (std::uint64_t v = u + 1; v < n; ++v) g.edges.push_back({Vertex(u), Vertex(v), 1});
  return g;
}

void assign_weights(SimGraph& g, std::uint64_t wmax, std::uint64_t seed) {
  if (wmax == 0) wmax = g.n * g.n * g.n;
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::uniform_int_distribution<std::uint64_t> w(1, wmax);
  for (auto& e : g.edges) e.w = static_cast<Weight>(w(rng));
  g.weighted = true;
}

SimGraph generate(const GenSpec& s) {
  SimGraph g;
  if (s.kind == "gnm") {
    g = gnm(s.n, s.m, s.seed);
  } else if (s.kind == "gnp") {
    g = gnp(s.n, s.p, s.seed);
  } else if (s.kind == "two-cycles") {
    g = two_cycles(s.n);
  } else if (s.kind == "cycle") {
    g = cycle_graph(s.n);
  } else if (s.kind == "path") {
    g = path_graph(s.n);
  } else if (s.kind == "grid") {
    auto rows = s.rows ? s.rows : static_cast<std::uint64_t>(std::sqrt(static_cast<double>(s.n)));
    if (rows == 0) rows = 1;
    g = grid_graph(rows, (s.n + rows - 1) / rows);
  } else if (s.kind == "star") {
    g = star_graph(s.n);
  } else if (s.kind == "complete") {
    g = complete_graph(s.n);
  } else {
    throw ConfigError("unknown generator '" + s.kind + "'");
  }
  if (s.weighted) assign_weights(g, s.wmax, s.seed);
  return g;
}

}  // namespace hetmpc
