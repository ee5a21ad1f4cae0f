#include "hetmpc/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "hetmpc/errors.hpp"

namespace hetmpc {

namespace {

// Next non-empty line with comments stripped; false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

std::vector<long long> parse_ints(const std::string& line, std::size_t lineno) {
  std::istringstream ss(line);
  std::vector<long long> out;
  std::string tok;
  while (ss >> tok) {
    std::size_t pos = 0;
    long long x = 0;
    try {
      x = std::stoll(tok, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, "expected an integer, got '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError(lineno, "expected an integer, got '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace

SimGraph parse_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!next_line(in, line, lineno)) throw ParseError(lineno, "missing header 'n m [w]'");
  // the weight flag is 'w'; a nonzero integer is accepted too
  bool flag = false;
  {
    std::istringstream ss(line);
    std::string a, b, c, extra;
    ss >> a >> b >> c >> extra;
    if (!extra.empty()) throw ParseError(lineno, "header must be 'n m [w]'");
    if (c == "w" || c == "W") {
      flag = true;
      line = a + " " + b;
    }
  }
  auto head = parse_ints(line, lineno);
  if (head.size() < 2 || head.size() > 3) throw ParseError(lineno, "header must be 'n m [w]'");
  if (head[0] < 0 || head[1] < 0) throw ParseError(lineno, "negative n or m");
  SimGraph g;
  g.n = static_cast<std::uint64_t>(head[0]);
  g.weighted = flag || (head.size() == 3 && head[2] != 0);
  auto m = static_cast<std::uint64_t>(head[1]);
  g.edges.reserve(m);
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!next_line(in, line, lineno))
      throw ParseError(lineno, "expected " + std::to_string(m) + " edges, got " + std::to_string(i));
    auto f = parse_ints(line, lineno);
    if (f.size() != (g.weighted ? 3u : 2u))
      throw ParseError(lineno, g.weighted ? "edge line must be 'u v w'" : "edge line must be 'u v'");
    Edge e{f[0], f[1], f.size() == 3 ? f[2] : 1};
    if (e.u < 0 || e.v < 0 || static_cast<std::uint64_t>(e.u) >= g.n || static_cast<std::uint64_t>(e.v) >= g.n)
      throw ParseError(lineno, "endpoint out of range [0, " + std::to_string(g.n) + ")");
    if (e.u == e.v) throw ParseError(lineno, "self-loop on vertex " + std::to_string(e.u));
    e = normalized(e);
    auto code = static_cast<std::uint64_t>(e.u) * g.n + static_cast<std::uint64_t>(e.v);
    if (!seen.insert(code).second)
      throw ParseError(lineno, "parallel edge " + std::to_string(e.u) + " " + std::to_string(e.v));
    g.edges.push_back(e);
  }
  if (next_line(in, line, lineno)) throw ParseError(lineno, "more edge lines than the header declares");
  return g;
}

SimGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  return parse_graph(in);
}

void write_graph(std::ostream& out, const SimGraph& g) {
  out << g.n << ' ' << g.edges.size();
  if (g.weighted) out << " w";
  out << '\n';
  for (const auto& e : g.edges) {
    out << e.u << ' ' << e.v;
    if (g.weighted) out << ' ' << e.w;
    out << '\n';
  }
}

void validate_simple(SimGraph& g) {
  std::unordered_set<std::uint64_t> seen;
  for (auto& e : g.edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::uint64_t>(e.u) >= g.n || static_cast<std::uint64_t>(e.v) >= g.n)
      throw ConfigError("edge endpoint out of range");
    if (e.u == e.v) throw ConfigError("self-loop on vertex " + std::to_string(e.u));
    e = normalized(e);
    if (!seen.insert(static_cast<std::uint64_t>(e.u) * g.n + static_cast<std::uint64_t>(e.v)).second)
      throw ConfigError("parallel edge " + std::to_string(e.u) + " " + std::to_string(e.v));
  }
}

std::vector<std::uint64_t> degrees(const SimGraph& g) {
  std::vector<std::uint64_t> d(g.n, 0);
  for (const auto& e : g.edges) {
    ++d[e.u];
    ++d[e.v];
  }
  return d;
}

PlacementKind parse_placement(const std::string& s) {
  if (s == "round-robin" || s == "roundrobin") return PlacementKind::RoundRobin;
  if (s == "seeded" || s == "random") return PlacementKind::Seeded;
  if (s == "adversarial") return PlacementKind::Adversarial;
  throw ConfigError("unknown placement '" + s + "'");
}

Shards<Edge> distribute_edges(Cluster& cluster, const SimGraph& g, const Placement& placement) {
  const std::uint32_t k = cluster.small_count();
  Shards<Edge> shards(k);
  const auto m = g.edges.size();
  switch (placement.kind) {
    case PlacementKind::RoundRobin:
      for (std::size_t i = 0; i < m; ++i) shards[i % k].push_back(normalized(g.edges[i]));
      break;
    case PlacementKind::Seeded: {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(substream_seed(placement.seed, 0, ~0ULL, 7));
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i < m; ++i) shards[i % k].push_back(normalized(g.edges[order[i]]));
      break;
    }
    case PlacementKind::Adversarial: {
      std::uint64_t cap = placement.shard_size ? placement.shard_size : (m + k - 1) / k;
      if (cap == 0) cap = 1;
      for (std::size_t i = 0; i < m; ++i) {
        auto slot = i / cap;
        if (slot >= k) throw CapacityError("adversarial shard size " + std::to_string(cap) + " leaves edges unplaced");
        shards[slot].push_back(normalized(g.edges[i]));
      }
      break;
    }
  }
  for (std::uint32_t i = 0; i < k; ++i) {
    auto words = 3 * shards[i].size();
    if (words > cluster.small_budget())
      throw CapacityError("shard of " + std::to_string(shards[i].size()) + " edges (" + std::to_string(words) +
                          " words) exceeds small budget " + std::to_string(cluster.small_budget()));
    cluster.set_resident(MachineId::small(i + 1), words);
  }
  return shards;
}

ClusterConfig config_for(const SimGraph& g, double gamma, double polylog_c, int polylog_e, std::uint64_t seed) {
  ClusterConfig c;
  c.n = g.n;
  c.m = std::max<std::uint64_t>(1, g.m());
  c.gamma = gamma;
  c.polylog_c = polylog_c;
  c.polylog_e = polylog_e;
  c.seed = seed;
  return c;
}

}  // namespace hetmpc
