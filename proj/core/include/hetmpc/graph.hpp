#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetmpc/cluster.hpp"
#include "hetmpc/types.hpp"

namespace hetmpc {

struct SimGraph {
  std::uint64_t n = 0;
  std::vector<Edge> edges;  // normalized, u < v
  bool weighted = false;

  std::uint64_t m() const { return edges.size(); }
};

// Text format: header "n m [w]" then m lines "u v [w]", 0-indexed, '#' starts a comment.
SimGraph parse_graph(std::istream& in);
SimGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const SimGraph& g);

// Rejects self-loops, parallel edges and out-of-range endpoints; normalizes u < v.
void validate_simple(SimGraph& g);

std::vector<std::uint64_t> degrees(const SimGraph& g);

enum class PlacementKind : std::uint8_t { RoundRobin, Seeded, Adversarial };

struct Placement {
  PlacementKind kind = PlacementKind::Seeded;
  std::uint64_t seed = 0;
  std::uint64_t shard_size = 0;  // Adversarial only; 0 means ceil(m / K)
};

PlacementKind parse_placement(const std::string& s);

// Per-small-machine storage: shards[i] lives on small machine i + 1.
template <class T>
using Shards = std::vector<std::vector<T>>;

// Places the edges on the small machines (3 words per edge) and records the
// resident state. Throws CapacityError if a shard exceeds a small budget.
Shards<Edge> distribute_edges(Cluster& cluster, const SimGraph& g, const Placement& placement);

ClusterConfig config_for(const SimGraph& g, double gamma, double polylog_c, int polylog_e, std::uint64_t seed);

}  // namespace hetmpc
