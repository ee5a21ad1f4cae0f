#pragma once

#include <cstdint>
#include <vector>

#include "hetmpc/cluster.hpp"
#include "hetmpc/codec.hpp"
#include "hetmpc/graph.hpp"

namespace hetmpc::spanner {

// Edge (c, d) of a clustering graph between star centres, with the original
// edge (wu, wv) it stands for. 5 words.
struct Link {
  Word level = 0;
  Vertex c = 0;
  Vertex d = 0;
  Vertex wu = 0;
  Vertex wv = 0;

  Edge witness() const { return normalized(Edge{wu, wv, 1}); }
  friend auto operator<=>(const Link&, const Link&) = default;
};

struct Decomposition {
  std::uint64_t n = 0;
  std::uint64_t delta = 0;
  std::uint32_t levels = 0;
  std::vector<std::uint64_t> degree;
  std::vector<Vertex> sigma;                  // star centre of every vertex
  std::vector<std::uint32_t> level_of;        // i_u
  std::vector<Edge> stars;                    // (u, sigma_u) for sigma_u != u
  std::vector<std::vector<Vertex>> vertices;  // V_i
  std::vector<std::uint64_t> hitting_size;    // |D_i|
  Shards<Link> links;                         // E_i on the small machines, sorted and deduplicated
  std::uint64_t rounds = 0;

  std::vector<Link> level_links(std::uint32_t i) const;
};

// Clustering graphs A_i = (V_i, E_i), i < levels = max(1, ceil(log2 delta)).
Decomposition clustering_graphs(Cluster& cluster, const Shards<Edge>& shards, std::uint64_t n);

struct BsResult {
  std::vector<Link> edges;                   // chosen edges of A
  std::vector<std::vector<Vertex>> history;  // c_0(v), c_1(v), ... until removal
  std::vector<std::uint32_t> removed_at;     // level at which c(v) becomes empty
  std::uint64_t sampled = 0;                 // links shipped to the large machine
  std::uint64_t rounds = 0;
};

// (2k-1)-spanner of A given by the links on the small machines (the level
// field is ignored). `vertices` is V_A, known to the large machine.
BsResult modified_baswana_sen(Cluster& cluster, const Shards<Link>& a, const std::vector<Vertex>& vertices,
                              std::uint32_t k, double p);
std::uint64_t baswana_sen_rounds(const Cluster& cluster);

// Local greedy (2k-1)-spanner: keep an edge iff its endpoints are farther
// apart than 2k-1 in the edges kept so far.
std::vector<Link> greedy_spanner(std::vector<Link> a, std::uint32_t k);

// Stars plus the witnesses of every per-level spanner edge.
std::vector<Edge> combine_spanners(const Decomposition& d, const std::vector<std::vector<Link>>& per_level);

// min(1, k^2 i^(1+1/k) / 2^i); level 0 is always shipped whole.
double level_probability(std::uint32_t k, std::uint32_t i);

// l (1 - 1/x)^l < x
bool size_claim_holds(double l, double x);

struct LevelReport {
  std::uint32_t level = 0;
  double p = 1.0;
  bool whole = true;
  std::uint64_t vertices = 0;
  std::uint64_t links = 0;
  std::uint64_t spanner_links = 0;
};

struct Options {
  Placement placement;
};

struct Result {
  std::vector<Edge> edges;  // sorted, normalized, unit weight
  std::uint64_t stars = 0;
  std::uint64_t delta = 0;
  std::vector<LevelReport> levels;
  std::uint64_t rounds = 0;
};

Result spanner(Cluster& cluster, const SimGraph& g, std::uint32_t k, const Options& opt = {});

}  // namespace hetmpc::spanner

namespace hetmpc {
template <>
struct Codec<spanner::Link> {
  static void put(Payload& out, const spanner::Link& l) { out.insert(out.end(), {l.level, l.c, l.d, l.wu, l.wv}); }
  static spanner::Link get(Reader& in) {
    spanner::Link l;
    l.level = in.next();
    l.c = in.next();
    l.d = in.next();
    l.wu = in.next();
    l.wv = in.next();
    return l;
  }
};
}  // namespace hetmpc
