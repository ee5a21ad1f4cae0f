#pragma once

#include <cstdint>
#include <vector>

#include "hetmpc/cluster.hpp"
#include "hetmpc/codec.hpp"
#include "hetmpc/graph.hpp"

namespace hetmpc::mst {

// Edge of the contracted graph between supervertices u and v, carrying the
// original edge (ou, ov, w) it stands for. 5 words.
struct CEdge {
  Vertex u = 0;
  Vertex v = 0;
  Weight w = 0;
  Vertex ou = 0;
  Vertex ov = 0;

  EdgeKey key() const { return edge_key(w, ou, ov); }
  Edge original() const { return normalized(Edge{ou, ov, w}); }
  friend bool operator==(const CEdge&, const CEdge&) = default;
};

struct Options {
  Placement placement;
  double alpha = 4.0;             // F-light acceptance: count <= alpha * n' / p
  std::uint64_t repetitions = 0;  // 0 means ceil(2 log2 n)
};

struct StepStats {
  std::uint64_t select_count = 0;
  std::uint64_t vertices_before = 0;
  std::uint64_t vertices_after = 0;
  std::uint64_t edges_after = 0;
  std::uint64_t merge_edges = 0;
  std::uint64_t rounds = 0;
};

struct Result {
  std::vector<Edge> forest;  // original edges, sorted by (w, u, v)
  std::uint64_t boruvka_steps = 0;
  std::vector<StepStats> steps;
  double p = 1.0;
  std::uint64_t repetitions = 0;
  std::uint64_t successful_repetition = 0;
  std::uint64_t sample_edges = 0;
  std::uint64_t light_edges = 0;
  double light_bound = 0.0;
  std::uint64_t rounds = 0;
  std::uint64_t total_weight() const;
};

// Contraction state: contracted edges on the small machines, the forest
// found so far on the large machine.
struct ContractionState {
  std::uint64_t n = 0;
  Shards<CEdge> edges;
  std::vector<Edge> forest;
  std::uint64_t supervertices = 0;
};

std::uint64_t boruvka_step_count(const ClusterConfig& cfg);
std::uint64_t select_count(const ClusterConfig& cfg, std::uint64_t step);
double sample_probability(const ClusterConfig& cfg, std::uint64_t steps);

ContractionState initial_state(Cluster& cluster, const SimGraph& g, const Placement& placement);

// One Borůvka step with select count s: collect up to s lightest edges per
// supervertex, merge on the large machine, relabel and drop internal and
// parallel edges on the small machines.
StepStats boruvka_step(Cluster& cluster, ContractionState& state, std::uint64_t s);

// Rounds one Borůvka step takes; independent of the data.
std::uint64_t boruvka_step_rounds(const Cluster& cluster);

// Minimum spanning forest. Uses the superlinear schedule when the cluster
// config has an exponent f.
Result mst(Cluster& cluster, const SimGraph& g, const Options& opt = {});

// Plain Kruskal on the large machine's local data, by (w, ou, ov).
std::vector<CEdge> local_msf(std::uint64_t n, std::vector<CEdge> edges);

}  // namespace hetmpc::mst

namespace hetmpc {
template <>
struct Codec<mst::CEdge> {
  static void put(Payload& out, const mst::CEdge& e) { out.insert(out.end(), {e.u, e.v, e.w, e.ou, e.ov}); }
  static mst::CEdge get(Reader& in) {
    mst::CEdge e;
    e.u = in.next();
    e.v = in.next();
    e.w = in.next();
    e.ou = in.next();
    e.ov = in.next();
    return e;
  }
};
}  // namespace hetmpc
