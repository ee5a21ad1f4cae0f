#pragma once

#include <cstdint>
#include <vector>

#include "hetmpc/cluster.hpp"
#include "hetmpc/graph.hpp"

namespace hetmpc::matching {

struct Options {
  Placement placement;
  std::uint64_t max_iterations = 0;  // phase 1 cap; 0 means 16 ceil(log2 n) + 16
  double super_c = 4.0;              // stop when |E| <= super_c * n^(1+f)
};

struct Result {
  std::vector<Edge> matching;  // normalized, sorted by (u, v)
  std::vector<Edge> phase1;    // M1
  std::vector<Vertex> high;    // V_high
  std::uint64_t d = 0;
  std::uint64_t m1 = 0;
  std::uint64_t m2 = 0;
  std::uint64_t m3 = 0;
  std::uint64_t residual = 0;         // |E''|
  std::uint64_t collected_words = 0;  // phase 2 traffic to the large machine
  std::uint64_t rank_collisions = 0;
  std::uint64_t phase1_iterations = 0;
  std::uint64_t setup_rounds = 0;
  std::uint64_t phase1_rounds = 0;
  std::uint64_t post_rounds = 0;
  std::uint64_t attempts = 0;
  std::uint64_t rounds = 0;
};

// max(1, ceil(2m / n))
std::uint64_t average_degree(std::uint64_t n, std::uint64_t m);

// Greedy maximal extension in the given edge order; `matched` is updated.
std::vector<Edge> greedy_extend(const std::vector<Edge>& edges, std::vector<char>& matched);

// Rounds of phases 2 and 3 for a tree depth D: 7 + D.
std::uint64_t post_phase1_rounds(std::uint64_t depth);

Result maximal_matching(Cluster& cluster, const SimGraph& g, const Options& opt = {});

struct SuperResult {
  std::vector<Edge> matching;
  std::uint64_t depth = 0;
  std::vector<std::uint64_t> level_edges;  // |E| at every recursion level
  std::uint64_t attempts = 0;
  std::uint64_t rounds = 0;
};

// Filtering recursion; needs a cluster config with exponent f.
SuperResult matching_superlinear(Cluster& cluster, const SimGraph& g, const Options& opt = {});

}  // namespace hetmpc::matching
