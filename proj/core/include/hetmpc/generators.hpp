#pragma once

#include <cstdint>
#include <string>

#include "hetmpc/graph.hpp"

namespace hetmpc {

struct GenSpec {
  std::string kind = "gnm";  // gnp, gnm, two-cycles, cycle, path, grid, star, complete
  std::uint64_t n = 0;
  std::uint64_t m = 0;     // gnm
  double p = 0.0;          // gnp
  std::uint64_t rows = 0;  // grid; 0 means square-ish
  bool weighted = false;
  std::uint64_t wmax = 0;  // weights uniform in [1, wmax]; 0 means n^3
  std::uint64_t seed = 1;
};

SimGraph generate(const GenSpec& spec);

SimGraph gnm(std::uint64_t n, std::uint64_t m, std::uint64_t seed);
SimGraph gnp(std::uint64_t n, double p, std::uint64_t seed);
SimGraph cycle_graph(std::uint64_t n);
SimGraph path_graph(std::uint64_t n);
// Two disjoint cycles of n/2 vertices each.
SimGraph two_cycles(std::uint64_t n);
SimGraph grid_graph(std::uint64_t rows, std::uint64_t cols);
SimGraph star_graph(std::uint64_t n);
SimGraph complete_graph(std::uint64_t n);

void assign_weights(SimGraph& g, std::uint64_t wmax, std::uint64_t seed);

}  // namespace hetmpc
