#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetmpc/graph.hpp"

namespace hetmpc::verify {

struct Check {
  bool passed = true;
  std::string detail;
};

// Kruskal forest with (w, min, max) tie order.
std::vector<Edge> kruskal(const SimGraph& g);

// Component label = smallest member.
std::vector<Vertex> components(std::uint64_t n, const std::vector<Edge>& edges);

// Max over edges of g of the BFS distance in h; -1 if some edge is cut in h.
std::int64_t max_stretch(const SimGraph& g, const std::vector<Edge>& h);

Check mst(const SimGraph& g, const std::vector<Edge>& forest);
Check spanner(const SimGraph& g, const std::vector<Edge>& h, std::int64_t bound);
Check matching(const SimGraph& g, const std::vector<Edge>& m);
Check components(const SimGraph& g, const std::vector<Vertex>& labels);

}  // namespace hetmpc::verify
