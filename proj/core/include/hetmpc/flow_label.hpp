#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hetmpc/codec.hpp"
#include "hetmpc/types.hpp"

namespace hetmpc {

// Label of a vertex in a weighted forest, built from a centroid decomposition.
// Entry i is (separator at level i, max edge weight on the path to it); the
// last entry is the vertex itself with weight 0. 2 words per entry.
struct FlowLabel {
  struct Entry {
    Vertex separator;
    Weight max_weight;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  friend bool operator==(const FlowLabel&, const FlowLabel&) = default;
  std::size_t words() const { return 2 * entries.size() + 1; }
};

template <>
struct Codec<FlowLabel> {
  static void put(Payload& out, const FlowLabel& l) {
    out.push_back(static_cast<Word>(l.entries.size()));
    for (const auto& e : l.entries) out.insert(out.end(), {e.separator, e.max_weight});
  }
  static FlowLabel get(Reader& in) {
    FlowLabel l;
    auto n = static_cast<std::size_t>(in.next());
    l.entries.resize(n);
    for (auto& e : l.entries) {
      e.separator = in.next();
      e.max_weight = in.next();
    }
    return l;
  }
};

struct DifferentComponents {};

// Labels for all vertices 0..n-1 of a forest. Centroid ties go to the smallest id.
std::vector<FlowLabel> flow_labels(std::uint64_t n, const std::vector<Edge>& forest);

// Max weight on the forest path between the labelled vertices.
std::variant<Weight, DifferentComponents> decode(const FlowLabel& a, const FlowLabel& b);

// An edge is F-light unless it is strictly heavier than its forest path.
bool is_f_light(const FlowLabel& a, const FlowLabel& b, Weight w);

}  // namespace hetmpc
