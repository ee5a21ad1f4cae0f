#pragma once

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "hetmpc/cluster.hpp"
#include "hetmpc/codec.hpp"
#include "hetmpc/graph.hpp"

namespace hetmpc::conn {

constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b);
std::uint64_t powmod(std::uint64_t a, std::uint64_t e);

// R instances, each with `lanes` independent chains of L nested levels.
struct SketchShape {
  std::uint64_t n = 0;
  std::uint32_t instances = 0;
  std::uint32_t lanes = 2;
  std::uint32_t levels = 0;
  std::uint32_t t = 0;  // independence of the level hash

  std::size_t chains() const { return std::size_t{instances} * lanes; }
  friend bool operator==(const SketchShape&, const SketchShape&) = default;
  std::size_t cells() const { return chains() * levels; }
  std::size_t index(std::uint32_t instance, std::uint32_t lane, std::uint32_t level) const {
    return (std::size_t{instance} * lanes + lane) * levels + level;
  }
};

// R = c1 * ceil(log2 n), L = ceil(2 log2 n), t = 2 ceil(log2 n).
SketchShape shape_for(std::uint64_t n, std::uint32_t c1 = 1);

// Coordinate of the pair a < b in the incidence vector.
inline std::uint64_t coordinate(std::uint64_t n, Vertex a, Vertex b) {
  return static_cast<std::uint64_t>(std::min(a, b)) * n + static_cast<std::uint64_t>(std::max(a, b));
}

struct HashKeys {
  SketchShape shape;
  std::vector<std::uint64_t> coeff;  // chains * t polynomial coefficients
  std::vector<std::uint64_t> z;      // per chain checksum base

  static HashKeys generate(const SketchShape& shape, std::mt19937_64& rng);
  std::uint32_t level(std::size_t chain, std::uint64_t coord) const;
  std::uint64_t fingerprint(std::size_t chain, std::uint64_t coord) const { return powmod(z[chain], coord); }
  std::size_t words() const { return coeff.size() + z.size(); }
  friend bool operator==(const HashKeys&, const HashKeys&) = default;
};

struct Cell {
  std::int64_t count = 0;
  std::int64_t idsum = 0;
  std::uint64_t check = 0;
  bool zero() const { return count == 0 && idsum == 0 && check == 0; }
  Cell& operator+=(const Cell& o);
  Cell& operator-=(const Cell& o);
  friend bool operator==(const Cell&, const Cell&) = default;
};

class L0Sketch {
 public:
  L0Sketch() = default;
  explicit L0Sketch(const SketchShape& shape) : shape_(shape), cells_(shape.cells()) {}

  // x[coord] += sign
  void add(const HashKeys& keys, std::uint64_t coord, std::int64_t sign);
  L0Sketch& operator+=(const L0Sketch& o);
  bool is_zero() const;
  const SketchShape& shape() const { return shape_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::vector<Cell>& cells() { return cells_; }
  friend bool operator==(const L0Sketch&, const L0Sketch&) = default;

 private:
  SketchShape shape_;
  std::vector<Cell> cells_;
};

// Nonzero cells only; what travels between machines. 4 words per cell.
struct SparseSketch {
  std::vector<std::pair<std::uint32_t, Cell>> cells;  // ascending index
  static SparseSketch from(const L0Sketch& s);
  void add_into(L0Sketch& dense) const;
};
SparseSketch operator+(const SparseSketch& a, const SparseSketch& b);

struct Empty {};
struct Fail {};
using Sample = std::variant<Edge, Empty, Fail>;

// Looks for a one-sparse cell (nested level or difference of adjacent
// levels) in the chains of instance r.
Sample l0_sample(const L0Sketch& s, const HashKeys& keys, std::uint32_t instance);

struct Options {
  Placement placement;
  std::uint32_t c1 = 1;
};

struct CcResult {
  std::vector<Vertex> component;  // smallest member of the component
  std::uint64_t count = 0;
  std::uint64_t phases = 0;
  std::uint64_t attempts = 0;
  std::uint64_t rounds = 0;
};

// Sketch-based Borůvka on the large machine. Throws RunFailed after a retry.
CcResult connected_components(Cluster& cluster, const SimGraph& g, const Options& opt = {});

// Sums per-vertex sketches at the large machine for the edges with weight <= limit.
std::vector<L0Sketch> sketch_build(Cluster& cluster, const Shards<Edge>& shards, Weight limit, const HashKeys& keys);

// Sketch Borůvka given per-vertex sketches; empty optional if some supernode
// never proved complete.
struct BoruvkaOutcome {
  bool ok = false;
  std::vector<Vertex> component;
  std::uint64_t phases = 0;
};
BoruvkaOutcome sketch_boruvka(const std::vector<L0Sketch>& sketches, const HashKeys& keys);

struct EstimateResult {
  double estimate = 0.0;
  std::uint64_t r = 0;
  std::vector<double> thresholds;
  std::vector<std::uint64_t> cc;
  std::uint64_t rounds = 0;
};

// Component-counting estimate from cc_i of the threshold graphs w <= (1+eps)^i, i = 0..r.
double threshold_estimate(std::uint64_t n, double eps, const std::vector<std::uint64_t>& cc);

EstimateResult mst_weight_estimate(Cluster& cluster, const SimGraph& g, double eps, const Options& opt = {});

}  // namespace hetmpc::conn

namespace hetmpc {
template <>
struct Codec<conn::SparseSketch> {
  static void put(Payload& out, const conn::SparseSketch& s) {
    out.push_back(static_cast<Word>(s.cells.size()));
    for (const auto& [i, c] : s.cells) out.insert(out.end(), {Word(i), c.count, c.idsum, static_cast<Word>(c.check)});
  }
  static conn::SparseSketch get(Reader& in) {
    conn::SparseSketch s;
    auto n = static_cast<std::size_t>(in.next());
    s.cells.resize(n);
    for (auto& [i, c] : s.cells) {
      i = static_cast<std::uint32_t>(in.next());
      c.count = in.next();
      c.idsum = in.next();
      c.check = static_cast<std::uint64_t>(in.next());
    }
    return s;
  }
};
}  // namespace hetmpc
