#include "hetmpc/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "hetmpc/dsu.hpp"
#include "hetmpc/errors.hpp"
#include "hetmpc/primitives.hpp"

namespace hetmpc::conn {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
  unsigned __int128 x = static_cast<unsigned __int128>(a) * b;
  std::uint64_t lo = static_cast<std::uint64_t>(x & kPrime);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  return r >= kPrime ? r - kPrime : r;
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
  std::uint64_t r = 1;
  a %= kPrime;
  while (e) {
    if (e & 1) r = mulmod(r, a);
    a = mulmod(a, a);
    e >>= 1;
  }
  return r;
}

namespace {

std::uint64_t addmod(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r >= kPrime ? r - kPrime : r;
}

std::uint64_t submod(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kPrime - b; }

std::uint64_t signed_mod(std::int64_t x) {
  std::int64_t r = x % static_cast<std::int64_t>(kPrime);
  return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(kPrime) : r);
}

}  // namespace

SketchShape shape_for(std::uint64_t n, std::uint32_t c1) {
  SketchShape s;
  s.n = n;
  const auto lg = static_cast<std::uint32_t>(ceil_log2(n));
  s.instances = c1 * lg;
  s.lanes = 2;
  s.levels = 2 * lg;
  s.t = 2 * lg;
  return s;
}

HashKeys HashKeys::generate(const SketchShape& shape, std::mt19937_64& rng) {
  HashKeys k;
  k.shape = shape;
  std::uniform_int_distribution<std::uint64_t> field(0, kPrime - 1);
  std::uniform_int_distribution<std::uint64_t> nonzero(2, kPrime - 1);
  k.coeff.resize(shape.chains() * shape.t);
  for (auto& c : k.coeff) c = field(rng);
  k.z.resize(shape.chains());
  for (auto& z : k.z) z = nonzero(rng);
  return k;
}

std::uint32_t HashKeys::level(std::size_t chain, std::uint64_t coord) const {
  const std::uint64_t* c = coeff.data() + chain * shape.t;
  std::uint64_t x = coord % kPrime;
  std::uint64_t h = 0;
  for (std::uint32_t j = 0; j < shape.t; ++j) h = addmod(mulmod(h, x), c[j]);
  if (h == 0) return shape.levels - 1;
  return std::min<std::uint32_t>(shape.levels - 1, static_cast<std::uint32_t>(__builtin_ctzll(h)));
}

Cell& Cell::operator+=(const Cell& o) {
  count += o.count;
  idsum += o.idsum;
  check = addmod(check, o.check);
  return *this;
}

Cell& Cell::operator-=(const Cell& o) {
  count -= o.count;
  idsum -= o.idsum;
  check = submod(check, o.check);
  return *this;
}

void L0Sketch::add(const HashKeys& keys, std::uint64_t coord, std::int64_t sign) {
  const std::uint64_t s = signed_mod(sign);
  for (std::size_t chain = 0; chain < shape_.chains(); ++chain) {
    const auto top = keys.level(chain, coord);
    const std::uint64_t fp = mulmod(s, keys.fingerprint(chain, coord));
    Cell* base = cells_.data() + chain * shape_.levels;
    for (std::uint32_t l = 0; l <= top; ++l) {
      base[l].count += sign;
      base[l].idsum += sign * static_cast<std::int64_t>(coord);
      base[l].check = addmod(base[l].check, fp);
    }
  }
}

L0Sketch& L0Sketch::operator+=(const L0Sketch& o) {
  if (cells_.empty()) {
    *this = o;
    return *this;
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += o.cells_[i];
  return *this;
}

bool L0Sketch::is_zero() const {
  return std::all_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.zero(); });
}

SparseSketch SparseSketch::from(const L0Sketch& s) {
  SparseSketch out;
  const auto& cells = s.cells();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!cells[i].zero()) out.cells.emplace_back(static_cast<std::uint32_t>(i), cells[i]);
  return out;
}

void SparseSketch::add_into(L0Sketch& dense) const {
  for (const auto& [i, c] : cells) dense.cells()[i] += c;
}

SparseSketch operator+(const SparseSketch& a, const SparseSketch& b) {
  SparseSketch out;
  std::size_t i = 0, j = 0;
  while (i < a.cells.size() || j < b.cells.size()) {
    if (j == b.cells.size() || (i < a.cells.size() && a.cells[i].first < b.cells[j].first)) {
      out.cells.push_back(a.cells[i++]);
    } else if (i == a.cells.size() || b.cells[j].first < a.cells[i].first) {
      out.cells.push_back(b.cells[j++]);
    } else {
      Cell c = a.cells[i].second;
      c += b.cells[j].second;
      if (!c.zero()) out.cells.emplace_back(a.cells[i].first, c);
      ++i;
      ++j;
    }
  }
  return out;
}

namespace {

std::optional<Edge> one_sparse(const Cell& c, const HashKeys& keys, std::size_t chain) {
  if (c.count == 0) return std::nullopt;
  if (c.idsum % c.count != 0) return std::nullopt;
  const std::int64_t coord = c.idsum / c.count;
  const std::uint64_t n = keys.shape.n;
  if (coord < 0 || static_cast<std::uint64_t>(coord) >= n * n) return std::nullopt;
  auto u = static_cast<std::uint64_t>(coord);
  if (c.check != mulmod(signed_mod(c.count), keys.fingerprint(chain, u))) return std::nullopt;
  Vertex a = static_cast<Vertex>(u / n), b = static_cast<Vertex>(u % n);
  if (a >= b) return std::nullopt;
  return Edge{a, b, 1};
}

}  // namespace

Sample l0_sample(const L0Sketch& s, const HashKeys& keys, std::uint32_t instance) {
  const auto& shape = s.shape();
  if (instance >= shape.instances) throw std::out_of_range("l0_sample: instance out of range");
  bool all_zero = true;
  for (std::uint32_t lane = 0; lane < shape.lanes && all_zero; ++lane)
    for (std::uint32_t l = 0; l < shape.levels; ++l)
      if (!s.cells()[shape.index(instance, lane, l)].zero()) {
        all_zero = false;
        break;
      }
  if (all_zero) return Empty{};
  for (std::uint32_t lane = 0; lane < shape.lanes; ++lane) {
    const std::size_t chain = std::size_t{instance} * shape.lanes + lane;
    for (std::uint32_t l = 0; l < shape.levels; ++l) {
      const Cell& nested = s.cells()[shape.index(instance, lane, l)];
      if (auto e = one_sparse(nested, keys, chain)) return *e;
      if (l + 1 < shape.levels) {
        Cell exact = nested;
        exact -= s.cells()[shape.index(instance, lane, l + 1)];
        if (auto e = one_sparse(exact, keys, chain)) return *e;
      }
    }
  }
  return Fail{};
}

BoruvkaOutcome sketch_boruvka(const std::vector<L0Sketch>& sketches, const HashKeys& keys) {
  const std::size_t n = sketches.size();
  BoruvkaOutcome out;
  Dsu dsu(n);
  std::vector<L0Sketch> sum(sketches);
  std::vector<char> complete(n, 0);
  for (std::uint32_t r = 0; r < keys.shape.instances; ++r) {
    out.phases = r + 1;
    std::vector<Edge> picked;
    bool pending = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (dsu.find(v) != v || complete[v]) continue;
      auto s = l0_sample(sum[v], keys, r);
      if (std::holds_alternative<Empty>(s)) {
        complete[v] = 1;
      } else if (std::holds_alternative<Edge>(s)) {
        picked.push_back(std::get<Edge>(s));
        pending = true;
      } else {
        pending = true;
      }
    }
    for (const auto& e : picked) {
      auto a = dsu.find(static_cast<std::size_t>(e.u)), b = dsu.find(static_cast<std::size_t>(e.v));
      if (a == b) continue;
      dsu.unite(a, b);
      auto root = dsu.find(a);
      auto other = root == a ? b : a;
      sum[root] += sum[other];
      sum[other] = L0Sketch();
      complete[root] = 0;
    }
    if (!pending) {
      out.ok = true;
      break;
    }
  }
  out.component.resize(n);
  for (std::size_t v = 0; v < n; ++v) out.component[v] = static_cast<Vertex>(dsu.min_member(v));
  return out;
}

std::vector<L0Sketch> sketch_build(Cluster& c, const Shards<Edge>& shards, Weight limit, const HashKeys& keys) {
  const std::uint32_t k = c.small_count();
  const std::uint64_t n = keys.shape.n;
  Shards<Edge> copies(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& e : shards[i])
      if (e.w <= limit) {
        copies[i].push_back(Edge{e.u, e.v, e.w});
        copies[i].push_back(Edge{e.v, e.u, e.w});
      }
  auto sorted = prim::het_sort(c, std::move(copies), [](const Edge& a, const Edge& b) { return a.u < b.u; });
  auto dir = prim::report_ranges(c, sorted, [](const Edge& e) { return e.u; });
  std::map<Word, Word> all;
  for (const auto& pr : dir.parts) all.emplace(pr.key, 0);
  prim::Trees trees;
  prim::tree_broadcast(c, dir, all, &trees, prim::tree_rounds(c, dir));

  std::vector<std::map<Word, SparseSketch>> partial(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    std::uint64_t words = 3 * sorted[i].size() + keys.words();
    for (std::size_t j = 0; j < sorted[i].size();) {
      Vertex v = sorted[i][j].u;
      L0Sketch s(keys.shape);
      for (; j < sorted[i].size() && sorted[i][j].u == v; ++j) {
        Vertex other = sorted[i][j].v;
        s.add(keys, coordinate(n, v, other), v < other ? 1 : -1);
      }
      auto sp = SparseSketch::from(s);
      words += 4 * sp.cells.size() + 1;
      partial[i].emplace(v, std::move(sp));
    }
    c.set_resident(MachineId::small(i + 1), words);
  }
  auto roots = prim::tree_reduce(c, trees, std::move(partial),
                                 [](const SparseSketch& a, const SparseSketch& b) { return a + b; });
  auto at_large = prim::gather_to_large(c, roots, [](const SparseSketch& a, const SparseSketch& b) { return a + b; });

  std::vector<L0Sketch> out(n, L0Sketch(keys.shape));
  std::uint64_t words = 0;
  for (const auto& [v, sp] : at_large) {
    sp.add_into(out[static_cast<std::size_t>(v)]);
    words += 4 * sp.cells.size();
  }
  c.set_resident(MachineId::large(), c.resident(MachineId::large()) + words);
  return out;
}

namespace {

Payload encode_keys(const HashKeys& k) {
  Payload p(k.coeff.begin(), k.coeff.end());
  p.insert(p.end(), k.z.begin(), k.z.end());
  return p;
}

}  // namespace

CcResult connected_components(Cluster& c, const SimGraph& g, const Options& opt) {
  const std::uint64_t start = c.rounds_used();
  auto shards = distribute_edges(c, g, opt.placement);
  const auto shape = shape_for(g.n, opt.c1);
  CcResult res;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ++res.attempts;
    auto rng = c.local_rng(MachineId::large());
    auto keys = HashKeys::generate(shape, rng);
    prim::broadcast(c, encode_keys(keys));
    auto sketches = sketch_build(c, shards, std::numeric_limits<Weight>::max(), keys);
    auto out = sketch_boruvka(sketches, keys);
    if (!out.ok) continue;
    res.component = std::move(out.component);
    res.phases = out.phases;
    for (std::uint64_t v = 0; v < g.n; ++v) res.count += res.component[v] == static_cast<Vertex>(v);
    res.rounds = c.rounds_used() - start;
    return res;
  }
  throw RunFailed("sketch connectivity failed twice");
}

double threshold_estimate(std::uint64_t n, double eps, const std::vector<std::uint64_t>& cc) {
  if (cc.empty()) throw std::invalid_argument("threshold_estimate: no component counts");
  const double top = static_cast<double>(cc.back());
  double w = static_cast<double>(n) - top;
  double t = 1.0;
  for (std::size_t i = 0; i + 1 < cc.size(); ++i) {
    w += eps * t * (static_cast<double>(cc[i]) - top);
    t *= 1.0 + eps;
  }
  return w;
}

EstimateResult mst_weight_estimate(Cluster& c, const SimGraph& g, double eps, const Options& opt) {
  if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps must lie in (0, 1]");
  const std::uint64_t start = c.rounds_used();
  Weight wmax = 1;
  for (const auto& e : g.edges) {
    if (e.w < 1) throw ConfigError("weights must be positive integers");
    wmax = std::max(wmax, e.w);
  }
  EstimateResult res;
  res.r = wmax <= 1 ? 0 : static_cast<std::uint64_t>(std::ceil(std::log(double(wmax)) / std::log1p(eps) - 1e-9));
  std::vector<Weight> limits;
  for (std::uint64_t i = 0; i <= res.r; ++i) {
    double t = std::pow(1.0 + eps, static_cast<double>(i));
    res.thresholds.push_back(t);
    limits.push_back(static_cast<Weight>(std::floor(t + 1e-9)));
  }
  auto shards = distribute_edges(c, g, opt.placement);
  const auto shape = shape_for(g.n, opt.c1);
  auto rng = c.local_rng(MachineId::large());
  auto keys = HashKeys::generate(shape, rng);
  prim::broadcast(c, encode_keys(keys));

  res.cc.assign(res.r + 1, 0);
  std::vector<char> ok(res.r + 1, 0);
  c.parallel(res.r + 1, [&](std::size_t i) {
    auto out = sketch_boruvka(sketch_build(c, shards, limits[i], keys), keys);
    if (!out.ok) return;
    ok[i] = 1;
    for (std::uint64_t v = 0; v < g.n; ++v) res.cc[i] += out.component[v] == static_cast<Vertex>(v);
  });
  for (std::size_t i = 0; i <= res.r; ++i) {
    if (ok[i]) continue;
    auto rng2 = c.local_rng(MachineId::large());
    auto fresh = HashKeys::generate(shape, rng2);
    prim::broadcast(c, encode_keys(fresh));
    auto out = sketch_boruvka(sketch_build(c, shards, limits[i], fresh), fresh);
    if (!out.ok) throw RunFailed("sketch connectivity failed twice on threshold " + std::to_string(i));
    for (std::uint64_t v = 0; v < g.n; ++v) res.cc[i] += out.component[v] == static_cast<Vertex>(v);
  }
  res.estimate = threshold_estimate(g.n, eps, res.cc);
  res.rounds = c.rounds_used() - start;
  return res;
}

}  // namespace hetmpc::conn
