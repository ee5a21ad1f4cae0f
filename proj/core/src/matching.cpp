#include "hetmpc/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "hetmpc/errors.hpp"
#include "hetmpc/primitives.hpp"

namespace hetmpc::matching {

namespace {

// directed copy (u, v) of an edge with the edge's shared rank
struct Arc {
  Vertex u = 0;
  Vertex v = 0;
  Word rank = 0;
  Weight w = 0;
};

struct TwinRec {
  Vertex a = 0;
  Vertex b = 0;
  Vertex src = 0;
  Word machine = 0;
};

}  // namespace
}  // namespace hetmpc::matching

namespace hetmpc {
template <>
struct Codec<matching::Arc> {
  static void put(Payload& out, const matching::Arc& x) { out.insert(out.end(), {x.u, x.v, x.rank, x.w}); }
  static matching::Arc get(Reader& in) {
    matching::Arc x;
    x.u = in.next();
    x.v = in.next();
    x.rank = in.next();
    x.w = in.next();
    return x;
  }
};
template <>
struct Codec<matching::TwinRec> {
  static void put(Payload& out, const matching::TwinRec& x) { out.insert(out.end(), {x.a, x.b, x.src, x.machine}); }
  static matching::TwinRec get(Reader& in) {
    matching::TwinRec x;
    x.a = in.next();
    x.b = in.next();
    x.src = in.next();
    x.machine = in.next();
    return x;
  }
};
}  // namespace hetmpc

namespace hetmpc::matching {

namespace {

using Words = std::vector<Word>;
constexpr Word kNone = std::numeric_limits<Word>::max();

struct Copy {
  Arc arc;
  bool low_u = false;
  bool low_v = false;
  bool free_u = true;
  bool free_v = true;
  bool selected = false;
  Vertex best = kNoVertex;
  std::uint32_t twin = 0;

  bool live() const { return low_u && low_v && free_u && free_v; }
};

struct Layout {
  std::uint64_t n = 0;
  std::vector<std::vector<Copy>> copies;  // per small machine, sorted by (u, rank, v)
  std::vector<std::unordered_map<std::uint64_t, std::size_t>> index;
  prim::Directory dir;
  prim::Trees trees;

  std::uint64_t key(Vertex u, Vertex v) const {
    return static_cast<std::uint64_t>(u) * n + static_cast<std::uint64_t>(v);
  }
};

struct Fail {};

bool arc_less(const Arc& a, const Arc& b) { return std::tie(a.u, a.rank, a.v) < std::tie(b.u, b.rank, b.v); }

Edge as_edge(const Arc& a) { return normalized(Edge{a.u, a.v, a.w}); }

void sort_edges(std::vector<Edge>& es) {
  for (auto& e : es) e = normalized(e);
  std::sort(es.begin(), es.end(), [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
}

// One round: every copy sends value(copy) to its twin, which applies it.
template <class Value, class Apply>
void twin_exchange(Cluster& c, Layout& lay, Value value, Apply apply) {
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    std::map<std::uint32_t, Payload> out;
    for (const auto& cp : lay.copies[m.small_index() - 1]) {
      auto& p = out[cp.twin];
      p.insert(p.end(), {cp.arc.v, cp.arc.u, value(cp)});
    }
    for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
  });
  for (std::uint32_t i = 0; i < lay.copies.size(); ++i)
    for (const auto& msg : c.inbox(MachineId::small(i + 1)))
      for (std::size_t j = 0; j + 2 < msg.payload.size(); j += 3) {
        auto idx = lay.index[i].at(lay.key(msg.payload[j], msg.payload[j + 1]));
        apply(lay.copies[i][idx], msg.payload[j + 2]);
      }
}

// Sort by edge, pair the two copies (possibly across a machine boundary) and
// tell each copy where its twin lives: kSortRounds + 2 rounds.
void find_twins(Cluster& c, Layout& lay) {
  const std::uint32_t k = c.small_count();
  Shards<TwinRec> recs(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& cp : lay.copies[i]) {
      auto [a, b] = pair_key(cp.arc.u, cp.arc.v);
      recs[i].push_back(TwinRec{a, b, cp.arc.u, Word(i + 1)});
    }
  std::uint64_t total = 0;
  auto sorted = prim::het_sort(
      c, std::move(recs),
      [](const TwinRec& x, const TwinRec& y) { return std::tie(x.a, x.b, x.src) < std::tie(y.a, y.b, y.src); }, &total);
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const std::uint32_t me = m.small_index();
    const auto& mine = sorted[me - 1];
    if (mine.empty()) return;
    for (std::uint32_t next = me + 1; next <= k; ++next) {
      if (prim::balanced_count(total, k, next) == 0) continue;
      Payload p;
      put(p, mine.back());
      m.send(MachineId::small(next), std::move(p));
      break;
    }
  });
  std::vector<std::vector<TwinRec>> lists(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    for (const auto& msg : c.inbox(MachineId::small(i + 1))) {
      Reader in(msg.payload);
      auto r = get<TwinRec>(in);
      if (!sorted[i].empty() && sorted[i].front().a == r.a && sorted[i].front().b == r.b) lists[i].push_back(r);
    }
    lists[i].insert(lists[i].end(), sorted[i].begin(), sorted[i].end());
  }
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& l = lists[m.small_index() - 1];
    std::map<std::uint32_t, Payload> out;
    for (std::size_t j = 0; j + 1 < l.size();) {
      if (l[j].a != l[j + 1].a || l[j].b != l[j + 1].b) {
        ++j;
        continue;
      }
      for (int s = 0; s < 2; ++s) {
        const auto& me = l[j + s];
        const auto& other = l[j + 1 - s];
        Vertex dst = me.src == me.a ? me.b : me.a;
        out[static_cast<std::uint32_t>(me.machine)].insert(out[static_cast<std::uint32_t>(me.machine)].end(),
                                                           {me.src, dst, other.machine});
      }
      j += 2;
    }
    for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
  });
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& msg : c.inbox(MachineId::small(i + 1)))
      for (std::size_t j = 0; j + 2 < msg.payload.size(); j += 3)
        lay.copies[i][lay.index[i].at(lay.key(msg.payload[j], msg.payload[j + 1]))].twin =
            static_cast<std::uint32_t>(msg.payload[j + 2]);
}

std::uint64_t max_rank(std::uint64_t n) {
  const double r = std::pow(double(n), 5.0);
  return r >= 0x1p62 ? (std::uint64_t{1} << 62) : std::max<std::uint64_t>(2, static_cast<std::uint64_t>(r));
}

// Ranked directed layout sorted by (u, rank, v); ranks are resampled once on a
// collision between edges of the same vertex.
Layout arrange(Cluster& c, const Shards<Edge>& shards, std::uint64_t n, Result& res) {
  const std::uint32_t k = c.small_count();
  for (int draw = 0;; ++draw) {
    Shards<Arc> arcs(k);
    for (std::uint32_t i = 0; i < k; ++i) {
      auto rng = c.local_rng(MachineId::small(i + 1));
      std::uniform_int_distribution<std::uint64_t> dist(1, max_rank(n));
      for (const auto& e : shards[i]) {
        Word r = static_cast<Word>(dist(rng));
        arcs[i].push_back(Arc{e.u, e.v, r, e.w});
        arcs[i].push_back(Arc{e.v, e.u, r, e.w});
      }
    }
    std::uint64_t total = 0;
    auto sorted = prim::het_sort(c, std::move(arcs), arc_less, &total);

    // equal (u, rank) pairs, inside a machine or across a boundary
    c.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      const auto& mine = sorted[me - 1];
      if (mine.empty()) return;
      for (std::uint32_t next = me + 1; next <= k; ++next) {
        if (prim::balanced_count(total, k, next) == 0) continue;
        m.send(MachineId::small(next), Payload{mine.back().u, mine.back().rank});
        break;
      }
    });
    std::vector<std::uint64_t> clashes(k, 0);
    for (std::uint32_t i = 0; i < k; ++i) {
      const auto& mine = sorted[i];
      for (const auto& msg : c.inbox(MachineId::small(i + 1)))
        if (!mine.empty() && mine.front().u == msg.payload[0] && mine.front().rank == msg.payload[1]) ++clashes[i];
      for (std::size_t j = 1; j < mine.size(); ++j)
        if (mine[j].u == mine[j - 1].u && mine[j].rank == mine[j - 1].rank) ++clashes[i];
    }
    c.run_round([&](Machine& m) {
      if (m.is_large() || clashes[m.small_index() - 1] == 0) return;
      m.send(MachineId::large(), Payload{Word(clashes[m.small_index() - 1])});
    });
    std::uint64_t found = 0;
    for (const auto& msg : c.inbox(MachineId::large())) found += static_cast<std::uint64_t>(msg.payload[0]);
    res.rank_collisions += found;
    if (found > 0) {
      if (draw == 0) continue;
      throw RunFailed("matching: rank collision after resampling");
    }

    Layout lay;
    lay.n = n;
    lay.copies.resize(k);
    lay.index.resize(k);
    for (std::uint32_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < sorted[i].size(); ++j) {
        lay.index[i].emplace(lay.key(sorted[i][j].u, sorted[i][j].v), j);
        lay.copies[i].push_back(Copy{sorted[i][j]});
      }
      c.set_resident(MachineId::small(i + 1), 8 * sorted[i].size());
    }
    lay.dir = prim::report_ranges(c, sorted, [](const Arc& a) { return a.u; });
    return lay;
  }
}

// Phase 1: repeated local-minimum matching on G[V_low] with fresh ranks,
// using only the per-vertex trees and the twin links.
std::vector<Edge> phase1(Cluster& c, Layout& lay, std::uint64_t cap, Result& res) {
  const std::uint32_t k = c.small_count();
  auto combine = [](const Words& a, const Words& b) {
    Words out{std::max(a[0], b[0]), a[1], a[2]};
    if (std::tie(b[1], b[2]) < std::tie(a[1], a[2])) {
      out[1] = b[1];
      out[2] = b[2];
    }
    return out;
  };
  for (std::uint64_t t = 0;; ++t) {
    if (t == cap) throw Fail{};
    ++res.phase1_iterations;
    std::vector<std::map<Word, Words>> partial(k);
    for (std::uint32_t i = 0; i < k; ++i)
      for (const auto& cp : lay.copies[i]) {
        Words w{cp.free_u ? 0 : 1, kNone, kNone};
        if (cp.live()) {
          w[1] = static_cast<Word>(mix64(static_cast<std::uint64_t>(cp.arc.rank) ^ mix64(t + 1)) >> 1);
          w[2] = cp.arc.v;
        }
        auto [it, fresh] = partial[i].try_emplace(cp.arc.u, w);
        if (!fresh) it->second = combine(it->second, w);
      }
    auto roots = prim::tree_reduce(c, lay.trees, std::move(partial), combine);
    std::vector<std::map<Word, Words>> decided(k);
    for (std::uint32_t i = 0; i < k; ++i)
      for (const auto& [u, w] : roots[i])
        decided[i][u] = Words{w[0], w[0] ? kNoVertex : (w[2] == kNone ? kNoVertex : w[2])};
    auto pushed = prim::tree_push(c, lay.trees, std::move(decided));
    for (std::uint32_t i = 0; i < k; ++i)
      for (auto& cp : lay.copies[i]) {
        const auto& w = pushed[i].at(cp.arc.u);
        if (w[0]) cp.free_u = false;
        cp.best = w[1];
      }
    twin_exchange(
        c, lay, [](const Copy& cp) { return Word((cp.free_u ? 2 : 0) | (cp.best == cp.arc.v ? 1 : 0)); },
        [](Copy& cp, Word x) {
          cp.free_v = (x & 2) != 0;
          if ((x & 1) && cp.best == cp.arc.v && cp.live()) {
            cp.selected = true;
            cp.free_u = cp.free_v = false;
          }
        });
    std::vector<std::uint64_t> live(k, 0);
    for (std::uint32_t i = 0; i < k; ++i)
      for (const auto& cp : lay.copies[i]) live[i] += cp.live();
    if (prim::small_allreduce_sum(c, live) == 0) break;
  }

  // M1 to the large machine
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    Payload p;
    for (const auto& cp : lay.copies[m.small_index() - 1])
      if (cp.selected && cp.arc.u < cp.arc.v) put(p, as_edge(cp.arc));
    if (!p.empty()) m.send(MachineId::large(), std::move(p));
  });
  std::vector<Edge> m1;
  for (const auto& msg : c.inbox(MachineId::large())) {
    Reader in(msg.payload);
    while (!in.done()) m1.push_back(get<Edge>(in));
  }
  sort_edges(m1);
  return m1;
}

bool attempt(Cluster& c, const Shards<Edge>& shards, const SimGraph& g, const Options& opt, Result& res) {
  const std::uint64_t start = c.rounds_used();
  const std::uint64_t n = g.n;
  const std::uint32_t k = c.small_count();
  res.d = average_degree(n, g.edges.size());
  const std::uint64_t d2 = res.d * res.d;

  Layout lay = arrange(c, shards, n, res);
  std::vector<std::uint64_t> deg(n, 0);
  for (const auto& pr : lay.dir.parts) deg[static_cast<std::size_t>(pr.key)] = pr.count;
  std::map<Word, Word> low;
  res.high.clear();
  for (std::uint64_t v = 0; v < n; ++v) {
    if (deg[v] == 0) continue;
    low.emplace(Word(v), deg[v] <= d2 ? 1 : 0);
    if (deg[v] > d2) res.high.push_back(Vertex(v));
  }
  c.set_resident(MachineId::large(), 3 * lay.dir.parts.size() + n);
  const std::size_t depth = prim::tree_rounds(c, lay.dir);
  auto lows = prim::tree_broadcast(c, lay.dir, low, &lay.trees, depth);
  for (std::uint32_t i = 0; i < k; ++i)
    for (auto& cp : lay.copies[i]) cp.low_u = lows[i].at(cp.arc.u) != 0;
  find_twins(c, lay);
  twin_exchange(c, lay, [](const Copy& cp) { return Word(cp.low_u); }, [](Copy& cp, Word x) { cp.low_v = x != 0; });
  res.setup_rounds = c.rounds_used() - start;

  const std::uint64_t p1_start = c.rounds_used();
  const std::uint64_t cap = opt.max_iterations ? opt.max_iterations : 16 * ceil_log2(n) + 16;
  try {
    res.phase1 = phase1(c, lay, cap, res);
  } catch (const Fail&) {
    return false;
  }
  res.phase1_rounds = c.rounds_used() - p1_start;
  res.m1 = res.phase1.size();
  std::vector<char> matched(n, 0);
  for (const auto& e : res.phase1) matched[e.u] = matched[e.v] = 1;

  // Phase 2: the lowest-ranked incident edges of every high-degree vertex
  const std::uint64_t post_start = c.rounds_used();
  const std::uint64_t want = 2 * res.d * ceil_log2(n);
  c.run_round([&](Machine& m) {
    if (!m.is_large()) return;
    std::map<std::uint32_t, Payload> out;
    for (Vertex v : res.high) {
      const auto* pr = lay.dir.find(v);
      std::uint64_t left = std::min<std::uint64_t>(want, pr->count);
      for (std::uint32_t j = pr->first; j <= pr->last && left > 0; ++j) {
        auto take = std::min(left, pr->on(j));
        if (take == 0) continue;
        out[j].insert(out[j].end(), {v, Word(take)});
        left -= take;
      }
    }
    for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
  });
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& mine = lay.copies[m.small_index() - 1];
    Payload p;
    for (const auto& msg : m.inbox())
      for (std::size_t j = 0; j + 1 < msg.payload.size(); j += 2) {
        Vertex v = msg.payload[j];
        auto take = static_cast<std::size_t>(msg.payload[j + 1]);
        auto it = std::lower_bound(mine.begin(), mine.end(), v, [](const Copy& cp, Vertex x) { return cp.arc.u < x; });
        for (std::size_t t = 0; t < take && it != mine.end() && it->arc.u == v; ++t, ++it) put(p, it->arc);
      }
    if (!p.empty()) m.send(MachineId::large(), std::move(p));
  });
  std::map<Vertex, std::vector<Arc>> sampled;
  for (const auto& msg : c.inbox(MachineId::large())) {
    res.collected_words += msg.payload.size();
    Reader in(msg.payload);
    while (!in.done()) {
      auto a = get<Arc>(in);
      sampled[a.u].push_back(a);
    }
  }
  c.set_resident(MachineId::large(), 3 * lay.dir.parts.size() + 2 * n + res.collected_words);
  std::vector<Edge> m2;
  for (auto& [u, list] : sampled) {
    if (matched[u]) continue;
    std::sort(list.begin(), list.end(), arc_less);
    for (const auto& a : list)
      if (!matched[a.v]) {
        matched[u] = matched[a.v] = 1;
        m2.push_back(as_edge(a));
        break;
      }
  }
  res.m2 = m2.size();

  // matched status to every copy, then to the twins
  std::map<Word, Word> status;
  for (std::uint64_t v = 0; v < n; ++v)
    if (matched[v] && deg[v] > 0) status.emplace(Word(v), 1);
  auto known = prim::tree_broadcast(c, lay.dir, status, nullptr, depth);
  for (std::uint32_t i = 0; i < k; ++i)
    for (auto& cp : lay.copies[i])
      if (known[i].count(cp.arc.u)) cp.free_u = false;
  twin_exchange(c, lay, [](const Copy& cp) { return Word(cp.free_u); }, [](Copy& cp, Word x) { cp.free_v = x != 0; });

  // Phase 3: count, then ship the residual graph
  std::vector<std::uint64_t> count(k, 0);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& cp : lay.copies[i]) count[i] += cp.arc.u < cp.arc.v && cp.free_u && cp.free_v;
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    m.send(MachineId::large(), Payload{Word(count[m.small_index() - 1])});
  });
  res.residual = 0;
  for (const auto& msg : c.inbox(MachineId::large())) res.residual += static_cast<std::uint64_t>(msg.payload[0]);
  const bool go = res.residual <= 2 * n;
  prim::broadcast(c, Payload{go ? 1 : 0});
  if (!go) return false;
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    Payload p;
    for (const auto& cp : lay.copies[m.small_index() - 1])
      if (cp.arc.u < cp.arc.v && cp.free_u && cp.free_v) put(p, as_edge(cp.arc));
    if (!p.empty()) m.send(MachineId::large(), std::move(p));
  });
  std::vector<Edge> residual;
  for (const auto& msg : c.inbox(MachineId::large())) {
    Reader in(msg.payload);
    while (!in.done()) residual.push_back(get<Edge>(in));
  }
  sort_edges(residual);
  c.set_resident(MachineId::large(), 2 * n + 3 * residual.size());
  auto m3 = greedy_extend(residual, matched);
  res.m3 = m3.size();
  res.post_rounds = c.rounds_used() - post_start;

  res.matching = res.phase1;
  res.matching.insert(res.matching.end(), m2.begin(), m2.end());
  res.matching.insert(res.matching.end(), m3.begin(), m3.end());
  sort_edges(res.matching);
  return true;
}

}  // namespace

std::uint64_t average_degree(std::uint64_t n, std::uint64_t m) {
  if (n == 0) return 1;
  return std::max<std::uint64_t>(1, (2 * m + n - 1) / n);
}

std::vector<Edge> greedy_extend(const std::vector<Edge>& edges, std::vector<char>& matched) {
  std::vector<Edge> out;
  for (const auto& e : edges) {
    if (matched[e.u] || matched[e.v]) continue;
    matched[e.u] = matched[e.v] = 1;
    out.push_back(normalized(e));
  }
  return out;
}

std::uint64_t post_phase1_rounds(std::uint64_t depth) { return 7 + depth; }

Result maximal_matching(Cluster& c, const SimGraph& g, const Options& opt) {
  const std::uint64_t start = c.rounds_used();
  Result res;
  if (g.edges.empty()) {
    res.d = average_degree(g.n, 0);
    return res;
  }
  auto shards = distribute_edges(c, g, opt.placement);
  for (int i = 0; i < 2; ++i) {
    ++res.attempts;
    res.phase1_iterations = 0;
    if (attempt(c, shards, g, opt, res)) {
      res.rounds = c.rounds_used() - start;
      return res;
    }
  }
  throw RunFailed("matching failed twice");
}

namespace {

struct SuperFail {};

void solve(Cluster& c, const Shards<Edge>& edges, std::uint64_t n, double limit, double p, std::uint64_t depth,
           std::vector<char>& matched, SuperResult& res) {
  const std::uint32_t k = c.small_count();
  if (depth > 64) throw RunFailed("matching: recursion does not shrink");
  res.depth = std::max(res.depth, depth);
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    m.send(MachineId::large(), Payload{Word(edges[m.small_index() - 1].size())});
  });
  std::uint64_t total = 0;
  for (const auto& msg : c.inbox(MachineId::large())) total += static_cast<std::uint64_t>(msg.payload[0]);
  if (res.level_edges.size() < depth) res.level_edges.resize(depth);
  res.level_edges[depth - 1] = total;
  const bool ship = double(total) <= limit;
  prim::broadcast(c, Payload{ship ? 1 : 0});

  auto collect = [&](const Shards<Edge>& es) {
    c.run_round([&](Machine& m) {
      if (m.is_large()) return;
      Payload pl;
      for (const auto& e : es[m.small_index() - 1]) put(pl, e);
      if (!pl.empty()) m.send(MachineId::large(), std::move(pl));
    });
    std::vector<Edge> got;
    for (const auto& msg : c.inbox(MachineId::large())) {
      Reader in(msg.payload);
      while (!in.done()) got.push_back(get<Edge>(in));
    }
    sort_edges(got);
    c.set_resident(MachineId::large(), n + 3 * got.size() + 3 * res.matching.size());
    auto more = greedy_extend(got, matched);
    res.matching.insert(res.matching.end(), more.begin(), more.end());
  };
  if (ship) {
    collect(edges);
    return;
  }

  Shards<Edge> sample(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    auto rng = c.local_rng(MachineId::small(i + 1));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const auto& e : edges[i])
      if (coin(rng) < p) sample[i].push_back(e);
  }
  solve(c, sample, n, limit, p, depth + 1, matched, res);

  std::map<Word, Word> status;
  for (std::uint64_t v = 0; v < n; ++v)
    if (matched[v]) status.emplace(Word(v), 1);
  std::vector<std::vector<Word>> req(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& e : edges[i]) {
      req[i].push_back(e.u);
      req[i].push_back(e.v);
    }
  auto known = prim::disseminate(c, status, req);
  Shards<Edge> open(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& e : edges[i])
      if (!known[i].count(e.u) && !known[i].count(e.v)) open[i].push_back(e);
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    m.send(MachineId::large(), Payload{Word(open[m.small_index() - 1].size())});
  });
  std::uint64_t left = 0;
  for (const auto& msg : c.inbox(MachineId::large())) left += static_cast<std::uint64_t>(msg.payload[0]);
  const bool go = double(left) <= limit;
  prim::broadcast(c, Payload{go ? 1 : 0});
  if (!go) throw SuperFail{};
  collect(open);
}

}  // namespace

SuperResult matching_superlinear(Cluster& c, const SimGraph& g, const Options& opt) {
  const auto& cfg = c.config();
  if (!cfg.superlinear || cfg.superlinear->value() <= 0.0)
    throw ConfigError("matching_superlinear needs an exponent f > 0");
  const double f = cfg.superlinear->value();
  const std::uint64_t start = c.rounds_used();
  const double n = double(g.n);
  const double limit = opt.super_c * std::pow(n, 1.0 + f);
  const double p = std::pow(n, -f);
  auto shards = distribute_edges(c, g, opt.placement);
  SuperResult res;
  for (int i = 0; i < 2; ++i) {
    ++res.attempts;
    res.depth = 0;
    res.level_edges.clear();
    res.matching.clear();
    std::vector<char> matched(g.n, 0);
    try {
      solve(c, shards, g.n, limit, p, 1, matched, res);
    } catch (const SuperFail&) {
      continue;
    }
    sort_edges(res.matching);
    res.rounds = c.rounds_used() - start;
    return res;
  }
  throw RunFailed("superlinear matching overflowed twice");
}

}  // namespace hetmpc::matching
