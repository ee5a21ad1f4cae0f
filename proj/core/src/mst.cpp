#include "hetmpc/mst.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "hetmpc/dsu.hpp"
#include "hetmpc/errors.hpp"
#include "hetmpc/flow_label.hpp"
#include "hetmpc/primitives.hpp"

namespace hetmpc::mst {

std::uint64_t Result::total_weight() const {
  std::uint64_t s = 0;
  for (const auto& e : forest) s += static_cast<std::uint64_t>(e.w);
  return s;
}

std::uint64_t boruvka_step_count(const ClusterConfig& cfg) {
  const double n = static_cast<double>(cfg.n);
  const double m = static_cast<double>(cfg.m);
  if (cfg.superlinear) {
    if (m <= n) return 0;
    double x = std::log(m / n) / std::log(n) / cfg.superlinear->value();
    if (x <= 1.0) return 0;
    return static_cast<std::uint64_t>(std::ceil(std::log2(x) - 1e-12));
  }
  if (m <= 2.0 * n) return 0;
  double x = std::log2(m / n);
  return static_cast<std::uint64_t>(std::ceil(std::log2(std::max(1.0, x)) - 1e-12));
}

std::uint64_t select_count(const ClusterConfig& cfg, std::uint64_t step) {
  if (cfg.superlinear) {
    Rational e{cfg.superlinear->num << step, cfg.superlinear->den};
    return std::max<std::uint64_t>(2, snap_floor(rational_pow(static_cast<double>(cfg.n), e)));
  }
  if (step >= 6) throw ConfigError("select count 2^(2^i) overflows for i >= 6");
  return std::uint64_t{1} << (std::uint64_t{1} << step);
}

double sample_probability(const ClusterConfig& cfg, std::uint64_t steps) {
  const double n = static_cast<double>(cfg.n);
  if (cfg.superlinear) {
    double f = cfg.superlinear->value();
    return std::min(1.0, std::pow(n, -(std::ldexp(f, static_cast<int>(steps)) + f)));
  }
  return std::min(1.0, n / static_cast<double>(std::max<std::uint64_t>(1, cfg.m)));
}

namespace {

bool by_source(const CEdge& a, const CEdge& b) {
  if (a.u != b.u) return a.u < b.u;
  return a.key() < b.key();
}

struct Collected {
  Vertex v;
  std::vector<CEdge> lightest;  // ascending, u == v
  bool complete;
};

// Grows groups of supervertices along their lightest outgoing edges as long as
// the collected lists prove the edge is the group's true minimum.
std::vector<CEdge> merge_collected(std::vector<Collected>& lists, Dsu& dsu) {
  std::vector<CEdge> merges;
  std::vector<std::size_t> ptr(lists.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    std::unordered_map<std::size_t, CEdge> best;
    std::unordered_map<std::size_t, EdgeKey> bound;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      const auto& l = lists[i];
      auto r = dsu.find(static_cast<std::size_t>(l.v));
      if (!l.complete) {
        auto k = l.lightest.back().key();
        auto it = bound.find(r);
        if (it == bound.end() || k < it->second) bound[r] = k;
      }
      while (ptr[i] < l.lightest.size() && dsu.find(static_cast<std::size_t>(l.lightest[ptr[i]].v)) == r) ++ptr[i];
      if (ptr[i] < l.lightest.size()) {
        const auto& e = l.lightest[ptr[i]];
        auto it = best.find(r);
        if (it == best.end() || e.key() < it->second.key()) best[r] = e;
      }
    }
    std::vector<CEdge> picks;
    for (const auto& [r, e] : best) {
      auto b = bound.find(r);
      if (b == bound.end() || !(b->second < e.key())) picks.push_back(e);
    }
    std::sort(picks.begin(), picks.end(), [](const CEdge& a, const CEdge& b) { return a.key() < b.key(); });
    for (const auto& e : picks) {
      if (dsu.unite(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v))) {
        merges.push_back(e);
        changed = true;
      }
    }
  }
  return merges;
}

std::vector<std::vector<Word>> endpoint_requests(const Shards<CEdge>& edges) {
  std::vector<std::vector<Word>> req(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (const auto& e : edges[i]) {
      req[i].push_back(e.u);
      req[i].push_back(e.v);
    }
    std::sort(req[i].begin(), req[i].end());
    req[i].erase(std::unique(req[i].begin(), req[i].end()), req[i].end());
  }
  return req;
}

void set_edge_residents(Cluster& c, const Shards<CEdge>& edges) {
  for (std::uint32_t i = 0; i < edges.size(); ++i) c.set_resident(MachineId::small(i + 1), 5 * edges[i].size());
}

}  // namespace

std::vector<CEdge> local_msf(std::uint64_t n, std::vector<CEdge> edges) {
  std::sort(edges.begin(), edges.end(), [](const CEdge& a, const CEdge& b) { return a.key() < b.key(); });
  Dsu dsu(n);
  std::vector<CEdge> out;
  for (const auto& e : edges)
    if (dsu.unite(static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v))) out.push_back(e);
  return out;
}

ContractionState initial_state(Cluster& cluster, const SimGraph& g, const Placement& placement) {
  ContractionState st;
  st.n = g.n;
  auto shards = distribute_edges(cluster, g, placement);
  st.edges.resize(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i)
    for (const auto& e : shards[i]) st.edges[i].push_back(CEdge{e.u, e.v, e.w, e.u, e.v});
  set_edge_residents(cluster, st.edges);
  st.supervertices = g.n;
  return st;
}

std::uint64_t boruvka_step_rounds(const Cluster& cluster) {
  return prim::kSortRounds + 3 + prim::disseminate_rounds(cluster) + prim::kSortRounds + 1;
}

StepStats boruvka_step(Cluster& c, ContractionState& st, std::uint64_t s) {
  const std::uint64_t start = c.rounds_used();
  const std::uint32_t k = c.small_count();
  StepStats stats;
  stats.select_count = s;
  stats.vertices_before = st.supervertices;

  // arrange directed copies by (source, edge order)
  Shards<CEdge> copies(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    for (const auto& e : st.edges[i]) {
      copies[i].push_back(e);
      copies[i].push_back(CEdge{e.v, e.u, e.w, e.ou, e.ov});
    }
  }
  auto sorted = prim::het_sort(c, std::move(copies), by_source);
  auto dir = prim::report_ranges(c, sorted, [](const CEdge& e) { return e.u; });

  // queries (v, k(v, M)) for the s lightest edges of every supervertex
  std::vector<Payload> queries(k + 1);
  std::uint64_t want = 0;
  for (const auto& pr : dir.parts) {
    std::uint64_t need = std::min<std::uint64_t>(s, pr.count);
    want += 5 * need;
    for (std::uint32_t mach = pr.first; mach <= pr.last && need > 0; ++mach) {
      auto take = std::min(need, pr.on(mach));
      if (take == 0) continue;
      queries[mach].push_back(pr.key);
      queries[mach].push_back(static_cast<Word>(take));
      need -= take;
    }
  }
  if (want + 3 * st.forest.size() > c.large_budget())
    throw CapacityError("Boruvka collection of " + std::to_string(want) + " words exceeds the large budget " +
                        std::to_string(c.large_budget()));
  c.run_round([&](Machine& m) {
    if (!m.is_large()) return;
    for (std::uint32_t i = 1; i <= k; ++i)
      if (!queries[i].empty()) m.send(MachineId::small(i), queries[i]);
  });
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& mine = sorted[m.small_index() - 1];
    Payload out;
    for (const auto& msg : m.inbox()) {
      for (std::size_t j = 0; j + 1 < msg.payload.size(); j += 2) {
        Vertex v = msg.payload[j];
        auto take = static_cast<std::size_t>(msg.payload[j + 1]);
        auto it = std::lower_bound(mine.begin(), mine.end(), v, [](const CEdge& e, Vertex x) { return e.u < x; });
        for (std::size_t q = 0; q < take && it != mine.end() && it->u == v; ++q, ++it) put(out, *it);
      }
    }
    if (!out.empty()) m.send(MachineId::large(), std::move(out));
  });

  std::map<Vertex, std::vector<CEdge>> got;
  for (const auto& msg : c.inbox(MachineId::large())) {
    Reader in(msg.payload);
    while (!in.done()) {
      auto e = get<CEdge>(in);
      got[e.u].push_back(e);
    }
  }
  std::vector<Collected> lists;
  for (auto& [v, l] : got) {
    std::sort(l.begin(), l.end(), [](const CEdge& a, const CEdge& b) { return a.key() < b.key(); });
    const auto* pr = dir.find(v);
    lists.push_back(Collected{v, std::move(l), pr->count <= s});
  }
  c.set_resident(MachineId::large(), want + 3 * st.forest.size());

  Dsu dsu(st.n);
  auto merges = merge_collected(lists, dsu);
  for (const auto& e : merges) st.forest.push_back(e.original());
  stats.merge_edges = merges.size();
  st.supervertices -= merges.size();
  stats.vertices_after = st.supervertices;

  std::map<Word, Word> renamed;
  for (const auto& l : lists) {
    auto to = static_cast<Vertex>(dsu.min_member(static_cast<std::size_t>(l.v)));
    if (to != l.v) renamed[l.v] = to;
  }
  c.set_resident(MachineId::large(), 3 * st.forest.size() + 2 * renamed.size());

  auto fresh = prim::disseminate(c, renamed, endpoint_requests(st.edges));
  Shards<CEdge> relabeled(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    for (auto e : st.edges[i]) {
      if (auto it = fresh[i].find(e.u); it != fresh[i].end()) e.u = it->second;
      if (auto it = fresh[i].find(e.v); it != fresh[i].end()) e.v = it->second;
      if (e.u == e.v) continue;
      if (e.u > e.v) std::swap(e.u, e.v);
      relabeled[i].push_back(e);
    }
  }
  st.edges.clear();

  // keep the lightest edge of every supervertex pair
  std::uint64_t total = 0;
  auto grouped = prim::het_sort(
      c, std::move(relabeled),
      [](const CEdge& a, const CEdge& b) {
        if (a.u != b.u) return a.u < b.u;
        if (a.v != b.v) return a.v < b.v;
        return a.key() < b.key();
      },
      &total);
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const std::uint32_t me = m.small_index();
    const auto& mine = grouped[me - 1];
    if (mine.empty()) return;
    for (std::uint32_t next = me + 1; next <= k; ++next) {
      if (prim::balanced_count(total, k, next) == 0) continue;
      m.send(MachineId::small(next), Payload{mine.back().u, mine.back().v});
      break;
    }
  });
  st.edges.assign(k, {});
  for (std::uint32_t i = 0; i < k; ++i) {
    Vertex pu = kNoVertex, pv = kNoVertex;
    for (const auto& msg : c.inbox(MachineId::small(i + 1))) {
      pu = msg.payload[0];
      pv = msg.payload[1];
    }
    for (const auto& e : grouped[i]) {
      if (e.u == pu && e.v == pv) continue;
      st.edges[i].push_back(e);
      pu = e.u;
      pv = e.v;
    }
    stats.edges_after += st.edges[i].size();
  }
  set_edge_residents(c, st.edges);
  c.pad_to(start, boruvka_step_rounds(c));
  stats.rounds = c.rounds_used() - start;
  return stats;
}

Result mst(Cluster& c, const SimGraph& g, const Options& opt) {
  const auto& cfg = c.config();
  const std::uint32_t k = c.small_count();
  const std::uint64_t start = c.rounds_used();
  Result res;
  auto st = initial_state(c, g, opt.placement);

  res.boruvka_steps = boruvka_step_count(cfg);
  for (std::uint64_t i = 0; i < res.boruvka_steps; ++i) res.steps.push_back(boruvka_step(c, st, select_count(cfg, i)));

  // KKT sampling with parallel repetitions
  const double p = sample_probability(cfg, res.boruvka_steps);
  res.p = p;
  const std::uint64_t reps = opt.repetitions ? opt.repetitions : 2 * c.log_n();
  res.repetitions = reps;
  const double bound = opt.alpha * static_cast<double>(st.supervertices) / p;
  res.light_bound = bound;

  std::vector<std::vector<CEdge>> samples(reps);
  std::vector<std::vector<CEdge>> sample_forest(reps);
  std::vector<std::vector<std::map<Word, FlowLabel>>> labels(reps);
  std::vector<std::uint64_t> light(reps, 0);
  const auto requests = endpoint_requests(st.edges);

  c.parallel(reps, [&](std::size_t b) {
    c.run_round([&](Machine& m) {
      if (m.is_large()) return;
      std::bernoulli_distribution coin(p);
      Payload out;
      for (const auto& e : st.edges[m.small_index() - 1])
        if (coin(m.rng())) put(out, e);
      if (!out.empty()) m.send(MachineId::large(), std::move(out));
    });
    for (const auto& msg : c.inbox(MachineId::large())) {
      Reader in(msg.payload);
      while (!in.done()) samples[b].push_back(get<CEdge>(in));
    }
    sample_forest[b] = local_msf(st.n, samples[b]);
    std::vector<Edge> fp;
    for (const auto& e : sample_forest[b]) fp.push_back(Edge{e.u, e.v, e.w});
    auto all = flow_labels(st.n, fp);
    std::map<Word, FlowLabel> x;
    std::uint64_t label_words = 0;
    for (const auto& r : requests)
      for (Word v : r)
        if (!x.count(v)) {
          label_words += all[v].words();
          x.emplace(v, all[v]);
        }
    c.set_resident(MachineId::large(), c.resident(MachineId::large()) + 5 * samples[b].size() + label_words);
    labels[b] = prim::disseminate(c, x, requests);
    for (std::uint32_t i = 0; i < k; ++i) {
      std::uint64_t w = 0;
      for (const auto& [v, l] : labels[b][i]) w += l.words();
      c.set_resident(MachineId::small(i + 1), 5 * st.edges[i].size() + w);
    }
    std::vector<std::uint64_t> counts(k, 0);
    c.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      std::uint64_t cnt = 0;
      for (const auto& e : st.edges[me - 1])
        if (is_f_light(labels[b][me - 1].at(e.u), labels[b][me - 1].at(e.v), e.w)) ++cnt;
      m.send(MachineId::large(), Payload{static_cast<Word>(cnt)});
    });
    for (const auto& msg : c.inbox(MachineId::large())) light[b] += static_cast<std::uint64_t>(msg.payload[0]);
  });

  std::uint64_t chosen = reps;
  for (std::uint64_t b = 0; b < reps; ++b)
    if (static_cast<double>(light[b]) <= bound) {
      chosen = b;
      break;
    }
  if (chosen == reps) throw RunFailed("no KKT repetition produced at most " + std::to_string(bound) + " F-light edges");
  res.successful_repetition = chosen;
  res.sample_edges = samples[chosen].size();
  res.light_edges = light[chosen];

  prim::broadcast(c, Payload{static_cast<Word>(chosen)});
  c.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const std::uint32_t me = m.small_index();
    auto r = static_cast<std::size_t>(m.inbox().front().payload[0]);
    Payload out;
    for (const auto& e : st.edges[me - 1])
      if (is_f_light(labels[r][me - 1].at(e.u), labels[r][me - 1].at(e.v), e.w)) put(out, e);
    if (!out.empty()) m.send(MachineId::large(), std::move(out));
  });
  std::vector<CEdge> pool = sample_forest[chosen];
  for (const auto& msg : c.inbox(MachineId::large())) {
    Reader in(msg.payload);
    while (!in.done()) pool.push_back(get<CEdge>(in));
  }
  c.set_resident(MachineId::large(), 3 * st.forest.size() + 5 * pool.size());
  for (const auto& e : local_msf(st.n, std::move(pool))) st.forest.push_back(e.original());

  res.forest = std::move(st.forest);
  std::sort(res.forest.begin(), res.forest.end(), [](const Edge& a, const Edge& b) { return lighter(a, b); });
  res.rounds = c.rounds_used() - start;
  return res;
}

}  // namespace hetmpc::mst
