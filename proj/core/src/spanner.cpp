#include "hetmpc/spanner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "hetmpc/errors.hpp"
#include "hetmpc/primitives.hpp"

namespace hetmpc::spanner {

namespace {

using Words = std::vector<Word>;

std::uint32_t floor_log2(std::uint64_t x) { return 63u - static_cast<std::uint32_t>(__builtin_clzll(x)); }

std::vector<std::vector<Word>> endpoint_requests(const Shards<Edge>& shards) {
  std::vector<std::vector<Word>> req(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i)
    for (const auto& e : shards[i]) {
      req[i].push_back(e.u);
      req[i].push_back(e.v);
    }
  return req;
}

std::vector<std::vector<Word>> endpoint_requests(const Shards<Link>& shards) {
  std::vector<std::vector<Word>> req(shards.size());
  for (std::size_t i = 0; i < shards.size(); ++i)
    for (const auto& l : shards[i]) {
      req[i].push_back(l.c);
      req[i].push_back(l.d);
    }
  return req;
}

Words bit_or(const Words& a, const Words& b) {
  Words out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (i < a.size() ? a[i] : 0) | (i < b.size() ? b[i] : 0);
  return out;
}

bool bit(const Words& w, std::size_t b) {
  return b / 64 < w.size() && ((static_cast<std::uint64_t>(w[b / 64]) >> (b % 64)) & 1u);
}

void set_bit(Words& w, std::size_t b) {
  w[b / 64] = static_cast<Word>(static_cast<std::uint64_t>(w[b / 64]) | (std::uint64_t{1} << (b % 64)));
}

// (top, key, neighbour): larger top, then smaller key, then smaller neighbour
Words better(const Words& a, const Words& b) {
  if (a[0] != b[0]) return a[0] > b[0] ? a : b;
  return std::tie(a[1], a[2]) <= std::tie(b[1], b[2]) ? a : b;
}

bool link_less(const Link& a, const Link& b) { return a < b; }
bool same_link(const Link& a, const Link& b) { return a.level == b.level && a.c == b.c && a.d == b.d; }

}  // namespace

std::vector<Link> Decomposition::level_links(std::uint32_t i) const {
  std::vector<Link> out;
  for (const auto& s : links)
    for (const auto& l : s)
      if (l.level == Word(i)) out.push_back(l);
  return out;
}

Decomposition clustering_graphs(Cluster& c, const Shards<Edge>& shards, std::uint64_t n) {
  const std::uint64_t start = c.rounds_used();
  const std::uint32_t k = c.small_count();
  Decomposition d;
  d.n = n;

  Shards<prim::KeyValue<Word>> ones(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& e : shards[i]) {
      ones[i].push_back({e.u, 1});
      ones[i].push_back({e.v, 1});
    }
  auto deg = prim::aggregate(c, std::move(ones), [](Word a, Word b) { return a + b; });
  d.degree.assign(n, 0);
  for (const auto& [v, x] : deg) {
    d.degree[static_cast<std::size_t>(v)] = static_cast<std::uint64_t>(x);
    d.delta = std::max(d.delta, d.degree[static_cast<std::size_t>(v)]);
  }
  const std::uint32_t levels = d.delta <= 1 ? 1 : static_cast<std::uint32_t>(ceil_log2(d.delta));
  d.levels = levels;
  const std::uint32_t trials = static_cast<std::uint32_t>(ceil_log2(n));
  const std::size_t bits = std::size_t{levels} * trials;
  const std::size_t mask_words = (bits + 63) / 64;
  auto at = [&](std::uint32_t level, std::uint32_t trial) { return std::size_t{level} * trials + trial; };

  // trial samples D_i^j, sent with the degree to every edge holder
  auto rng = c.local_rng(MachineId::large());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Words> sampled(n, Words(mask_words, 0));
  for (std::uint64_t v = 0; v < n; ++v)
    for (std::uint32_t i = 0; i < levels; ++i) {
      const double q = i == 0 ? 1.0 : std::min(1.0, double(i) / std::ldexp(1.0, int(i)));
      for (std::uint32_t j = 0; j < trials; ++j)
        if (q >= 1.0 || coin(rng) < q) set_bit(sampled[v], at(i, j));
    }
  std::map<Word, Words> info;
  for (std::uint64_t v = 0; v < n; ++v) {
    if (d.degree[v] == 0) continue;
    Words w{Word(d.degree[v])};
    w.insert(w.end(), sampled[v].begin(), sampled[v].end());
    info.emplace(Word(v), std::move(w));
  }
  c.set_resident(MachineId::large(), n * (mask_words + 2));
  auto held = prim::disseminate(c, info, endpoint_requests(shards));

  // which vertices have a sampled neighbour, per (level, trial)
  Shards<prim::KeyValue<Words>> cover(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& e : shards[i]) {
      const Words& mu = held[i].at(e.u);
      const Words& mv = held[i].at(e.v);
      cover[i].push_back({e.u, Words(mv.begin() + 1, mv.end())});
      cover[i].push_back({e.v, Words(mu.begin() + 1, mu.end())});
    }
  auto covered = prim::aggregate(c, std::move(cover), bit_or);

  // patch every trial into a hitting set, keep the smallest trial per level
  std::vector<std::int32_t> top(n, 0);
  d.hitting_size.assign(levels, 0);
  for (std::uint32_t i = 0; i < levels; ++i) {
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    std::vector<char> chosen;
    for (std::uint32_t j = 0; j < trials; ++j) {
      std::vector<char> in(n, 0);
      std::uint64_t size = 0;
      for (std::uint64_t v = 0; v < n; ++v) {
        bool s = bit(sampled[v], at(i, j));
        if (!s && d.degree[v] >= (std::uint64_t{1} << i)) {
          auto it = covered.find(Word(v));
          s = it == covered.end() || !bit(it->second, at(i, j));
        }
        in[v] = s;
        size += s;
      }
      if (size < best) {
        best = size;
        chosen = std::move(in);
      }
    }
    d.hitting_size[i] = best;
    for (std::uint64_t v = 0; v < n; ++v)
      if (chosen[v]) top[v] = std::max<std::int32_t>(top[v], std::int32_t(i));
  }

  std::map<Word, Word> tops;
  for (std::uint64_t v = 0; v < n; ++v)
    if (d.degree[v] > 0) tops.emplace(Word(v), top[v]);
  c.set_resident(MachineId::large(), n * 4);
  auto top_held = prim::disseminate(c, tops, endpoint_requests(shards));

  // best neighbour in the highest B_i, random among ties
  Shards<prim::KeyValue<Words>> cand(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    auto r = c.local_rng(MachineId::small(i + 1));
    for (const auto& e : shards[i]) {
      cand[i].push_back({e.u, Words{top_held[i].at(e.v), Word(r() >> 1), e.v}});
      cand[i].push_back({e.v, Words{top_held[i].at(e.u), Word(r() >> 1), e.u}});
    }
  }
  auto best = prim::aggregate(c, std::move(cand), better);
  d.sigma.resize(n);
  d.level_of.resize(n);
  for (std::uint64_t v = 0; v < n; ++v) {
    d.sigma[v] = Vertex(v);
    d.level_of[v] = static_cast<std::uint32_t>(top[v]);
    auto it = best.find(Word(v));
    if (it == best.end() || it->second[0] <= top[v]) continue;
    d.sigma[v] = it->second[2];
    d.level_of[v] = static_cast<std::uint32_t>(it->second[0]);
    d.stars.push_back(normalized(Edge{Vertex(v), d.sigma[v], 1}));
  }
  std::sort(d.stars.begin(), d.stars.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });

  std::map<Word, std::pair<Word, Word>> centre;
  for (std::uint64_t v = 0; v < n; ++v)
    if (d.degree[v] > 0) centre.emplace(Word(v), std::pair<Word, Word>{d.sigma[v], Word(d.degree[v])});
  c.set_resident(MachineId::large(), n * 4 + 3 * d.stars.size());
  auto cen = prim::disseminate(c, centre, endpoint_requests(shards));

  Shards<Link> links(k);
  for (std::uint32_t i = 0; i < k; ++i)
    for (const auto& e : shards[i]) {
      auto [su, du] = cen[i].at(e.u);
      auto [sv, dv] = cen[i].at(e.v);
      if (su == sv) continue;
      auto level = std::min<std::uint32_t>(levels - 1, floor_log2(static_cast<std::uint64_t>(std::min(du, dv))));
      auto w = normalized(e);
      links[i].push_back(Link{Word(level), std::min(su, sv), std::max(su, sv), w.u, w.v});
    }
  d.links = prim::sort_unique(c, std::move(links), link_less, same_link);
  for (std::uint32_t i = 0; i < k; ++i) c.set_resident(MachineId::small(i + 1), 5 * d.links[i].size());

  d.vertices.assign(levels, {});
  for (std::uint64_t v = 0; v < n; ++v) d.vertices[0].push_back(Vertex(v));
  for (std::uint32_t i = 1; i < levels; ++i) {
    std::vector<Vertex> vs;
    for (std::uint64_t v = 0; v < n; ++v)
      if (d.degree[v] >= (std::uint64_t{1} << i)) vs.push_back(d.sigma[v]);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    d.vertices[i] = std::move(vs);
  }
  d.rounds = c.rounds_used() - start;
  return d;
}

std::uint64_t baswana_sen_rounds(const Cluster& c) {
  return 1 + prim::disseminate_rounds(c) + prim::aggregate_rounds(c, true);
}

BsResult modified_baswana_sen(Cluster& c, const Shards<Link>& a, const std::vector<Vertex>& vertices, std::uint32_t k,
                              double p) {
  if (k == 0) throw ConfigError("spanner: k must be at least 1");
  const std::uint64_t start = c.rounds_used();
  const std::uint32_t m = c.small_count();
  BsResult res;

  // 1: sampled subgraphs G_1..G_k to the large machine
  c.run_round([&](Machine& mach) {
    if (mach.is_large()) return;
    const auto& mine = a[mach.small_index() - 1];
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Payload out;
    for (std::uint32_t j = 1; j <= k; ++j)
      for (const auto& l : mine)
        if (p >= 1.0 || coin(mach.rng()) < p) {
          out.push_back(j);
          put(out, l);
        }
    if (!out.empty()) mach.send(MachineId::large(), std::move(out));
  });

  std::unordered_map<Vertex, std::size_t> pos;
  for (std::size_t i = 0; i < vertices.size(); ++i) pos.emplace(vertices[i], i);
  const std::size_t nv = vertices.size();
  std::vector<std::vector<std::vector<std::pair<Vertex, Link>>>> adj(
      k + 1, std::vector<std::vector<std::pair<Vertex, Link>>>(nv));
  for (const auto& msg : c.inbox(MachineId::large())) {
    Reader in(msg.payload);
    while (!in.done()) {
      auto j = static_cast<std::uint32_t>(in.next());
      auto l = get<Link>(in);
      auto pc = pos.find(l.c), pd = pos.find(l.d);
      if (pc == pos.end() || pd == pos.end()) throw std::logic_error("baswana-sen: link endpoint outside V_A");
      adj[j][pc->second].emplace_back(l.d, l);
      adj[j][pd->second].emplace_back(l.c, l);
      ++res.sampled;
    }
  }
  for (auto& level : adj)
    for (auto& nb : level)
      std::sort(nb.begin(), nb.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  // clustering on the large machine
  auto rng = c.local_rng(MachineId::large());
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double q = nv == 0 ? 0.0 : std::pow(double(nv), -1.0 / double(k));
  std::vector<Vertex> cur(vertices);
  res.history.assign(nv, {});
  res.removed_at.assign(nv, 0);
  for (std::size_t v = 0; v < nv; ++v) res.history[v].push_back(vertices[v]);
  std::vector<char> centre(nv, 1);
  std::vector<Link> chosen;
  for (std::uint32_t j = 1; j <= k; ++j) {
    std::vector<char> next(nv, 0);
    if (j < k)
      for (std::size_t v = 0; v < nv; ++v) next[v] = centre[v] && coin(rng) < q;
    std::vector<Vertex> upd(nv, kNoVertex);
    for (std::size_t v = 0; v < nv; ++v) {
      if (cur[v] == kNoVertex) continue;
      if (next[pos.at(cur[v])]) {
        upd[v] = cur[v];
        continue;
      }
      for (const auto& [u, l] : adj[j][v]) {
        Vertex cu = cur[pos.at(u)];
        if (cu != kNoVertex && next[pos.at(cu)]) {
          upd[v] = cu;
          chosen.push_back(l);
          break;
        }
      }
      if (upd[v] == kNoVertex) res.removed_at[v] = j;
    }
    cur = std::move(upd);
    centre = std::move(next);
    for (std::size_t v = 0; v < nv; ++v)
      if (cur[v] != kNoVertex) res.history[v].push_back(cur[v]);
  }

  std::map<Word, Words> hist;
  std::uint64_t words = 5 * res.sampled;
  for (std::size_t v = 0; v < nv; ++v) {
    Words w{Word(res.removed_at[v])};
    w.insert(w.end(), res.history[v].begin(), res.history[v].end());
    words += w.size() + 1;
    hist.emplace(vertices[v], std::move(w));
  }
  c.set_resident(MachineId::large(), words);
  auto held = prim::disseminate(c, hist, endpoint_requests(a));

  // one edge per (removed vertex, adjacent cluster of the previous level)
  const auto n = static_cast<Word>(c.config().n);
  Shards<prim::KeyValue<Words>> cand(m);
  for (std::uint32_t i = 0; i < m; ++i)
    for (const auto& l : a[i])
      for (int side = 0; side < 2; ++side) {
        Vertex v = side ? l.d : l.c, u = side ? l.c : l.d;
        const Words& hv = held[i].at(v);
        const Words& hu = held[i].at(u);
        const Word t = hv[0];
        if (hu[0] < t) continue;
        const Word cluster = hu[static_cast<std::size_t>(t)];
        cand[i].push_back({v * n + cluster, Words{u, l.wu, l.wv, l.c, l.d}});
      }
  auto picked = prim::aggregate(c, std::move(cand), [](const Words& x, const Words& y) { return x <= y ? x : y; });
  for (const auto& [key, w] : picked) chosen.push_back(Link{0, w[3], w[4], w[1], w[2]});

  std::sort(chosen.begin(), chosen.end(),
            [](const Link& x, const Link& y) { return std::tie(x.c, x.d) < std::tie(y.c, y.d); });
  chosen.erase(
      std::unique(chosen.begin(), chosen.end(), [](const Link& x, const Link& y) { return x.c == y.c && x.d == y.d; }),
      chosen.end());
  res.edges = std::move(chosen);
  c.set_resident(MachineId::large(), words + 5 * res.edges.size());
  const std::uint64_t used = c.rounds_used() - start;
  if (used < baswana_sen_rounds(c)) c.pad_to(start, baswana_sen_rounds(c));
  res.rounds = c.rounds_used() - start;
  return res;
}

std::vector<Link> greedy_spanner(std::vector<Link> a, std::uint32_t k) {
  std::sort(a.begin(), a.end());
  const std::uint32_t limit = 2 * k - 1;
  std::unordered_map<Vertex, std::vector<Vertex>> adj;
  std::vector<Link> out;
  for (const auto& l : a) {
    if (!out.empty() && out.back().c == l.c && out.back().d == l.d) continue;
    std::unordered_map<Vertex, std::uint32_t> dist{{l.c, 0}};
    std::deque<Vertex> queue{l.c};
    bool near = false;
    while (!queue.empty() && !near) {
      Vertex x = queue.front();
      queue.pop_front();
      const auto dx = dist[x];
      if (dx == limit) continue;
      auto it = adj.find(x);
      if (it == adj.end()) continue;
      for (Vertex y : it->second) {
        if (dist.count(y)) continue;
        if (y == l.d) {
          near = true;
          break;
        }
        dist[y] = dx + 1;
        queue.push_back(y);
      }
    }
    if (near) continue;
    adj[l.c].push_back(l.d);
    adj[l.d].push_back(l.c);
    out.push_back(l);
  }
  return out;
}

std::vector<Edge> combine_spanners(const Decomposition& d, const std::vector<std::vector<Link>>& per_level) {
  std::vector<Edge> h = d.stars;
  for (const auto& level : per_level)
    for (const auto& l : level) {
      auto a = d.sigma.at(static_cast<std::size_t>(l.wu)), b = d.sigma.at(static_cast<std::size_t>(l.wv));
      if (std::min(a, b) != l.c || std::max(a, b) != l.d)
        throw std::logic_error("combine_spanners: link without a matching witness edge");
      h.push_back(l.witness());
    }
  std::sort(h.begin(), h.end(), [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  h.erase(std::unique(h.begin(), h.end()), h.end());
  return h;
}

double level_probability(std::uint32_t k, std::uint32_t i) {
  if (i == 0) return 1.0;
  const double x = double(k) * double(k) * std::pow(double(i), 1.0 + 1.0 / double(k)) / std::ldexp(1.0, int(i));
  return std::min(1.0, x);
}

bool size_claim_holds(double l, double x) {
  if (x <= 1.0) return false;
  return std::log(l) + l * std::log1p(-1.0 / x) < std::log(x);
}

Result spanner(Cluster& c, const SimGraph& g, std::uint32_t k, const Options& opt) {
  if (k == 0) throw ConfigError("spanner: k must be at least 1");
  if (g.n >= 2 && double(k) > std::log2(double(g.n)) + 1e-9) throw ConfigError("spanner: k must not exceed log2 n");
  if (g.weighted) throw ConfigError("spanner: the graph must be unweighted");
  const std::uint64_t start = c.rounds_used();
  const std::uint32_t m = c.small_count();
  auto shards = distribute_edges(c, g, opt.placement);
  auto dec = clustering_graphs(c, shards, g.n);

  Result res;
  res.delta = dec.delta;
  res.stars = dec.stars.size();
  res.levels.resize(dec.levels);
  std::vector<std::vector<Link>> per_level(dec.levels);
  const std::uint64_t section = c.rounds_used();
  c.parallel(dec.levels, [&](std::size_t idx) {
    const auto i = static_cast<std::uint32_t>(idx);
    auto& rep = res.levels[i];
    rep.level = i;
    rep.p = level_probability(k, i);
    rep.whole = i == 0 || rep.p >= 1.0;
    rep.vertices = dec.vertices[i].size();
    Shards<Link> mine(m);
    for (std::uint32_t j = 0; j < m; ++j)
      for (const auto& l : dec.links[j])
        if (l.level == Word(i)) mine[j].push_back(l);
    for (const auto& s : mine) rep.links += s.size();
    if (rep.whole) {
      c.run_round([&](Machine& mach) {
        if (mach.is_large()) return;
        const auto& ls = mine[mach.small_index() - 1];
        if (ls.empty()) return;
        Payload p;
        for (const auto& l : ls) put(p, l);
        mach.send(MachineId::large(), std::move(p));
      });
      std::vector<Link> all;
      for (const auto& msg : c.inbox(MachineId::large())) {
        Reader in(msg.payload);
        while (!in.done()) all.push_back(get<Link>(in));
      }
      c.set_resident(MachineId::large(), 5 * all.size());
      per_level[i] = greedy_spanner(std::move(all), k);
    } else {
      per_level[i] = modified_baswana_sen(c, mine, dec.vertices[i], k, rep.p).edges;
    }
    rep.spanner_links = per_level[i].size();
  });
  const std::uint64_t used = c.rounds_used() - section;
  if (used < baswana_sen_rounds(c)) c.pad_to(section, baswana_sen_rounds(c));

  res.edges = combine_spanners(dec, per_level);
  res.rounds = c.rounds_used() - start;
  return res;
}

}  // namespace hetmpc::spanner
