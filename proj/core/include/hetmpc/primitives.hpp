#pragma once

// Communication primitives on the heterogeneous cluster: sorting, range
// discovery, aggregation trees, aggregation and dissemination.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "hetmpc/cluster.hpp"
#include "hetmpc/codec.hpp"
#include "hetmpc/graph.hpp"

namespace hetmpc::prim {

constexpr std::uint64_t kSortRounds = 6;

// floor(n^gamma), at least 2.
std::uint64_t branching(const Cluster& c);

// BFS-ordered b-ary tree over the contiguous machines [first, last].
struct TreeShape {
  std::uint32_t first = 1;
  std::uint32_t last = 1;
  std::uint64_t b = 2;

  std::uint32_t size() const { return last - first + 1; }
  std::uint32_t root() const { return first; }
  bool contains(std::uint32_t machine) const { return machine >= first && machine <= last; }
  std::optional<std::uint32_t> parent(std::uint32_t machine) const;
  std::vector<std::uint32_t> children(std::uint32_t machine) const;
  std::size_t depth_of(std::uint32_t machine) const;
  std::size_t depth() const { return depth_of(last); }
};

// Large-machine view of a sorted keyed layout.
struct PartRange {
  Word key = 0;
  std::uint32_t first = 0;
  std::uint32_t last = 0;
  std::uint64_t count = 0;
  std::vector<std::uint64_t> per_machine;  // counts on machines first..last

  std::uint64_t on(std::uint32_t machine) const { return contains(machine) ? per_machine[machine - first] : 0; }
  bool contains(std::uint32_t machine) const { return machine >= first && machine <= last; }
};

struct Directory {
  std::vector<PartRange> parts;  // ascending key
  const PartRange* find(Word key) const;
  std::size_t max_depth(std::uint64_t b) const;
};

// Tree memberships per small machine after tree setup.
struct Trees {
  std::vector<std::map<Word, TreeShape>> member;  // index 0 is small machine 1
  std::size_t depth = 0;                          // rounds used per tree pass
  std::uint64_t b = 2;
};

// Number of rounds one pass over the trees of this directory takes.
std::size_t tree_rounds(const Cluster& c, const Directory& dir);

std::uint64_t aggregate_rounds(const Cluster& c, bool to_large);
std::uint64_t disseminate_rounds(const Cluster& c);

namespace detail {

template <class T>
struct Tagged {
  T item;
  Word origin;
  Word index;
};

std::uint32_t owner_of_rank(std::uint64_t rank, std::uint64_t total, std::uint32_t k);

}  // namespace detail

// Sample sort over the small machines in exactly kSortRounds rounds. Afterwards
// machine j holds global ranks [floor((j-1)N/K), floor(jN/K)). Ties between
// equal items are broken by (origin machine, local index).
template <class T, class Less>
Shards<T> het_sort(Cluster& cluster, Shards<T> items, Less less, std::uint64_t* total_out = nullptr) {
  using Rec = detail::Tagged<T>;
  const std::uint32_t k = cluster.small_count();
  items.resize(k);
  auto rec_less = [&](const Rec& a, const Rec& b) {
    if (less(a.item, b.item)) return true;
    if (less(b.item, a.item)) return false;
    return std::tie(a.origin, a.index) < std::tie(b.origin, b.index);
  };
  auto put_rec = [](Payload& p, const Rec& r) {
    put(p, r.item);
    p.push_back(r.origin);
    p.push_back(r.index);
  };
  auto get_rec = [](Reader& in) {
    Rec r{get<T>(in), 0, 0};
    r.origin = in.next();
    r.index = in.next();
    return r;
  };

  std::vector<std::vector<Rec>> local(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    local[i].reserve(items[i].size());
    for (std::size_t j = 0; j < items[i].size(); ++j)
      local[i].push_back(Rec{std::move(items[i][j]), Word(i + 1), Word(j)});
    std::sort(local[i].begin(), local[i].end(), rec_less);
  }
  items.clear();
  const std::size_t per_machine = 2 * cluster.log_n();

  // 1: regular samples and counts to the large machine
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& mine = local[m.small_index() - 1];
    Payload p;
    p.push_back(static_cast<Word>(mine.size()));
    std::size_t s = std::min(per_machine, mine.size());
    for (std::size_t j = 0; j < s; ++j) put_rec(p, mine[(j + 1) * mine.size() / (s + 1)]);
    m.send(MachineId::large(), std::move(p));
  });

  std::vector<Rec> samples;
  std::size_t rec_words = 1;
  for (const auto& msg : cluster.inbox(MachineId::large())) {
    Reader in(msg.payload);
    in.next();
    while (!in.done()) samples.push_back(get_rec(in));
  }
  std::sort(samples.begin(), samples.end(), rec_less);
  for (const auto& s : samples) {
    Payload tmp;
    put_rec(tmp, s);
    rec_words = std::max(rec_words, tmp.size());
  }
  std::uint64_t buckets = k;
  buckets = std::min<std::uint64_t>(buckets, 1 + cluster.large_budget() / (2 * std::uint64_t(k) * rec_words));
  buckets = std::min<std::uint64_t>(buckets, 1 + cluster.small_budget() / (2 * rec_words));
  buckets = std::min<std::uint64_t>(buckets, samples.size() + 1);
  buckets = std::max<std::uint64_t>(buckets, 1);
  std::vector<Rec> splitters;
  for (std::uint64_t j = 1; j < buckets; ++j) splitters.push_back(samples[j * samples.size() / buckets]);
  samples.clear();

  // 2: splitters to every small machine
  cluster.run_round([&](Machine& m) {
    if (!m.is_large() || splitters.empty()) return;
    Payload p;
    for (const auto& s : splitters) put_rec(p, s);
    for (std::uint32_t i = 1; i <= k; ++i) m.send(MachineId::small(i), p);
  });

  // 3: route to bucket machines
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    std::vector<Rec> split;
    for (const auto& msg : m.inbox()) {
      Reader in(msg.payload);
      while (!in.done()) split.push_back(get_rec(in));
    }
    const std::uint64_t nb = split.size() + 1;
    std::vector<Payload> out(k);
    for (const auto& r : local[m.small_index() - 1]) {
      auto b = static_cast<std::uint64_t>(std::upper_bound(split.begin(), split.end(), r, rec_less) - split.begin());
      put_rec(out[b * k / nb], r);
    }
    for (std::uint32_t i = 0; i < k; ++i)
      if (!out[i].empty()) m.send(MachineId::small(i + 1), std::move(out[i]));
  });
  std::uint64_t received_words = 0;
  for (std::uint32_t i = 0; i < k; ++i) {
    local[i].clear();
    received_words = 0;
    for (const auto& msg : cluster.inbox(MachineId::small(i + 1))) {
      received_words += msg.payload.size();
      Reader in(msg.payload);
      while (!in.done()) local[i].push_back(get_rec(in));
    }
    std::sort(local[i].begin(), local[i].end(), rec_less);
    cluster.set_resident(MachineId::small(i + 1), received_words);
  }

  // 4: counts to the large machine
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    m.send(MachineId::large(), Payload{static_cast<Word>(local[m.small_index() - 1].size())});
  });
  std::vector<std::uint64_t> offset(k + 1, 0);
  for (const auto& msg : cluster.inbox(MachineId::large()))
    offset[msg.src.index] = static_cast<std::uint64_t>(msg.payload[0]);
  std::uint64_t total = 0;
  for (std::uint32_t i = 1; i <= k; ++i) {
    auto c = offset[i];
    offset[i] = total;
    total += c;
  }
  if (total_out) *total_out = total;

  // 5: prefix offsets back
  cluster.run_round([&](Machine& m) {
    if (!m.is_large()) return;
    for (std::uint32_t i = 1; i <= k; ++i)
      m.send(MachineId::small(i), Payload{static_cast<Word>(offset[i]), static_cast<Word>(total)});
  });

  // 6: rebalance to exact rank ranges
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& msg = m.inbox().front();
    auto off = static_cast<std::uint64_t>(msg.payload[0]);
    auto n = static_cast<std::uint64_t>(msg.payload[1]);
    std::vector<Payload> out(k);
    const auto& mine = local[m.small_index() - 1];
    for (std::size_t j = 0; j < mine.size(); ++j) put_rec(out[detail::owner_of_rank(off + j, n, k) - 1], mine[j]);
    for (std::uint32_t i = 0; i < k; ++i)
      if (!out[i].empty()) m.send(MachineId::small(i + 1), std::move(out[i]));
  });
  Shards<T> result(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    std::vector<Rec> got;
    std::uint64_t words = 0;
    for (const auto& msg : cluster.inbox(MachineId::small(i + 1))) {
      words += msg.payload.size();
      Reader in(msg.payload);
      while (!in.done()) got.push_back(get_rec(in));
    }
    std::sort(got.begin(), got.end(), rec_less);
    result[i].reserve(got.size());
    for (auto& r : got) result[i].push_back(std::move(r.item));
    cluster.set_resident(MachineId::small(i + 1), words);
  }
  return result;
}

template <class T>
Shards<T> het_sort(Cluster& cluster, Shards<T> items) {
  return het_sort(cluster, std::move(items), std::less<T>{});
}

// Item count on machine j (1-based) of the balanced layout of `total` items.
inline std::uint64_t balanced_count(std::uint64_t total, std::uint32_t k, std::uint32_t j) {
  return j * total / k - (j - 1) * total / k;
}

// Sort, then keep the first item of every run of `same` items: kSortRounds + 1
// rounds. Each machine tells the next non-empty machine its last item.
template <class T, class Less, class Same>
Shards<T> sort_unique(Cluster& cluster, Shards<T> items, Less less, Same same) {
  const std::uint32_t k = cluster.small_count();
  std::uint64_t total = 0;
  auto sorted = het_sort(cluster, std::move(items), less, &total);
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const std::uint32_t me = m.small_index();
    const auto& mine = sorted[me - 1];
    if (mine.empty()) return;
    for (std::uint32_t next = me + 1; next <= k; ++next) {
      if (balanced_count(total, k, next) == 0) continue;
      Payload p;
      put(p, mine.back());
      m.send(MachineId::small(next), std::move(p));
      break;
    }
  });
  Shards<T> out(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    std::optional<T> prev;
    for (const auto& msg : cluster.inbox(MachineId::small(i + 1))) {
      Reader in(msg.payload);
      prev = get<T>(in);
    }
    for (auto& x : sorted[i]) {
      if (prev && same(*prev, x)) continue;
      prev = x;
      out[i].push_back(std::move(x));
    }
  }
  return out;
}

// One round: every small machine reports (key, count) for each distinct key it
// holds; the large machine assembles the ranges. Items must be sorted by key.
template <class T, class KeyFn>
Directory report_ranges(Cluster& cluster, const Shards<T>& layout, KeyFn key) {
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& mine = layout[m.small_index() - 1];
    Payload p;
    for (std::size_t j = 0; j < mine.size();) {
      Word kk = key(mine[j]);
      std::size_t e = j;
      while (e < mine.size() && key(mine[e]) == kk) ++e;
      p.push_back(kk);
      p.push_back(static_cast<Word>(e - j));
      j = e;
    }
    if (!p.empty()) m.send(MachineId::large(), std::move(p));
  });
  Directory dir;
  for (const auto& msg : cluster.inbox(MachineId::large())) {
    const std::uint32_t src = msg.src.index;
    for (std::size_t j = 0; j + 1 < msg.payload.size(); j += 2) {
      Word kk = msg.payload[j];
      auto cnt = static_cast<std::uint64_t>(msg.payload[j + 1]);
      if (!dir.parts.empty() && dir.parts.back().key == kk) {
        // machines in between hold nothing (the layout may have empty machines)
        auto& pr = dir.parts.back();
        pr.per_machine.resize(src - pr.first, 0);
        pr.last = src;
        pr.count += cnt;
        pr.per_machine.push_back(cnt);
      } else {
        dir.parts.push_back(PartRange{kk, src, src, cnt, {cnt}});
      }
    }
  }
  std::sort(dir.parts.begin(), dir.parts.end(), [](const PartRange& a, const PartRange& b) { return a.key < b.key; });
  for (std::size_t i = 1; i < dir.parts.size(); ++i)
    if (dir.parts[i].key == dir.parts[i - 1].key) throw std::logic_error("report_ranges: layout is not sorted by key");
  return dir;
}

// 1 + depth rounds: the large machine sends (key, first, last, value) to the
// root of every part in `values` (all parts if values is empty and all_parts),
// and each tree forwards it down. Every member machine ends with the value and
// its tree shape.
template <class V>
std::vector<std::map<Word, V>> tree_broadcast(Cluster& cluster, const Directory& dir, const std::map<Word, V>& values,
                                              Trees* trees, std::size_t depth) {
  const std::uint32_t k = cluster.small_count();
  const std::uint64_t b = branching(cluster);
  std::vector<std::map<Word, V>> got(k);
  std::vector<std::map<Word, TreeShape>> shapes(k);
  auto encode = [](Payload& p, Word key, std::uint32_t first, std::uint32_t last, const V& v) {
    p.push_back(key);
    p.push_back(first);
    p.push_back(last);
    put(p, v);
  };
  auto absorb = [&](std::uint32_t machine) {
    for (const auto& msg : cluster.inbox(MachineId::small(machine))) {
      Reader in(msg.payload);
      while (!in.done()) {
        Word key = in.next();
        auto first = static_cast<std::uint32_t>(in.next());
        auto last = static_cast<std::uint32_t>(in.next());
        V v = get<V>(in);
        shapes[machine - 1][key] = TreeShape{first, last, b};
        got[machine - 1][key] = std::move(v);
      }
    }
  };

  cluster.run_round([&](Machine& m) {
    if (!m.is_large()) return;
    std::map<std::uint32_t, Payload> out;
    for (const auto& [key, v] : values) {
      const PartRange* pr = dir.find(key);
      if (!pr) continue;
      encode(out[pr->first], key, pr->first, pr->last, v);
    }
    for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
  });
  for (std::uint32_t i = 1; i <= k; ++i) absorb(i);

  for (std::size_t level = 0; level < depth; ++level) {
    cluster.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      std::map<std::uint32_t, Payload> out;
      for (const auto& [key, t] : shapes[me - 1]) {
        if (t.depth_of(me) != level) continue;
        const V& v = got[me - 1].at(key);
        for (auto c : t.children(me)) encode(out[c], key, t.first, t.last, v);
      }
      for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
    });
    for (std::uint32_t i = 1; i <= k; ++i) absorb(i);
  }
  if (trees) {
    trees->member = std::move(shapes);
    trees->depth = depth;
    trees->b = b;
  }
  return got;
}

// `depth` rounds: partial values flow up each tree; roots end with the
// combination of all partials of their part.
template <class V, class F>
std::vector<std::map<Word, V>> tree_reduce(Cluster& cluster, const Trees& trees, std::vector<std::map<Word, V>> partial,
                                           F combine) {
  const std::uint32_t k = cluster.small_count();
  partial.resize(k);
  for (std::size_t j = 0; j < trees.depth; ++j) {
    const std::size_t sending_depth = trees.depth - j;
    cluster.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      std::map<std::uint32_t, Payload> out;
      for (const auto& [key, v] : partial[me - 1]) {
        auto it = trees.member[me - 1].find(key);
        if (it == trees.member[me - 1].end()) continue;
        const auto& t = it->second;
        if (t.depth_of(me) != sending_depth) continue;
        auto& p = out[*t.parent(me)];
        p.push_back(key);
        put(p, v);
      }
      for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
    });
    for (std::uint32_t i = 1; i <= k; ++i) {
      for (const auto& msg : cluster.inbox(MachineId::small(i))) {
        Reader in(msg.payload);
        while (!in.done()) {
          Word key = in.next();
          V v = get<V>(in);
          auto [it, fresh] = partial[i - 1].try_emplace(key, v);
          if (!fresh) it->second = combine(it->second, v);
        }
      }
    }
  }
  // only roots keep their totals
  for (std::uint32_t i = 1; i <= k; ++i) {
    for (auto it = partial[i - 1].begin(); it != partial[i - 1].end();) {
      auto t = trees.member[i - 1].find(it->first);
      if (t == trees.member[i - 1].end() || t->second.root() != i)
        it = partial[i - 1].erase(it);
      else
        ++it;
    }
  }
  return partial;
}

// `depth` rounds: values held by tree roots flow down to every member.
template <class V>
std::vector<std::map<Word, V>> tree_push(Cluster& cluster, const Trees& trees,
                                         std::vector<std::map<Word, V>> at_roots) {
  const std::uint32_t k = cluster.small_count();
  at_roots.resize(k);
  for (std::size_t level = 0; level < trees.depth; ++level) {
    cluster.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      std::map<std::uint32_t, Payload> out;
      for (const auto& [key, v] : at_roots[me - 1]) {
        auto it = trees.member[me - 1].find(key);
        if (it == trees.member[me - 1].end() || it->second.depth_of(me) != level) continue;
        for (auto child : it->second.children(me)) {
          auto& p = out[child];
          p.push_back(key);
          put(p, v);
        }
      }
      for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
    });
    for (std::uint32_t i = 1; i <= k; ++i)
      for (const auto& msg : cluster.inbox(MachineId::small(i))) {
        Reader in(msg.payload);
        while (!in.done()) {
          Word key = in.next();
          at_roots[i - 1][key] = get<V>(in);
        }
      }
  }
  return at_roots;
}

// One round: per-machine maps are sent to the large machine and merged there.
template <class V, class F>
std::map<Word, V> gather_to_large(Cluster& cluster, const std::vector<std::map<Word, V>>& per_machine, F combine) {
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const auto& mine = per_machine[m.small_index() - 1];
    if (mine.empty()) return;
    Payload p;
    for (const auto& [key, v] : mine) {
      p.push_back(key);
      put(p, v);
    }
    m.send(MachineId::large(), std::move(p));
  });
  std::map<Word, V> out;
  for (const auto& msg : cluster.inbox(MachineId::large())) {
    Reader in(msg.payload);
    while (!in.done()) {
      Word key = in.next();
      V v = get<V>(in);
      auto [it, fresh] = out.try_emplace(key, v);
      if (!fresh) it->second = combine(it->second, v);
    }
  }
  return out;
}

template <class V>
struct KeyValue {
  Word key;
  V value;
};

}  // namespace hetmpc::prim

namespace hetmpc {
template <class V>
struct Codec<prim::KeyValue<V>> {
  static void put(Payload& out, const prim::KeyValue<V>& kv) {
    out.push_back(kv.key);
    Codec<V>::put(out, kv.value);
  }
  static prim::KeyValue<V> get(Reader& in) {
    Word k = in.next();
    V v = Codec<V>::get(in);
    return {k, std::move(v)};
  }
};
}  // namespace hetmpc

namespace hetmpc::prim {

// Combines all values sharing a key with an associative, commutative f.
// Sort, range report, root notice, tree setup, up pass: 8 + 2D rounds, plus one
// more when the totals are forwarded to the large machine.
template <class V, class F>
std::map<Word, V> aggregate(Cluster& cluster, Shards<KeyValue<V>> elements, F combine) {
  const std::uint64_t start = cluster.rounds_used();
  auto sorted =
      het_sort(cluster, std::move(elements), [](const KeyValue<V>& a, const KeyValue<V>& b) { return a.key < b.key; });
  Directory dir = report_ranges(cluster, sorted, [](const KeyValue<V>& kv) { return kv.key; });
  std::map<Word, Word> all;
  for (const auto& pr : dir.parts) all.emplace(pr.key, 0);
  Trees trees;
  tree_broadcast(cluster, dir, all, &trees, tree_rounds(cluster, dir));
  std::vector<std::map<Word, V>> partial(cluster.small_count());
  for (std::uint32_t i = 0; i < cluster.small_count(); ++i)
    for (auto& kv : sorted[i]) {
      auto [it, fresh] = partial[i].try_emplace(kv.key, kv.value);
      if (!fresh) it->second = combine(it->second, kv.value);
    }
  auto roots = tree_reduce(cluster, trees, std::move(partial), combine);
  auto out = gather_to_large(cluster, roots, combine);
  const std::uint64_t used = cluster.rounds_used() - start;
  if (used < aggregate_rounds(cluster, true)) cluster.pad_to(start, aggregate_rounds(cluster, true));
  return out;
}

// Delivers x[key] (held by the large machine) to every small machine that asks
// for key. Request sort, range report, root notice, down pass, reply:
// 9 + D rounds. Keys without a value produce no messages.
template <class V>
std::vector<std::map<Word, V>> disseminate(Cluster& cluster, const std::map<Word, V>& x,
                                           const std::vector<std::vector<Word>>& requests) {
  const std::uint64_t start = cluster.rounds_used();
  const std::uint32_t k = cluster.small_count();
  Shards<std::pair<Word, Word>> req(k);
  for (std::uint32_t i = 0; i < k && i < requests.size(); ++i) {
    std::vector<Word> keys = requests[i];
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (Word key : keys) req[i].emplace_back(key, Word(i + 1));
  }
  auto sorted = het_sort(cluster, std::move(req));
  Directory dir = report_ranges(cluster, sorted, [](const std::pair<Word, Word>& r) { return r.first; });
  std::map<Word, V> wanted;
  for (const auto& pr : dir.parts) {
    auto it = x.find(pr.key);
    if (it != x.end()) wanted.emplace(pr.key, it->second);
  }
  auto held = tree_broadcast(cluster, dir, wanted, nullptr, tree_rounds(cluster, dir));
  cluster.run_round([&](Machine& m) {
    if (m.is_large()) return;
    const std::uint32_t me = m.small_index();
    std::map<std::uint32_t, Payload> out;
    for (const auto& [key, origin] : sorted[me - 1]) {
      auto it = held[me - 1].find(key);
      if (it == held[me - 1].end()) continue;
      auto& p = out[static_cast<std::uint32_t>(origin)];
      p.push_back(key);
      put(p, it->second);
    }
    for (auto& [dst, p] : out) m.send(MachineId::small(dst), std::move(p));
  });
  std::vector<std::map<Word, V>> result(k);
  for (std::uint32_t i = 1; i <= k; ++i) {
    for (const auto& msg : cluster.inbox(MachineId::small(i))) {
      Reader in(msg.payload);
      while (!in.done()) {
        Word key = in.next();
        result[i - 1][key] = get<V>(in);
      }
    }
  }
  const std::uint64_t used = cluster.rounds_used() - start;
  if (used < disseminate_rounds(cluster)) cluster.pad_to(start, disseminate_rounds(cluster));
  return result;
}

// One round: the same payload from the large machine to every small machine.
void broadcast(Cluster& cluster, const Payload& payload);

// 2 * depth rounds over a b-ary tree on the small machines: every small
// machine learns the sum of all values.
std::uint64_t small_allreduce_sum(Cluster& cluster, const std::vector<std::uint64_t>& values);

}  // namespace hetmpc::prim
