#include "hetmpc/primitives.hpp"

#include <cmath>

namespace hetmpc::prim {

std::uint64_t branching(const Cluster& c) {
  double x = std::pow(static_cast<double>(c.config().n), c.config().gamma);
  auto b = snap_floor(x);
  return std::max<std::uint64_t>(2, b);
}

std::optional<std::uint32_t> TreeShape::parent(std::uint32_t machine) const {
  std::uint32_t pos = machine - first;
  if (pos == 0) return std::nullopt;
  return first + static_cast<std::uint32_t>((pos - 1) / b);
}

std::vector<std::uint32_t> TreeShape::children(std::uint32_t machine) const {
  std::vector<std::uint32_t> out;
  std::uint64_t pos = machine - first;
  for (std::uint64_t c = pos * b + 1; c <= pos * b + b && c < size(); ++c)
    out.push_back(first + static_cast<std::uint32_t>(c));
  return out;
}

std::size_t TreeShape::depth_of(std::uint32_t machine) const {
  std::uint64_t pos = machine - first;
  std::size_t d = 0;
  while (pos > 0) {
    pos = (pos - 1) / b;
    ++d;
  }
  return d;
}

const PartRange* Directory::find(Word key) const {
  auto it = std::lower_bound(parts.begin(), parts.end(), key, [](const PartRange& p, Word k) { return p.key < k; });
  if (it == parts.end() || it->key != key) return nullptr;
  return &*it;
}

std::size_t Directory::max_depth(std::uint64_t b) const {
  std::size_t d = 0;
  for (const auto& p : parts) d = std::max(d, TreeShape{p.first, p.last, b}.depth());
  return d;
}

std::size_t tree_rounds(const Cluster& c, const Directory& dir) {
  return std::max(tree_depth_bound(c.config().gamma), dir.max_depth(branching(c)));
}

std::uint64_t aggregate_rounds(const Cluster& c, bool to_large) {
  return kSortRounds + 2 + 2 * tree_depth_bound(c.config().gamma) + (to_large ? 1 : 0);
}

std::uint64_t disseminate_rounds(const Cluster& c) { return kSortRounds + 3 + tree_depth_bound(c.config().gamma); }

namespace detail {

std::uint32_t owner_of_rank(std::uint64_t rank, std::uint64_t total, std::uint32_t k) {
  // largest j with floor(j * total / k) <= rank, 0-based, as a 1-based machine
  auto j = static_cast<std::uint32_t>(((static_cast<unsigned __int128>(rank) + 1) * k - 1) / total);
  return j + 1;
}

}  // namespace detail

void broadcast(Cluster& cluster, const Payload& payload) {
  cluster.run_round([&](Machine& m) {
    if (!m.is_large()) return;
    for (std::uint32_t i = 1; i <= cluster.small_count(); ++i) m.send(MachineId::small(i), payload);
  });
}

std::uint64_t small_allreduce_sum(Cluster& cluster, const std::vector<std::uint64_t>& values) {
  const std::uint32_t k = cluster.small_count();
  TreeShape t{1, k, branching(cluster)};
  const std::size_t depth = t.depth();
  std::vector<std::uint64_t> acc(values.begin(), values.end());
  acc.resize(k, 0);
  for (std::size_t j = 0; j < depth; ++j) {
    const std::size_t sending = depth - j;
    cluster.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      if (t.depth_of(me) != sending) return;
      m.send(MachineId::small(*t.parent(me)), Payload{static_cast<Word>(acc[me - 1])});
    });
    for (std::uint32_t i = 1; i <= k; ++i)
      for (const auto& msg : cluster.inbox(MachineId::small(i)))
        acc[i - 1] += static_cast<std::uint64_t>(msg.payload[0]);
  }
  for (std::size_t level = 0; level < depth; ++level) {
    cluster.run_round([&](Machine& m) {
      if (m.is_large()) return;
      const std::uint32_t me = m.small_index();
      if (t.depth_of(me) != level) return;
      for (auto c : t.children(me)) m.send(MachineId::small(c), Payload{static_cast<Word>(acc[me - 1])});
    });
    for (std::uint32_t i = 1; i <= k; ++i)
      for (const auto& msg : cluster.inbox(MachineId::small(i)))
        acc[i - 1] = static_cast<std::uint64_t>(msg.payload[0]);
  }
  return acc[0];
}

}  // namespace hetmpc::prim
