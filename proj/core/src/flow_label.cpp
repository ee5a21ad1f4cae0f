#include "hetmpc/flow_label.hpp"

#include <stdexcept>

namespace hetmpc {

std::vector<FlowLabel> flow_labels(std::uint64_t n, const std::vector<Edge>& forest) {
  struct Arc {
    std::size_t to;
    Weight w;
  };
  std::vector<std::vector<Arc>> adj(n);
  for (const auto& e : forest) {
    if (e.u < 0 || e.v < 0 || static_cast<std::uint64_t>(e.u) >= n || static_cast<std::uint64_t>(e.v) >= n)
      throw std::out_of_range("flow_labels: edge endpoint out of range");
    adj[e.u].push_back({static_cast<std::size_t>(e.v), e.w});
    adj[e.v].push_back({static_cast<std::size_t>(e.u), e.w});
  }
  std::vector<FlowLabel> labels(n);
  std::vector<char> removed(n, 0);
  std::vector<std::size_t> sub(n, 0), par(n, 0), order;
  std::vector<Weight> best(n, 0);
  std::vector<std::size_t> pending;
  for (std::size_t s = 0; s < n; ++s) {
    if (!labels[s].entries.empty()) continue;
    pending.push_back(s);
    while (!pending.empty()) {
      std::size_t start = pending.back();
      pending.pop_back();

      // collect the component of start, DFS order
      order.clear();
      order.push_back(start);
      par[start] = start;
      for (std::size_t i = 0; i < order.size(); ++i) {
        auto x = order[i];
        for (const auto& a : adj[x])
          if (!removed[a.to] && a.to != par[x]) {
            par[a.to] = x;
            order.push_back(a.to);
          }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        sub[*it] = 1;
        for (const auto& a : adj[*it])
          if (!removed[a.to] && a.to != par[*it]) sub[*it] += sub[a.to];
      }
      const std::size_t total = order.size();
      std::size_t centroid = total;
      for (auto x : order) {
        std::size_t worst = total - sub[x];
        for (const auto& a : adj[x])
          if (!removed[a.to] && a.to != par[x]) worst = std::max(worst, sub[a.to]);
        if (2 * worst <= total && (centroid == total || x < centroid)) centroid = x;
      }

      // max weight from the centroid to every vertex of the component
      order.clear();
      order.push_back(centroid);
      par[centroid] = centroid;
      best[centroid] = 0;
      for (std::size_t i = 0; i < order.size(); ++i) {
        auto x = order[i];
        labels[x].entries.push_back({static_cast<Vertex>(centroid), best[x]});
        for (const auto& a : adj[x])
          if (!removed[a.to] && a.to != par[x]) {
            par[a.to] = x;
            best[a.to] = std::max(best[x], a.w);
            order.push_back(a.to);
          }
      }
      removed[centroid] = 1;
      for (const auto& a : adj[centroid])
        if (!removed[a.to]) pending.push_back(a.to);
    }
  }
  return labels;
}

std::variant<Weight, DifferentComponents> decode(const FlowLabel& a, const FlowLabel& b) {
  if (a.entries.empty() || b.entries.empty()) throw std::invalid_argument("decode: empty label");
  if (a.entries[0].separator != b.entries[0].separator) return DifferentComponents{};
  std::size_t j = 0;
  while (j + 1 < a.entries.size() && j + 1 < b.entries.size() &&
         a.entries[j + 1].separator == b.entries[j + 1].separator)
    ++j;
  return std::max(a.entries[j].max_weight, b.entries[j].max_weight);
}

bool is_f_light(const FlowLabel& a, const FlowLabel& b, Weight w) {
  auto r = decode(a, b);
  if (std::holds_alternative<DifferentComponents>(r)) return true;
  return w <= std::get<Weight>(r);
}

}  // namespace hetmpc
