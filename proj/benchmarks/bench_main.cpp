#include <benchmark/benchmark.h>

#include <random>

#include "hetmpc/connectivity.hpp"
#include "hetmpc/flow_label.hpp"
#include "hetmpc/generators.hpp"
#include "hetmpc/mst.hpp"
#include "hetmpc/primitives.hpp"

using namespace hetmpc;
using namespace hetmpc::conn;

namespace {

void BM_HetSort(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  auto g = gnm(n, 8 * n, 1);
  auto cfg = config_for(g, 0.5, 4.0, 3, 1);
  for (auto _ : state) {
    Cluster c(cfg);
    std::mt19937_64 rng(7);
    Shards<Word> items(c.small_count());
    for (std::uint64_t i = 0; i < 8 * n; ++i) items[i % items.size()].push_back(static_cast<Word>(rng() % (n * n)));
    auto out = prim::het_sort(c, std::move(items));
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 8 * n));
}
BENCHMARK(BM_HetSort)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Mst(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  auto g = gnm(n, 16 * n, 3);
  assign_weights(g, 0, 4);
  auto cfg = config_for(g, 0.5, 4.0, 3, 1);
  for (auto _ : state) {
    Cluster c(cfg);
    auto r = mst::mst(c, g);
    benchmark::DoNotOptimize(r.forest);
  }
}
BENCHMARK(BM_Mst)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_FlowLabels(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  std::mt19937_64 rng(5);
  std::vector<Edge> tree;
  for (std::uint64_t v = 1; v < n; ++v)
    tree.push_back(
        normalized({static_cast<Vertex>(rng() % v), static_cast<Vertex>(v), static_cast<Weight>(rng() % 1000)}));
  for (auto _ : state) {
    auto labels = flow_labels(n, tree);
    benchmark::DoNotOptimize(labels);
  }
}
BENCHMARK(BM_FlowLabels)->Arg(1024)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_FlowDecode(benchmark::State& state) {
  const std::uint64_t n = 16384;
  std::mt19937_64 rng(5);
  std::vector<Edge> tree;
  for (std::uint64_t v = 1; v < n; ++v)
    tree.push_back(
        normalized({static_cast<Vertex>(rng() % v), static_cast<Vertex>(v), static_cast<Weight>(rng() % 1000)}));
  auto labels = flow_labels(n, tree);
  for (auto _ : state) {
    auto r = decode(labels[rng() % n], labels[rng() % n]);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_FlowDecode);

void BM_SketchUpdate(benchmark::State& state) {
  const std::uint64_t n = 4096;
  auto shape = shape_for(n);
  std::mt19937_64 rng(9);
  auto keys = HashKeys::generate(shape, rng);
  L0Sketch s(shape);
  for (auto _ : state) {
    auto a = static_cast<Vertex>(rng() % n), b = static_cast<Vertex>(rng() % n);
    if (a == b) continue;
    s.add(keys, coordinate(n, a, b), a < b ? 1 : -1);
  }
  benchmark::DoNotOptimize(s);
}
BENCHMARK(BM_SketchUpdate);

void BM_SketchSample(benchmark::State& state) {
  const std::uint64_t n = 4096;
  auto shape = shape_for(n);
  std::mt19937_64 rng(11);
  auto keys = HashKeys::generate(shape, rng);
  L0Sketch s(shape);
  for (int i = 0; i < state.range(0); ++i) s.add(keys, coordinate(n, 0, 1 + i), 1);
  std::uint32_t r = 0;
  for (auto _ : state) {
    auto x = l0_sample(s, keys, r);
    r = (r + 1) % shape.instances;
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_SketchSample)->Arg(1)->Arg(64)->Arg(2048);

}  // namespace
BENCHMARK_MAIN();
