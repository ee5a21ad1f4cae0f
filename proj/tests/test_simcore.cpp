#include <sstream>

#include "doctest.h"
#include "hetmpc/cluster.hpp"
#include "hetmpc/errors.hpp"
#include "hetmpc/generators.hpp"
#include "hetmpc/graph.hpp"
#include "json.hpp"

using namespace hetmpc;

namespace {

ClusterConfig cfg(std::uint64_t n, std::uint64_t m, double c = 1.0, int e = 0) {
  ClusterConfig k;
  k.n = n;
  k.m = m;
  k.gamma = 0.5;
  k.polylog_c = c;
  k.polylog_e = e;
  k.seed = 7;
  return k;
}

}  // namespace

TEST_CASE("cluster sizes and budgets") {
  Cluster c(cfg(16, 64));
  CHECK(c.small_count() == 16);
  CHECK(c.small_budget() == 4);
  CHECK(c.large_budget() == 16);

  auto k = cfg(16, 64);
  k.superlinear = Rational{1, 4};
  Cluster s(k);
  CHECK(s.large_budget() == 32);

  auto p = cfg(256, 4096, 2.0, 3);
  Cluster q(p);
  CHECK(q.small_count() == 256);
  CHECK(q.small_budget() == 2 * 16 * 512);
  CHECK(q.large_budget() == 2 * 256 * 512);
}

TEST_CASE("config validation") {
  auto k = cfg(16, 64);
  k.gamma = 1.0;
  CHECK_THROWS_AS(Cluster{k}, ConfigError);
  k = cfg(1, 4);
  CHECK_THROWS_AS(Cluster{k}, ConfigError);
  CHECK(parse_rational("2/4").num == 1);
  CHECK(parse_rational("2/4").den == 2);
  CHECK_THROWS_AS(parse_rational("x"), ConfigError);
  CHECK(tree_depth_bound(0.5) == 2);
  CHECK(tree_depth_bound(1.0 / 3.0) == 3);
}

TEST_CASE("send over budget is a SendBudget violation") {
  auto k = cfg(16, 64, 4.0, 0);  // small budget 16
  Cluster strict(k);
  REQUIRE(strict.small_budget() == 16);
  auto step = [](Machine& m) {
    if (m.id() == MachineId::small(1)) m.send(MachineId::large(), Payload(17, 1));
  };
  try {
    strict.run_round(step);
    FAIL("expected BudgetViolation");
  } catch (const BudgetViolation& v) {
    REQUIRE(v.violations().size() == 1);
    CHECK(v.violations()[0].machine == MachineId::small(1));
    CHECK(v.violations()[0].kind == ViolationKind::SendBudget);
    CHECK(v.violations()[0].words == 17);
  }

  Cluster tolerant(k, Strictness::Tolerant);
  tolerant.run_round(step);
  tolerant.run_round([](Machine&) {});
  CHECK(tolerant.rounds_used() == 2);
  CHECK(tolerant.violations().size() == 1);

  Cluster recv(k, Strictness::Tolerant);
  recv.run_round([](Machine& m) {
    if (!m.is_large() && m.small_index() <= 5) m.send(MachineId::small(6), Payload(4, 0));
  });
  REQUIRE(recv.violations().size() == 1);
  CHECK(recv.violations()[0].kind == ViolationKind::ReceiveBudget);
  CHECK(recv.violations()[0].machine == MachineId::small(6));

  Cluster res(k, Strictness::Tolerant);
  res.set_resident(MachineId::small(2), 17);
  res.run_round([](Machine&) {});
  REQUIRE(res.violations().size() == 1);
  CHECK(res.violations()[0].kind == ViolationKind::ResidentBudget);
}

TEST_CASE("messages arrive sorted by sender then send order") {
  Cluster c(cfg(16, 64, 8.0, 0));
  c.run_round([](Machine& m) {
    if (m.is_large()) return;
    auto i = m.small_index();
    if (i % 3 == 0) {
      m.send(MachineId::small(1), Payload{Word(i), 0});
      m.send(MachineId::small(1), Payload{Word(i), 1});
    }
  });
  auto in = c.inbox(MachineId::small(1));
  REQUIRE(in.size() == 10);
  for (std::size_t j = 1; j < in.size(); ++j) {
    auto a = std::pair{in[j - 1].src.index, in[j - 1].seq};
    auto b = std::pair{in[j].src.index, in[j].seq};
    CHECK(a < b);
  }
  CHECK(in[0].payload == Payload{3, 0});
  CHECK(in[1].payload == Payload{3, 1});
}

TEST_CASE("serial and threaded schedulers agree") {
  auto run = [](Scheduler s) {
    Cluster c(cfg(16, 64, 16.0, 0), Strictness::Strict, s);
    std::vector<Payload> seen;
    for (int r = 0; r < 3; ++r) {
      c.run_round([](Machine& m) {
        Word sum = 0;
        for (const auto& msg : m.inbox()) sum += msg.payload[0];
        Word x = static_cast<Word>(m.rng()() % 1000) + sum;
        m.send(MachineId::small(1 + (m.id().index + 3) % 16), Payload{x});
      });
    }
    for (std::uint32_t i = 1; i <= 16; ++i)
      for (const auto& msg : c.inbox(MachineId::small(i))) seen.push_back(msg.payload);
    return seen;
  };
  CHECK(run(Scheduler::Serial) == run(Scheduler::Threads));
}

TEST_CASE("per-machine randomness is reproducible and distinct") {
  auto draw = [](std::uint64_t seed) {
    auto k = cfg(16, 64);
    k.seed = seed;
    Cluster c(k);
    std::vector<std::uint64_t> xs(17);
    c.run_round([&](Machine& m) { xs[m.id().index] = m.rng()(); });
    return xs;
  };
  auto a = draw(1), b = draw(1), d = draw(2);
  CHECK(a == b);
  CHECK(a != d);
  CHECK(a[1] != a[2]);
}

TEST_CASE("parallel branches share round indices") {
  Cluster c(cfg(16, 64, 4.0, 0));
  c.idle_rounds(2);
  c.parallel(3, [&](std::size_t b) {
    for (std::size_t r = 0; r < 2 + b; ++r)
      c.run_round([](Machine& m) {
        if (m.small_index() == 1) m.send(MachineId::small(2), Payload{1, 2});
      });
  });
  CHECK(c.rounds_used() == 6);
  const auto& t = c.telemetry();
  REQUIRE(t.size() == 6);
  CHECK(t[2].machines[1].sent == 6);
  CHECK(t[3].machines[1].sent == 6);
  CHECK(t[4].machines[1].sent == 4);
  CHECK(t[5].machines[1].sent == 2);

  // five branches each sending 4 words: 20 > 16 on the merged row
  Cluster strict(cfg(16, 64, 4.0, 0));
  CHECK_THROWS_AS(strict.parallel(5,
                                  [&](std::size_t) {
                                    strict.run_round([](Machine& m) {
                                      if (m.small_index() == 1) m.send(MachineId::small(2), Payload(4, 0));
                                    });
                                  }),
                  BudgetViolation);
}

TEST_CASE("telemetry export") {
  Cluster c(cfg(16, 64, 4.0, 0), Strictness::Tolerant);
  c.run_round([](Machine& m) {
    if (m.small_index() == 3) m.send(MachineId::large(), Payload(5, 0));
  });
  auto doc = nlohmann::json::parse(telemetry_json(c.report()));
  CHECK(doc["rounds_used"] == 1);
  CHECK(doc["rounds"][0]["machines"].size() == 17);
  CHECK(doc["rounds"][0]["machines"][3]["sent"] == 5);
  CHECK(doc["rounds"][0]["machines"][0]["received"] == 5);
  CHECK(doc["violations"].empty());
}

TEST_CASE("graph parsing") {
  std::istringstream ok("# tiny\n3 2 w\n0 1 5\n2 1 7 # trailing\n");
  auto g = parse_graph(ok);
  CHECK(g.n == 3);
  CHECK(g.weighted);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[1] == Edge{1, 2, 7});

  std::istringstream dup("3 2\n0 1\n1 0\n");
  try {
    parse_graph(dup);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream loop("3 1\n1 1\n");
  CHECK_THROWS_AS(parse_graph(loop), ParseError);
  std::istringstream range("3 1\n0 3\n");
  CHECK_THROWS_AS(parse_graph(range), ParseError);
  std::istringstream bad("3 1\n0 x\n");
  CHECK_THROWS_AS(parse_graph(bad), ParseError);

  std::ostringstream out;
  write_graph(out, g);
  std::istringstream back(out.str());
  CHECK(out.str().rfind("3 2 w\n", 0) == 0);
  auto h = parse_graph(back);
  CHECK(h.edges == g.edges);
  CHECK(h.weighted);

  std::istringstream numeric("2 1 1\n0 1 4\n");
  CHECK(parse_graph(numeric).weighted);
  std::istringstream junk("2 1 w x\n0 1 4\n");
  CHECK_THROWS_AS(parse_graph(junk), ParseError);
}

TEST_CASE("edge placement") {
  SimGraph g = path_graph(9);  // 8 edges
  auto k = cfg(16, 8, 4.0, 0);
  Cluster c(k);
  REQUIRE(c.small_count() == 2);
  auto rr = distribute_edges(c, g, {PlacementKind::RoundRobin, 0, 0});
  CHECK(rr[0].size() == 4);
  CHECK(rr[1].size() == 4);

  auto four = cfg(4, 8, 8.0, 0);  // n^0.5 = 2 -> K = 4, budget 16
  Cluster c4(four);
  REQUIRE(c4.small_count() == 4);
  auto adv = distribute_edges(c4, g, {PlacementKind::Adversarial, 0, 3});
  CHECK(adv[0].size() == 3);
  CHECK(adv[1].size() == 3);
  CHECK(adv[2].size() == 2);
  CHECK(adv[3].empty());
  CHECK(c4.resident(MachineId::small(1)) == 9);

  auto tight = cfg(4, 8, 2.0, 0);  // budget 4 words: one edge does not fit with 2 per shard
  Cluster c5(tight);
  CHECK_THROWS_AS(distribute_edges(c5, g, {PlacementKind::RoundRobin, 0, 0}), CapacityError);

  auto s1 = distribute_edges(c4, g, {PlacementKind::Seeded, 5, 0});
  auto s2 = distribute_edges(c4, g, {PlacementKind::Seeded, 5, 0});
  CHECK(s1 == s2);
}

TEST_CASE("generators") {
  auto g = gnm(50, 200, 3);
  CHECK(g.m() == 200);
  auto h = gnm(50, 200, 3);
  CHECK(g.edges == h.edges);
  CHECK_NOTHROW(validate_simple(g));
  CHECK_THROWS_AS(gnm(10, 46, 1), ConfigError);
  CHECK(complete_graph(10).m() == 45);
  CHECK(two_cycles(12).m() == 12);
  CHECK(grid_graph(3, 4).m() == 17);
  GenSpec s;
  s.kind = "gnm";
  s.n = 20;
  s.m = 30;
  s.weighted = true;
  s.wmax = 5;
  auto w = generate(s);
  for (const auto& e : w.edges) {
    CHECK(e.w >= 1);
    CHECK(e.w <= 5);
  }
}
