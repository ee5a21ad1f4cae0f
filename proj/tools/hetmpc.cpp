#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hetmpc/cluster.hpp"
#include "hetmpc/connectivity.hpp"
#include "hetmpc/errors.hpp"
#include "hetmpc/generators.hpp"
#include "hetmpc/graph.hpp"
#include "hetmpc/matching.hpp"
#include "hetmpc/mst.hpp"
#include "hetmpc/spanner.hpp"
#include "verify.hpp"

using namespace hetmpc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kFailed = 1, kUsage = 2, kParse = 3, kCapacity = 4, kRunFailed = 5 };

void error_json(const std::string& kind, const std::string& message, int code, const json& extra = {}) {
  json e = {{"error", kind}, {"message", message}, {"exit_code", code}};
  if (extra.is_object()) e.update(extra);
  std::cerr << e.dump() << "\n";
}

struct GenArgs {
  GenSpec spec;
  std::string out;
};

struct RunArgs {
  std::string algo;
  std::string graph;
  GenSpec gen;
  bool use_gen = false;
  std::uint64_t graph_seed = 0;  // 0: use the run seed
  std::uint32_t k = 0;
  double eps = 0.0;
  double gamma = 0.5;
  double polylog_c = 4.0;
  int polylog_e = 3;
  std::string f;
  std::vector<std::string> seeds{"1"};
  bool verify = false;
  bool tolerant = false;
  std::string placement = "seeded";
  bool threads = false;
  unsigned jobs = 1;
  std::string out;
  std::string report;
  std::string telemetry;
  bool inject_overflow = false;
  double super_c = 4.0;
  double approx_tol = 0.2;
};

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
  std::vector<std::uint64_t> seeds;
  for (const auto& it : items) {
    auto dots = it.find("..");
    try {
      if (dots == std::string::npos) {
        seeds.push_back(std::stoull(it));
      } else {
        auto a = std::stoull(it.substr(0, dots)), b = std::stoull(it.substr(dots + 2));
        if (a > b) throw ConfigError("empty seed range '" + it + "'");
        for (auto s = a; s <= b; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + it + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("no seeds");
  return seeds;
}

// out.txt -> out.s7.txt when several seeds share one path.
std::string with_seed(const std::string& path, std::uint64_t seed, bool multi) {
  if (!multi) return path;
  fs::path p(path);
  auto name = p.stem().string() + ".s" + std::to_string(seed) + p.extension().string();
  return (p.parent_path() / name).string();
}

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json telemetry_summary(const RunReport& r) {
  std::uint64_t large_in = 0, large_out = 0, small_out = 0, small_in = 0, large_res = 0, small_res = 0;
  for (const auto& row : r.telemetry)
    for (std::size_t i = 0; i < row.machines.size(); ++i) {
      const auto& t = row.machines[i];
      if (i == 0) {
        large_in = std::max(large_in, t.received);
        large_out = std::max(large_out, t.sent);
        large_res = std::max(large_res, t.resident);
      } else {
        small_in = std::max(small_in, t.received);
        small_out = std::max(small_out, t.sent);
        small_res = std::max(small_res, t.resident);
      }
    }
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"round", x.round},
                 {"machine", to_string(x.machine)},
                 {"kind", to_string(x.kind)},
                 {"words", x.words},
                 {"budget", x.budget}});
  return {
      {"small_machines", r.small_machines}, {"small_budget", r.small_budget},         {"large_budget", r.large_budget},
      {"total_words", r.total_words()},     {"peak_large_received", large_in},        {"peak_large_sent", large_out},
      {"peak_large_resident", large_res},   {"peak_small_received", small_in},        {"peak_small_sent", small_out},
      {"peak_small_resident", small_res},   {"violation_count", r.violations.size()}, {"violations", std::move(v)}};
}

json edge_stats(const std::vector<Edge>& es) {
  std::uint64_t w = 0;
  for (const auto& e : es) w += static_cast<std::uint64_t>(e.w);
  return {{"edges", es.size()}, {"weight", w}};
}

void write_edges(const std::string& path, std::uint64_t n, const std::vector<Edge>& es, bool weighted) {
  SimGraph out;
  out.n = n;
  out.edges = es;
  out.weighted = weighted;
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  write_graph(f, out);
}

struct RunOutcome {
  json record;
  int code = kOk;
};

SimGraph load_graph(const RunArgs& a, std::uint64_t seed) {
  if (!a.use_gen) return read_graph_file(a.graph);
  auto spec = a.gen;
  spec.seed = a.graph_seed ? a.graph_seed : seed;
  return generate(spec);
}

RunOutcome run_one(const RunArgs& a, const SimGraph* shared, std::uint64_t seed, bool multi) {
  RunOutcome o;
  json& rec = o.record;
  rec["seed"] = seed;
  std::optional<Cluster> cluster;
  auto fail = [&](const std::string& kind, const std::string& msg, int code) {
    rec["status"] = kind == "budget_violation" ? "violation" : "error";
    rec["error"] = {{"kind", kind}, {"message", msg}};
    if (cluster) {
      rec["rounds_used"] = cluster->rounds_used();
      rec["telemetry"] = telemetry_summary(cluster->report());
    }
    o.code = code;
    error_json(kind, msg, code, {{"seed", seed}});
  };
  try {
    SimGraph owned;
    const SimGraph& g = shared ? *shared : (owned = load_graph(a, seed));
    rec["graph"] = {{"n", g.n}, {"m", g.m()}, {"weighted", g.weighted}};

    auto cfg = config_for(g, a.gamma, a.polylog_c, a.polylog_e, seed);
    if (!a.f.empty()) cfg.superlinear = parse_rational(a.f);
    cluster.emplace(cfg, a.tolerant ? Strictness::Tolerant : Strictness::Strict,
                    a.threads ? Scheduler::Threads : Scheduler::Serial);
    Cluster& c = *cluster;
    Placement placement{parse_placement(a.placement), seed, 0};

    json metrics;
    verify::Check check;
    std::vector<Edge> output;
    bool has_output = false, weighted_output = false;

    if (a.algo == "mst" || a.algo == "mst-super") {
      mst::Options opt;
      opt.placement = placement;
      auto r = mst::mst(c, g, opt);
      metrics = edge_stats(r.forest);
      metrics["boruvka_steps"] = r.boruvka_steps;
      metrics["sample_p"] = r.p;
      metrics["repetitions"] = r.repetitions;
      metrics["light_edges"] = r.light_edges;
      if (a.verify) check = verify::mst(g, r.forest);
      output = std::move(r.forest);
      has_output = true;
      weighted_output = g.weighted;
    } else if (a.algo == "spanner") {
      spanner::Options opt;
      opt.placement = placement;
      auto r = spanner::spanner(c, g, a.k, opt);
      metrics = {{"size", r.edges.size()}, {"stars", r.stars}, {"delta", r.delta}, {"levels", r.levels.size()}};
      if (a.verify) {
        auto bound = 6 * static_cast<std::int64_t>(a.k) - 1;
        check = verify::spanner(g, r.edges, bound);
        metrics["stretch"] = verify::max_stretch(g, r.edges);
      }
      output = std::move(r.edges);
      has_output = true;
    } else if (a.algo == "matching") {
      matching::Options opt;
      opt.placement = placement;
      auto r = matching::maximal_matching(c, g, opt);
      metrics = {{"size", r.matching.size()},
                 {"phase1_size", r.m1},
                 {"phase2_size", r.m2},
                 {"phase3_size", r.m3},
                 {"high_vertices", r.high.size()},
                 {"residual_edges", r.residual},
                 {"phase1_iterations", r.phase1_iterations},
                 {"setup_rounds", r.setup_rounds},
                 {"phase1_rounds", r.phase1_rounds},
                 {"post_rounds", r.post_rounds},
                 {"attempts", r.attempts}};
      if (a.verify) check = verify::matching(g, r.matching);
      output = std::move(r.matching);
      has_output = true;
    } else if (a.algo == "matching-super") {
      matching::Options opt;
      opt.placement = placement;
      opt.super_c = a.super_c;
      auto r = matching::matching_superlinear(c, g, opt);
      metrics = {
          {"size", r.matching.size()}, {"depth", r.depth}, {"level_edges", r.level_edges}, {"attempts", r.attempts}};
      if (a.verify) check = verify::matching(g, r.matching);
      output = std::move(r.matching);
      has_output = true;
    } else if (a.algo == "cc") {
      conn::Options opt;
      opt.placement = placement;
      auto r = conn::connected_components(c, g, opt);
      metrics = {{"components", r.count}, {"phases", r.phases}, {"attempts", r.attempts}};
      if (a.verify) check = verify::components(g, r.component);
      if (!a.out.empty()) {
        std::ofstream f(with_seed(a.out, seed, multi));
        if (!f) throw ConfigError("cannot write '" + a.out + "'");
        f << "# vertex component\n";
        for (std::uint64_t v = 0; v < g.n; ++v) f << v << ' ' << r.component[v] << '\n';
      }
    } else if (a.algo == "mst-approx") {
      conn::Options opt;
      opt.placement = placement;
      auto r = conn::mst_weight_estimate(c, g, a.eps, opt);
      metrics = {{"estimate", r.estimate}, {"thresholds", r.r + 1}, {"cc", r.cc}};
      if (a.verify) {
        double w = 0;
        for (const auto& e : verify::kruskal(g)) w += static_cast<double>(e.w);
        double ratio = w > 0 ? r.estimate / w : (r.estimate == 0 ? 1.0 : 0.0);
        metrics["exact_weight"] = w;
        metrics["ratio"] = ratio;
        std::ostringstream d;
        d << "ratio " << ratio << " tolerance " << a.approx_tol;
        check = {ratio >= 1.0 - a.approx_tol && ratio <= 1.0 + a.approx_tol, d.str()};
      }
      if (!a.out.empty()) {
        std::ofstream f(with_seed(a.out, seed, multi));
        if (!f) throw ConfigError("cannot write '" + a.out + "'");
        f << r.estimate << '\n';
      }
    }

    if (a.inject_overflow) {
      // small machine 1 sends one word more than its budget to the large machine
      const auto words = c.small_budget() + 1;
      c.run_round([words](Machine& m) {
        if (!m.is_large() && m.small_index() == 1) m.send(MachineId::large(), Payload(words, 0));
      });
      c.clear_inboxes();
    }

    if (has_output && !a.out.empty()) write_edges(with_seed(a.out, seed, multi), g.n, output, weighted_output);
    if (!a.telemetry.empty()) {
      std::ofstream f(with_seed(a.telemetry, seed, multi));
      if (!f) throw ConfigError("cannot write '" + a.telemetry + "'");
      f << telemetry_json(c.report(), 2) << '\n';
    }

    auto report = c.report();
    rec["rounds_used"] = report.rounds_used;
    rec["telemetry"] = telemetry_summary(report);
    rec["metrics"] = std::move(metrics);
    if (a.verify) rec["verify"] = {{"passed", check.passed}, {"detail", check.detail}};
    const bool clean = report.violations.empty();
    if (!clean || !check.passed) o.code = kFailed;
    rec["status"] = !clean ? "violation" : (check.passed ? "ok" : "verify_failed");
  } catch (const BudgetViolation& e) {
    fail("budget_violation", e.what(), kFailed);
  } catch (const ParseError& e) {
    fail("parse", e.what(), kParse);
  } catch (const CapacityError& e) {
    fail("capacity", e.what(), kCapacity);
  } catch (const RunFailed& e) {
    fail("run_failed", e.what(), kRunFailed);
  } catch (const ConfigError& e) {
    fail("config", e.what(), kUsage);
  } catch (const std::invalid_argument& e) {
    fail("config", e.what(), kUsage);
  }
  return o;
}

void write_csv(const std::string& path, const std::string& algo, const json& runs) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << "seed,algo,status,n,m,rounds_used,total_words,violations,metric,value,verify\n";
  for (const auto& r : runs) {
    std::string metric, value;
    if (r.contains("metrics")) {
      const auto& m = r["metrics"];
      for (const char* key : {"weight", "size", "components", "estimate"})
        if (m.contains(key)) {
          metric = key;
          value = m[key].dump();
          break;
        }
    }
    auto get = [&](const char* a, const char* b) -> std::string {
      if (!r.contains(a)) return "";
      if (!b) return r[a].dump();
      return r[a].contains(b) ? r[a][b].dump() : "";
    };
    std::string verdict = r.contains("verify") ? (r["verify"]["passed"].get<bool>() ? "pass" : "fail") : "";
    f << r["seed"].get<std::uint64_t>() << ',' << algo << ',' << r["status"].get<std::string>() << ','
      << get("graph", "n") << ',' << get("graph", "m") << ',' << get("rounds_used", nullptr) << ','
      << get("telemetry", "total_words") << ',' << get("telemetry", "violation_count") << ',' << metric << ',' << value
      << ',' << verdict << '\n';
  }
}

int run_command(const RunArgs& a) {
  static const std::vector<std::string> algos{"mst", "mst-super", "spanner", "matching", "matching-super",
                                              "cc",  "mst-approx"};
  std::vector<std::uint64_t> seeds;
  try {
    if (std::find(algos.begin(), algos.end(), a.algo) == algos.end())
      throw ConfigError("unknown algorithm '" + a.algo + "'");
    if (a.use_gen == !a.graph.empty()) throw ConfigError("give exactly one of --graph and --gen");
    if (a.algo == "spanner" && a.k == 0) throw ConfigError("spanner needs --k >= 1");
    if (a.algo == "mst-approx" && !(a.eps > 0)) throw ConfigError("mst-approx needs --eps > 0");
    if ((a.algo == "mst-super" || a.algo == "matching-super") && a.f.empty()) throw ConfigError(a.algo + " needs --f");
    if (!a.f.empty() && !(parse_rational(a.f).value() > 0)) throw ConfigError("--f must be positive");
    parse_placement(a.placement);
    seeds = parse_seeds(a.seeds);
  } catch (const std::invalid_argument& e) {
    error_json("usage", e.what(), kUsage);
    return kUsage;
  }

  std::optional<SimGraph> shared;
  if (!a.use_gen || a.graph_seed) {
    try {
      shared = load_graph(a, seeds.front());
    } catch (const ParseError& e) {
      error_json("parse", e.what(), kParse);
      return kParse;
    } catch (const std::invalid_argument& e) {
      error_json("usage", e.what(), kUsage);
      return kUsage;
    } catch (const std::runtime_error& e) {
      error_json("io", e.what(), kParse);
      return kParse;
    }
  }

  const bool multi = seeds.size() > 1;
  std::vector<RunOutcome> outcomes(seeds.size());
  const unsigned jobs = std::max(1u, a.jobs);
  for (std::size_t base = 0; base < seeds.size(); base += jobs) {
    std::vector<std::future<RunOutcome>> batch;
    for (std::size_t i = base; i < std::min(seeds.size(), base + jobs); ++i)
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_one, std::cref(a),
                                 shared ? &*shared : nullptr, seeds[i], multi));
    for (std::size_t i = 0; i < batch.size(); ++i) outcomes[base + i] = batch[i].get();
  }

  int code = kOk;
  json runs = json::array();
  for (auto& o : outcomes) {
    if (code == kOk) code = o.code;
    runs.push_back(std::move(o.record));
  }

  json spec = {{"algo", a.algo},           {"gamma", a.gamma},      {"polylog_c", a.polylog_c},
               {"polylog_e", a.polylog_e}, {"strict", !a.tolerant}, {"placement", a.placement},
               {"verify", a.verify},       {"seeds", seeds}};
  if (a.use_gen) {
    spec["gen"] = {{"kind", a.gen.kind}, {"n", a.gen.n},       {"m", a.gen.m},
                   {"p", a.gen.p},       {"rows", a.gen.rows}, {"weighted", a.gen.weighted},
                   {"wmax", a.gen.wmax}};
    if (a.graph_seed) spec["gen"]["seed"] = a.graph_seed;
  } else {
    spec["graph"] = a.graph;
  }
  if (a.k) spec["k"] = a.k;
  if (a.eps > 0) spec["eps"] = a.eps;
  if (!a.f.empty()) spec["f"] = a.f;
  if (a.inject_overflow) spec["inject_overflow"] = true;

  json doc = {
      {"generated_at", utc_now()}, {"experiment", spec}, {"runs", runs}, {"passed", code == kOk}, {"exit_code", code}};
  try {
    if (!a.report.empty()) {
      std::ofstream f(a.report);
      if (!f) throw ConfigError("cannot write '" + a.report + "'");
      f << doc.dump(2) << '\n';
      write_csv(fs::path(a.report).replace_extension(".csv").string(), a.algo, runs);
    } else {
      std::cout << doc.dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    error_json("io", e.what(), kUsage);
    return kUsage;
  }
  return code;
}

int gen_command(const GenArgs& a) {
  try {
    auto g = generate(a.spec);
    if (a.out.empty()) {
      write_graph(std::cout, g);
    } else {
      std::ofstream f(a.out);
      if (!f) throw ConfigError("cannot write '" + a.out + "'");
      write_graph(f, g);
    }
  } catch (const std::invalid_argument& e) {
    error_json("usage", e.what(), kUsage);
    return kUsage;
  }
  return kOk;
}

void add_gen_options(CLI::App* cmd, GenSpec& g) {
  cmd->add_option("--n", g.n, "vertices");
  cmd->add_option("--m", g.m, "edges (gnm)");
  cmd->add_option("--p", g.p, "edge probability (gnp)");
  cmd->add_option("--rows", g.rows, "grid rows; 0 picks a square-ish grid");
  cmd->add_flag("--weighted", g.weighted, "draw weights");
  cmd->add_option("--wmax", g.wmax, "weights uniform in [1, wmax]; 0 means n^3");
}

std::string option_name(const std::string& arg) {
  auto name = arg.substr(2, arg.find('=') == std::string::npos ? std::string::npos : arg.find('=') - 2);
  if (name == "seeds") return "seed";
  if (name == "tolerant") return "strict";
  return name;
}

// Expands `run --config FILE` into flags placed before the command-line
// ones; keys given on the command line are dropped from the file.
std::vector<std::string> with_config(std::vector<std::string> args) {
  if (args.size() < 2 || args[1] != "run") return args;
  std::string file;
  std::set<std::string> given;
  std::vector<std::string> rest;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const auto& x = args[i];
    if (x == "--config" && i + 1 < args.size()) {
      file = args[++i];
    } else if (x.rfind("--config=", 0) == 0) {
      file = x.substr(9);
    } else {
      if (x.rfind("--", 0) == 0) given.insert(option_name(x));
      rest.push_back(x);
    }
  }
  if (file.empty()) return args;
  std::vector<std::string> out{args[0], "run"};
  for (const auto& item : CLI::ConfigTOML().from_file(file)) {
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "run")) continue;
    const auto flag = "--" + item.name;
    if (item.name.empty() || item.name == "config" || given.count(option_name(flag))) continue;
    if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
      if (item.inputs[0] == "true")
        out.push_back(flag);
      else if (item.name == "strict")
        out.push_back("--tolerant");
      else if (item.name == "tolerant")
        out.push_back("--strict");
      continue;
    }
    out.push_back(flag);
    std::string joined;
    for (const auto& v : item.inputs) joined += (joined.empty() ? "" : ",") + v;
    out.push_back(joined);
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous MPC simulator"};
  app.require_subcommand(1);

  GenArgs ga;
  auto* gen = app.add_subcommand("gen", "generate a graph file");
  gen->add_option("--kind", ga.spec.kind, "gnp, gnm, two-cycles, grid, star, complete, cycle, path")->required();
  add_gen_options(gen, ga.spec);
  gen->add_option("--seed", ga.spec.seed, "generator seed");
  gen->add_option("--out", ga.out, "output file (stdout if absent)");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run an algorithm on one graph for one or more seeds");
  std::string config_path;
  run->add_option("--config", config_path, "key = value file; command-line flags win");
  run->add_option("--algo", ra.algo, "mst, mst-super, spanner, matching, matching-super, cc, mst-approx")->required();
  run->add_option("--graph", ra.graph, "graph file");
  run->add_option("--gen", ra.gen.kind, "generator kind, instead of --graph");
  add_gen_options(run, ra.gen);
  run->add_option("--graph-seed", ra.graph_seed, "fixed generator seed; default: the run seed");
  run->add_option("--k", ra.k, "spanner parameter");
  run->add_option("--eps", ra.eps, "mst-approx threshold step");
  run->add_option("--gamma", ra.gamma, "small machine memory exponent");
  run->add_option("--polylog-c", ra.polylog_c, "budget constant c");
  run->add_option("--polylog-e", ra.polylog_e, "budget log exponent e");
  run->add_option("--f", ra.f, "large machine exponent for the -super variants, e.g. 1/2");
  run->add_option("--seed,--seeds", ra.seeds, "seeds: list and/or ranges a..b")->delimiter(',');
  run->add_flag("--verify", ra.verify, "compare with an oracle");
  run->add_flag(
      "--strict,!--tolerant", [&ra](std::int64_t n) { ra.tolerant = n < 0; },
      "strict (default) throws on a budget violation; tolerant records and continues");
  run->add_option("--placement", ra.placement, "seeded, round-robin or adversarial");
  run->add_flag("--threads", ra.threads, "run machine steps on a thread pool");
  run->add_option("--jobs", ra.jobs, "seeds run concurrently");
  run->add_option("--out", ra.out, "algorithm output; per-seed suffix for several seeds");
  run->add_option("--report", ra.report, "report JSON; a CSV summary is written beside it");
  run->add_option("--telemetry", ra.telemetry, "full per-round telemetry JSON");
  run->add_flag("--inject-overflow", ra.inject_overflow, "append one round that overflows a send budget");
  run->add_option("--super-c", ra.super_c, "matching-super stop constant");
  run->add_option("--approx-tol", ra.approx_tol, "mst-approx verify tolerance on the ratio");

  try {
    auto args = with_config(std::vector<std::string>(argv, argv + argc));
    std::vector<char*> ptrs;
    for (auto& x : args) ptrs.push_back(x.data());
    app.parse(static_cast<int>(ptrs.size()), ptrs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_json("usage", e.what(), kUsage);
    return kUsage;
  }

  if (*gen) return gen_command(ga);
  ra.use_gen = run->count("--gen") > 0;
  return run_command(ra);
}
