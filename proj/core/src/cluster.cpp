#include "hetmpc/cluster.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include "hetmpc/errors.hpp"

namespace hetmpc {

std::string to_string(MachineId id) { return id.is_large() ? std::string("L") : "S" + std::to_string(id.index); }

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::SendBudget:
      return "SendBudget";
    case ViolationKind::ReceiveBudget:
      return "ReceiveBudget";
    case ViolationKind::ResidentBudget:
      return "ResidentBudget";
  }
  return "?";
}

namespace {

std::string describe(const std::vector<Violation>& v) {
  std::string s = std::to_string(v.size()) + " budget violation(s)";
  if (!v.empty()) {
    const auto& f = v.front();
    s += ", first: round " + std::to_string(f.round) + " machine " + to_string(f.machine) + " " + to_string(f.kind) +
         " " + std::to_string(f.words) + " > " + std::to_string(f.budget);
  }
  return s;
}

}  // namespace

BudgetViolation::BudgetViolation(std::vector<Violation> v)
    : std::runtime_error(describe(v)), violations_(std::move(v)) {}

std::uint64_t RunReport::total_words() const {
  std::uint64_t t = 0;
  for (const auto& r : telemetry)
    for (const auto& m : r.machines) t += m.sent;
  return t;
}

std::uint64_t RunReport::peak_sent(MachineId id) const {
  std::uint64_t p = 0;
  for (const auto& r : telemetry)
    if (id.index < r.machines.size()) p = std::max(p, r.machines[id.index].sent);
  return p;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t machine, std::uint64_t round, std::uint64_t stream) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ machine);
  h = mix64(h ^ round);
  return mix64(h ^ stream);
}

// ---- Machine ----

std::span<const Message> Machine::inbox() const { return cluster_->inbox(id_); }

void Machine::send(MachineId dst, Payload payload) {
  if (dst.index >= cluster_->machine_count()) throw std::out_of_range("send to unknown machine " + to_string(dst));
  outbox_.push_back(Message{id_, dst, seq_++, std::move(payload)});
}

std::mt19937_64& Machine::rng() {
  if (!rng_) {
    std::uint64_t round = cluster_->in_parallel_ ? cluster_->cursor_ : cluster_->rounds_used_;
    rng_.emplace(substream_seed(cluster_->cfg_.seed, id_.index, round, cluster_->branch_id_ << 8));
  }
  return *rng_;
}

void Machine::set_resident(std::uint64_t words) { resident_ = words; }
std::uint64_t Machine::budget() const { return cluster_->budget(id_); }
std::uint64_t Machine::round() const { return cluster_->in_parallel_ ? cluster_->cursor_ : cluster_->rounds_used_; }

// ---- Cluster ----

Cluster::Cluster(const ClusterConfig& cfg, Strictness strictness, Scheduler scheduler)
    : cfg_(cfg), strictness_(strictness), scheduler_(scheduler) {
  cfg_.validate();
  auto k = small_machine_count(cfg_);
  if (k > 0xffffffffULL) throw ConfigError("too many small machines");
  k_ = static_cast<std::uint32_t>(k);
  small_budget_ = small_budget_words(cfg_);
  large_budget_ = large_budget_words(cfg_);
  log_n_ = ceil_log2(cfg_.n);
  inbox_.resize(k_ + 1);
  resident_.assign(k_ + 1, 0);
  local_draws_.assign(k_ + 1, 0);
}

std::span<const Message> Cluster::inbox(MachineId id) const { return inbox_.at(id.index); }

void Cluster::clear_inboxes() {
  for (auto& b : inbox_) b.clear();
}

void Cluster::set_resident(MachineId id, std::uint64_t words) { resident_.at(id.index) = words; }

std::mt19937_64 Cluster::local_rng(MachineId id) {
  std::uint64_t round = in_parallel_ ? cursor_ : rounds_used_;
  std::uint64_t draw = ++local_draws_.at(id.index);
  return std::mt19937_64(substream_seed(cfg_.seed, id.index, round, (branch_id_ << 8) ^ (draw << 32) ^ 1));
}

void Cluster::check_budgets(RoundTelemetry& row, std::vector<Violation>& fresh) {
  row.violations.clear();
  for (std::uint32_t i = 0; i < row.machines.size(); ++i) {
    MachineId id{i};
    auto b = budget(id);
    const auto& t = row.machines[i];
    if (t.sent > b) row.violations.push_back({row.round, id, ViolationKind::SendBudget, t.sent, b});
    if (t.received > b) row.violations.push_back({row.round, id, ViolationKind::ReceiveBudget, t.received, b});
    if (t.resident > b) row.violations.push_back({row.round, id, ViolationKind::ResidentBudget, t.resident, b});
  }
  fresh.insert(fresh.end(), row.violations.begin(), row.violations.end());
}

const RoundTelemetry& Cluster::run_round(const StepFn& step) {
  const std::uint32_t count = machine_count();
  std::vector<Machine> ctx;
  ctx.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) ctx.push_back(Machine(this, MachineId{i}));

  if (scheduler_ == Scheduler::Serial || count == 1) {
    for (auto& m : ctx) step(m);
  } else {
    unsigned threads = std::max(2u, std::min<unsigned>(std::thread::hardware_concurrency(), 8u));
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::uint32_t i = t; i < count; i += threads) step(ctx[i]);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!err) err = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
  }

  // barrier
  RoundTelemetry row;
  row.machines.assign(count, {});
  for (auto& b : inbox_) b.clear();
  for (auto& m : ctx) {
    if (m.resident_) resident_[m.id_.index] = *m.resident_;
    for (auto& msg : m.outbox_) {
      auto w = msg.payload.size();
      row.machines[msg.src.index].sent += w;
      row.machines[msg.dst.index].received += w;
      inbox_[msg.dst.index].push_back(std::move(msg));
    }
  }

  if (!in_parallel_) {
    for (std::uint32_t i = 0; i < count; ++i) row.machines[i].resident = resident_[i];
    row.round = rounds_used_;
    telemetry_.push_back(std::move(row));
    ++rounds_used_;
    std::vector<Violation> fresh;
    check_budgets(telemetry_.back(), fresh);
    violations_.insert(violations_.end(), fresh.begin(), fresh.end());
    if (!fresh.empty() && strictness_ == Strictness::Strict) throw BudgetViolation(std::move(fresh));
    return telemetry_.back();
  }

  // inside a parallel section: fold into the row at the cursor
  if (cursor_ < telemetry_.size()) {
    auto& dst = telemetry_[cursor_];
    for (std::uint32_t i = 0; i < count; ++i) {
      dst.machines[i].sent += row.machines[i].sent;
      dst.machines[i].received += row.machines[i].received;
      dst.machines[i].resident += resident_[i] - std::min(resident_[i], base_resident_[i]);
    }
  } else {
    for (std::uint32_t i = 0; i < count; ++i) row.machines[i].resident = resident_[i];
    row.round = cursor_;
    telemetry_.push_back(std::move(row));
  }
  return telemetry_[cursor_++];
}

void Cluster::idle_rounds(std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) run_round([](Machine&) {});
}

void Cluster::pad_to(std::uint64_t start_round, std::uint64_t length) {
  std::uint64_t now = in_parallel_ ? cursor_ : rounds_used_;
  if (now - start_round > length)
    throw std::logic_error("schedule overrun: used " + std::to_string(now - start_round) + " rounds, planned " +
                           std::to_string(length));
  idle_rounds(start_round + length - now);
}

void Cluster::parallel(std::size_t branches, const std::function<void(std::size_t)>& body) {
  if (in_parallel_) throw std::logic_error("nested parallel sections are not supported");
  const std::uint64_t base = rounds_used_;
  base_resident_ = resident_;
  in_parallel_ = true;
  std::uint64_t longest = 0;
  try {
    for (std::size_t b = 0; b < branches; ++b) {
      cursor_ = base;
      branch_id_ = ++branch_counter_;
      resident_ = base_resident_;
      clear_inboxes();
      body(b);
      longest = std::max(longest, cursor_ - base);
    }
  } catch (...) {
    in_parallel_ = false;
    branch_id_ = 0;
    rounds_used_ = telemetry_.size();
    throw;
  }
  in_parallel_ = false;
  branch_id_ = 0;
  resident_ = base_resident_;
  clear_inboxes();
  rounds_used_ = base + longest;
  std::vector<Violation> fresh;
  for (std::uint64_t r = base; r < rounds_used_; ++r) check_budgets(telemetry_[r], fresh);
  violations_.insert(violations_.end(), fresh.begin(), fresh.end());
  if (!fresh.empty() && strictness_ == Strictness::Strict) throw BudgetViolation(std::move(fresh));
}

RunReport Cluster::report() const {
  RunReport r;
  r.rounds_used = rounds_used_;
  r.seed = cfg_.seed;
  r.small_machines = k_;
  r.small_budget = small_budget_;
  r.large_budget = large_budget_;
  r.telemetry = telemetry_;
  r.violations = violations_;
  return r;
}

}  // namespace hetmpc
