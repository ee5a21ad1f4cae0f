#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetmpc/config.hpp"
#include "hetmpc/types.hpp"

namespace hetmpc {

enum class Role : std::uint8_t { Large, Small };

// Flat index: the large machine is 0, small machine i is i (1-based).
struct MachineId {
  std::uint32_t index = 0;

  static constexpr MachineId large() { return {0}; }
  static constexpr MachineId small(std::uint32_t i) { return {i}; }
  Role role() const { return index == 0 ? Role::Large : Role::Small; }
  bool is_large() const { return index == 0; }
  friend auto operator<=>(const MachineId&, const MachineId&) = default;
};

std::string to_string(MachineId id);

struct Message {
  MachineId src;
  MachineId dst;
  std::uint32_t seq = 0;
  Payload payload;
};

enum class ViolationKind : std::uint8_t { SendBudget, ReceiveBudget, ResidentBudget };
const char* to_string(ViolationKind k);

struct Violation {
  std::uint64_t round = 0;
  MachineId machine;
  ViolationKind kind = ViolationKind::SendBudget;
  std::uint64_t words = 0;
  std::uint64_t budget = 0;
};

struct MachineTraffic {
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
  std::uint64_t resident = 0;
};

struct RoundTelemetry {
  std::uint64_t round = 0;
  std::vector<MachineTraffic> machines;  // by flat index
  std::vector<Violation> violations;
};

class BudgetViolation : public std::runtime_error {
 public:
  explicit BudgetViolation(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

enum class Strictness : std::uint8_t { Strict, Tolerant };
enum class Scheduler : std::uint8_t { Serial, Threads };

struct RunReport {
  std::uint64_t rounds_used = 0;
  std::uint64_t seed = 0;
  std::uint64_t small_machines = 0;
  std::uint64_t small_budget = 0;
  std::uint64_t large_budget = 0;
  std::vector<RoundTelemetry> telemetry;
  std::vector<Violation> violations;
  std::uint64_t total_words() const;
  std::uint64_t peak_sent(MachineId id) const;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t machine, std::uint64_t round, std::uint64_t stream);

class Cluster;

// View handed to the step function for one machine in one round.
class Machine {
 public:
  MachineId id() const { return id_; }
  bool is_large() const { return id_.is_large(); }
  std::uint32_t small_index() const { return id_.index; }
  std::span<const Message> inbox() const;
  void send(MachineId dst, Payload payload);
  std::mt19937_64& rng();
  void set_resident(std::uint64_t words);
  std::uint64_t budget() const;
  std::uint64_t round() const;

 private:
  friend class Cluster;
  Machine(Cluster* c, MachineId id) : cluster_(c), id_(id) {}
  Cluster* cluster_;
  MachineId id_;
  std::vector<Message> outbox_;
  std::uint32_t seq_ = 0;
  std::optional<std::mt19937_64> rng_;
  std::optional<std::uint64_t> resident_;
};

using StepFn = std::function<void(Machine&)>;

class Cluster {
 public:
  Cluster(const ClusterConfig& cfg, Strictness strictness = Strictness::Strict,
          Scheduler scheduler = Scheduler::Serial);

  const ClusterConfig& config() const { return cfg_; }
  std::uint32_t small_count() const { return k_; }
  std::uint32_t machine_count() const { return k_ + 1; }
  std::uint64_t small_budget() const { return small_budget_; }
  std::uint64_t large_budget() const { return large_budget_; }
  std::uint64_t budget(MachineId id) const { return id.is_large() ? large_budget_ : small_budget_; }
  std::uint64_t log_n() const { return log_n_; }
  Strictness strictness() const { return strictness_; }
  Scheduler scheduler() const { return scheduler_; }

  // Runs one synchronous round: step runs on every machine, then the barrier
  // delivers messages and checks budgets.
  const RoundTelemetry& run_round(const StepFn& step);
  // Rounds where nobody communicates, used to keep schedules data-independent.
  void idle_rounds(std::uint64_t count);
  void pad_to(std::uint64_t start_round, std::uint64_t length);

  std::span<const Message> inbox(MachineId id) const;
  void clear_inboxes();

  void set_resident(MachineId id, std::uint64_t words);
  std::uint64_t resident(MachineId id) const { return resident_[id.index]; }

  // Randomness for local computation between rounds.
  std::mt19937_64 local_rng(MachineId id);

  // Runs body(b) for b in [0, branches) as concurrent branches: their rounds
  // share relative indices and the section costs max branch length.
  void parallel(std::size_t branches, const std::function<void(std::size_t)>& body);

  // Inside a parallel branch this is the branch's own position.
  std::uint64_t rounds_used() const { return in_parallel_ ? cursor_ : rounds_used_; }
  const std::vector<RoundTelemetry>& telemetry() const { return telemetry_; }
  const std::vector<Violation>& violations() const { return violations_; }
  RunReport report() const;

 private:
  friend class Machine;
  void check_budgets(RoundTelemetry& row, std::vector<Violation>& fresh);

  ClusterConfig cfg_;
  Strictness strictness_;
  Scheduler scheduler_;
  std::uint32_t k_;
  std::uint64_t small_budget_;
  std::uint64_t large_budget_;
  std::uint64_t log_n_;

  std::vector<std::vector<Message>> inbox_;
  std::vector<std::uint64_t> resident_;
  std::vector<std::uint64_t> local_draws_;
  std::vector<RoundTelemetry> telemetry_;
  std::vector<Violation> violations_;
  std::uint64_t rounds_used_ = 0;

  // parallel sections
  bool in_parallel_ = false;
  std::uint64_t cursor_ = 0;
  std::uint64_t branch_id_ = 0;
  std::uint64_t branch_counter_ = 0;
  std::vector<std::uint64_t> base_resident_;
};

// JSON document with per-round per-machine traffic and all violations.
std::string telemetry_json(const RunReport& report, int indent = -1);

}  // namespace hetmpc
