#include "json.hpp"

#include "hetmpc/cluster.hpp"

namespace hetmpc {

std::string telemetry_json(const RunReport& report, int indent) {
  using nlohmann::json;
  json doc;
  doc["rounds_used"] = report.rounds_used;
  doc["seed"] = report.seed;
  doc["small_machines"] = report.small_machines;
  doc["small_budget"] = report.small_budget;
  doc["large_budget"] = report.large_budget;
  json rounds = json::array();
  for (const auto& r : report.telemetry) {
    json machines = json::array();
    for (std::size_t i = 0; i < r.machines.size(); ++i) {
      const auto& t = r.machines[i];
      machines.push_back({{"machine", to_string(MachineId{static_cast<std::uint32_t>(i)})},
                          {"sent", t.sent},
                          {"received", t.received},
                          {"resident", t.resident}});
    }
    rounds.push_back({{"round", r.round}, {"machines", std::move(machines)}});
  }
  doc["rounds"] = std::move(rounds);
  json viol = json::array();
  for (const auto& v : report.violations) {
    viol.push_back({{"round", v.round},
                    {"machine", to_string(v.machine)},
                    {"kind", to_string(v.kind)},
                    {"words", v.words},
                    {"budget", v.budget}});
  }
  doc["violations"] = std::move(viol);
  return doc.dump(indent);
}

}  // namespace hetmpc
