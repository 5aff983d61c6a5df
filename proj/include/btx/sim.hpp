#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "btx/backend.hpp"
#include "btx/bt.hpp"
#include "btx/domain.hpp"
#include "btx/planner.hpp"

namespace btx {

enum class FaultMode {
  Fail,             // the action fails when it starts
  SuppressEffects,  // the action runs but its effects do not happen
};

// An injected fault. Fires for matching actions while every guard literal
// holds and not every clears_when literal holds. Literals over hidden
// predicates are evaluated against the hidden state.
struct FaultRule {
  std::string id;
  std::string skill;
  std::vector<Term> args;  // object arguments; any_object matches anything
  std::vector<Literal> guard;
  std::vector<Literal> clears_when;
  std::string message;  // generated for SuppressEffects when empty
  FaultMode mode = FaultMode::Fail;
  bool planning = false;  // also visible to the planning simulation

  bool matches(const GroundAction& action) const;
  bool active(const Domain& domain, const WorldState& state) const;
};

// Value preset on, or expected for, a non-object slot.
struct SlotSetting {
  std::string skill;
  std::string object;  // first object argument; empty matches any
  std::string slot;
  std::string value;   // "5.3 N", "shovel"
};

struct OracleAnswers {
  std::string goal;
  std::map<std::string, std::string> preconditions;  // fault id -> literal conjunction
  std::vector<SlotSetting> parameters;
};

enum class ScenarioKind { Precondition, Parameter, Golden };
const char* to_string(ScenarioKind kind);

struct Scenario {
  std::string id;
  std::string title;
  ScenarioKind kind = ScenarioKind::Precondition;
  std::filesystem::path source;
  std::filesystem::path domain_path;
  Domain domain;  // restricted to the scenario's objects when listed
  std::string instruction;
  WorldState initial;
  std::vector<FaultRule> faults;
  std::vector<SlotSetting> presets;
  OracleAnswers oracle;
  std::string expected_outcome = "success";
  std::optional<std::size_t> expected_rounds;
  std::map<std::string, std::filesystem::path> golden;  // "planned" / "resolved"

  OracleKnowledge knowledge() const;
  // Fault rules the planning simulation may observe.
  ActionModel planning_model() const;
};

// Scenario file:
//   {"format": "btx-scenario", "version": 1, "id", "title", "kind",
//    "domain": "<path relative to this file>", "objects": [names]?,
//    "instruction", "initial": [atoms], "hidden": [atoms],
//    "faults": [{"id", "skill", "args": [...], "guard": [lits], "clears_when": [lits],
//                "message", "mode": "fail"|"suppress_effects", "planning": bool}],
//    "parameters": [{"skill", "object", "slot", "value"}],
//    "oracle": {"goal", "preconditions": {"<fault id>": "<lits>"}, "parameters": [...]},
//    "expected": {"outcome", "rounds"}, "golden": {"planned": path, "resolved": path}}
Scenario parse_scenario(std::string_view text, const std::filesystem::path& source);
Scenario load_scenario(const std::filesystem::path& path);
// A directory yields every *.json file in it, ordered by id; a file yields one.
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);

enum class FailurePhase { Planning, Execution };
const char* to_string(FailurePhase phase);

struct FailureEvent {
  FailurePhase phase = FailurePhase::Execution;
  NodeId action_id = 0;
  GroundAction action;
  std::string error_message;
  WorldState world_snapshot;  // visible part only
  std::optional<std::string> missing_slot;
  std::string fault_id;
};

struct ExecutedAction {
  std::size_t tick = 0;
  NodeId node = 0;
  GroundAction action;
  WorldState before;  // visible
  WorldState after;   // visible
  bool suppressed = false;
};

struct ExecConfig {
  std::size_t max_ticks = 1000;
};

struct ExecutionTrace {
  std::vector<TickTrace> ticks;
  std::vector<ExecutedAction> actions;
  std::vector<FailureEvent> failures;
  NodeStatus final_status = NodeStatus::Failure;
  WorldState final_state;  // including hidden state
};

class TickBudgetExceeded : public Error {
 public:
  TickBudgetExceeded(const std::string& message, ExecutionTrace trace)
      : Error(ErrorKind::BudgetExceeded, message), trace_(std::move(trace)) {}
  const ExecutionTrace& trace() const noexcept { return trace_; }

 private:
  ExecutionTrace trace_;
};

// Ticks `tree` from `start` until the root succeeds, fails, or the tick
// budget runs out. Each executing tick of an action returns Running; the
// effects land on the action's last tick. Missing numeric/categorical
// parameters and matching faults fail the action with a FailureEvent.
// Throws Error(Evaluation) if the tree does not fit the scenario domain.
ExecutionTrace execute(const BehaviorTree& tree, const Scenario& scenario, const WorldState& start,
                       const ExecConfig& config = {});

// One JSON object per tick.
std::string trace_jsonl(const ExecutionTrace& trace);

// Message of a missing-parameter failure.
std::string missing_parameter_message(const std::string& slot, const GroundAction& action);

}  // namespace btx
