#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "btx/backend.hpp"
#include "btx/bt.hpp"
#include "btx/llm.hpp"
#include "btx/planner.hpp"
#include "btx/sim.hpp"

namespace btx {

struct ResolveConfig {
  PlanConfig plan;
  ExecConfig exec;
  std::size_t max_resolution_rounds = 8;
  bool resolve = true;  // false: report the first failure instead of repairing it
  CompletionSettings settings;
};

using Insertion = std::variant<Literal, ParamValue>;
std::string to_string(const Insertion& insertion);

struct ResolutionRecord {
  std::size_t round = 0;
  FailureEvent event;
  LlmExchange exchange;
  std::vector<Insertion> inserted;
  std::vector<NodeId> tree_before;  // preorder ids
  std::vector<NodeId> tree_after;
  std::vector<NodeId> targets;  // action leaves that received the insertion
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

// Everything a single repair needs besides the tree and the event.
struct ResolveContext {
  const Domain* domain = nullptr;
  std::string scenario_id;
  std::string instruction;
  WorldState world;  // state planning restarts from
  // Further states the patched tree is planned from, so the learned policy
  // also covers them (the scenario's initial state).
  std::vector<WorldState> also_from;
  ActionModel model;
  ResolveConfig config;
};

struct ResolveResult {
  BehaviorTree tree;
  ResolutionRecord record;
  std::optional<ActionFailure> pending;  // planning failure uncovered while re-planning
};

// Asks the backend for the failing action's missing preconditions, inserts
// them as its first preconditions and lets the planner expand them. Parse
// errors, duplicate suggestions and unsolvable suggestions leave the tree
// unchanged and are reported in record.error.
ResolveResult resolve(const BehaviorTree& tree, const FailureEvent& event, Backend& backend,
                      const ResolveContext& ctx);

// Asks the backend for the value of event.missing_slot and binds it on every
// action leaf with that slot whose object arguments include the failing
// action's first object.
ResolveResult resolve_parameter(const BehaviorTree& tree, const FailureEvent& event,
                                Backend& backend, const ResolveContext& ctx);

// Binds matching unbound parameter slots; returns the ids that changed.
std::vector<NodeId> apply_settings(BehaviorTree& tree, const Domain& domain,
                                   const std::vector<SlotSetting>& settings);

enum class Outcome { Success, Exhausted, Unsolvable, Failure };
const char* to_string(Outcome outcome);

struct RunResult {
  Outcome outcome = Outcome::Failure;
  std::string message;
  std::optional<GoalSpec> goals;
  std::optional<LlmExchange> goal_exchange;
  std::optional<BehaviorTree> planned;  // before any resolution
  std::optional<BehaviorTree> tree;     // final policy
  std::vector<ResolutionRecord> records;
  std::vector<ExecutionTrace> traces;
  WorldState final_world;
  std::size_t backend_calls = 0;
};

// Goal interpretation, planning, execution with fault injection and
// repair, bounded by config.max_resolution_rounds.
RunResult resolve_until_success(const Scenario& scenario, Backend& backend,
                                const ResolveConfig& config = {});

// Executes a given policy on a fresh copy of the scenario without the LLM.
RunResult replay(const BehaviorTree& tree, const Scenario& scenario, const ResolveConfig& config = {});

}  // namespace btx
