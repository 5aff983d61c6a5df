#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "btx/bt.hpp"
#include "btx/domain.hpp"
#include "btx/error.hpp"

namespace btx {

// Ordered goal conjunction. Construction rejects an empty list.
class GoalSpec {
 public:
  explicit GoalSpec(std::vector<Literal> conjuncts);

  const std::vector<Literal>& conjuncts() const { return conjuncts_; }
  // Every conjunct must name known predicates/objects and carry no slots.
  void validate(const Domain& domain) const;
  bool satisfied_by(const WorldState& state) const;

  bool operator==(const GoalSpec&) const = default;

 private:
  std::vector<Literal> conjuncts_;
};

std::string to_string(const GoalSpec& goals);  // "on(a, b) & ~open(c)"

struct PlanConfig {
  std::size_t max_expansions = 64;
  std::size_t max_conflict_reorders = 16;
  std::size_t max_sim_ticks = 10000;

  void validate() const;  // all positive
};

class Unsolvable : public Error {
 public:
  explicit Unsolvable(Literal literal)
      : Error(ErrorKind::Unsolvable, "no skill can achieve " + to_string(literal)),
        literal_(std::move(literal)) {}

  const Literal& literal() const noexcept { return literal_; }

 private:
  Literal literal_;
};

class PlanBudgetExceeded : public Error {
 public:
  PlanBudgetExceeded(const std::string& message, BehaviorTree partial)
      : Error(ErrorKind::BudgetExceeded, message), partial_(std::move(partial)) {}

  const BehaviorTree& partial_tree() const noexcept { return partial_; }

 private:
  BehaviorTree partial_;
};

// Lets the planning simulation reject an action the way the real executor
// would (a returned message means the action fails in `state`).
using ActionModel =
    std::function<std::optional<std::string>(const GroundAction& action, const WorldState& state)>;

struct ActionFailure {
  NodeId action_id = 0;
  GroundAction action;
  std::string message;
  WorldState state;  // state the action was attempted in
};

struct PlanStats {
  std::size_t expansions = 0;
  std::size_t reorders = 0;
  std::size_t runs = 0;   // simulations from the initial state
  std::size_t ticks = 0;  // summed over runs
  std::size_t actions = 0;  // actions executed in the final run
};

struct PlanOutcome {
  BehaviorTree tree;
  WorldState final_state;
  PlanStats stats;
  // Set when the action model failed an action; `tree` is then partial.
  std::optional<ActionFailure> failure;
};

// Root Sequence over the goal conditions, in order.
BehaviorTree init_tree(const GoalSpec& goals);

// Replaces the condition leaf with Fallback(cond, Seq([guard], pre..., act)...)
// over every grounded achiever. Throws PreconditionViolation when the
// condition holds in `state` or cannot be expanded, Unsolvable when no
// skill achieves it.
BehaviorTree expand_condition(BehaviorTree tree, NodeId cond_id, const Domain& domain,
                              const WorldState& state);

// Simulates `tree` from `state` one action per tick, expanding failed
// conditions and reordering conflicting subtrees until the root succeeds.
// Every tree change restarts the simulation from `state`.
PlanOutcome continue_plan(BehaviorTree tree, const Domain& domain, const WorldState& state,
                          const PlanConfig& config = {}, const ActionModel& model = {});

BehaviorTree plan(const GoalSpec& goals, const Domain& domain, const WorldState& state,
                  const PlanConfig& config = {});

// Condition callbacks for ticking against a state's visible atoms.
TickContext observe(const WorldState& state, std::function<NodeStatus(NodeId, const GroundAction&)> act);

}  // namespace btx
