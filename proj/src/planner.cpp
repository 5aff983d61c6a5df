#include "btx/planner.hpp"

#include <algorithm>
#include <set>

namespace btx {

GoalSpec::GoalSpec(std::vector<Literal> conjuncts) : conjuncts_(std::move(conjuncts)) {
  if (conjuncts_.empty()) throw FormatError("a goal needs at least one condition", "", 0);
}

void GoalSpec::validate(const Domain& domain) const {
  for (const auto& lit : conjuncts_) domain.validate_literal(lit);
}

bool GoalSpec::satisfied_by(const WorldState& state) const {
  return std::all_of(conjuncts_.begin(), conjuncts_.end(),
                     [&](const Literal& l) { return holds(state.visible(), l); });
}

std::string to_string(const GoalSpec& goals) {
  std::string out;
  for (const auto& lit : goals.conjuncts()) {
    if (!out.empty()) out += " & ";
    out += to_string(lit);
  }
  return out;
}

void PlanConfig::validate() const {
  if (max_expansions == 0 || max_conflict_reorders == 0 || max_sim_ticks == 0)
    throw Error(ErrorKind::BudgetExceeded, "plan budgets must be positive");
}

BehaviorTree init_tree(const GoalSpec& goals) {
  std::vector<TreeNode> children;
  for (const auto& lit : goals.conjuncts()) children.push_back(TreeNode::make_condition(lit));
  return BehaviorTree(TreeNode::sequence(std::move(children)));
}

TickContext observe(const WorldState& state,
                    std::function<NodeStatus(NodeId, const GroundAction&)> act) {
  TickContext ctx;
  ctx.condition = [&state](const Literal& lit) { return holds(state.visible(), lit); };
  ctx.action = std::move(act);
  return ctx;
}

BehaviorTree expand_condition(BehaviorTree tree, NodeId cond_id, const Domain& domain,
                              const WorldState& state) {
  const TreeNode* node = tree.find(cond_id);
  if (node == nullptr) throw Error(ErrorKind::UnknownNode, "no node with id " + std::to_string(cond_id));
  if (node->kind != NodeKind::Condition)
    throw Error(ErrorKind::InvalidTarget, "node " + std::to_string(cond_id) + " is not a condition");
  if (node->guard)
    throw Error(ErrorKind::PreconditionViolation, "guard " + to_string(*node->condition) + " is never expanded");
  if (is_expanded_condition(tree, cond_id))
    throw Error(ErrorKind::PreconditionViolation, to_string(*node->condition) + " is already expanded");
  if (holds(domain, state, *node->condition))
    throw Error(ErrorKind::PreconditionViolation,
                to_string(*node->condition) + " holds; only failed conditions are expanded");

  std::vector<GroundAchiever> options = ground_achievers(domain, *node->condition);
  if (options.empty()) throw Unsolvable(*node->condition);

  std::vector<TreeNode> branches;
  branches.push_back(*node);
  for (auto& option : options) {
    std::vector<TreeNode> seq;
    if (option.guard) seq.push_back(TreeNode::make_condition(*option.guard, true));
    for (auto& pre : option.preconditions) seq.push_back(TreeNode::make_condition(std::move(pre)));
    seq.push_back(TreeNode::make_action(std::move(option.action)));
    branches.push_back(TreeNode::sequence(std::move(seq)));
  }
  NodePath path = *tree.path_of(cond_id);
  tree.replace(path, TreeNode::fallback(std::move(branches)));
  return tree;
}

namespace {

// Literal a left sibling stands for: its own condition or the head of its
// expansion Fallback. Guards and composite siblings have none.
const Literal* sibling_condition(const TreeNode& child) {
  if (child.kind == NodeKind::Condition) return child.guard ? nullptr : &*child.condition;
  if (child.kind == NodeKind::Fallback && child.children.front().kind == NodeKind::Condition)
    return &*child.children.front().condition;
  return nullptr;
}

struct Conflict {
  NodePath sequence;
  std::size_t index;  // child of `sequence` containing the action
};

// After an action changed `before` into `after`, look for a Sequence above
// it whose already-satisfied left sibling no longer holds. The action's own
// Sequence is skipped: actions routinely consume their preconditions.
std::optional<Conflict> find_conflict(const BehaviorTree& tree, NodeId action_id,
                                      const WorldState& before, const WorldState& after) {
  NodePath path = *tree.path_of(action_id);
  if (path.empty()) return std::nullopt;
  bool skip_own = tree.at(NodePath(path.begin(), path.end() - 1)).kind == NodeKind::Sequence;
  for (std::size_t depth = path.size(); depth-- > 0;) {
    NodePath parent(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(depth));
    const TreeNode& node = tree.at(parent);
    if (node.kind != NodeKind::Sequence) continue;
    if (skip_own && depth + 1 == path.size()) continue;
    std::size_t index = path[depth];
    for (std::size_t j = 0; j < index; ++j) {
      const Literal* lit = sibling_condition(node.children[j]);
      if (lit != nullptr && holds(before.visible(), *lit) && !holds(after.visible(), *lit))
        return Conflict{parent, index};
    }
  }
  return std::nullopt;
}

// Conditions blamed for a root Failure: a Sequence blames the child it
// stopped at, a Fallback blames every child.
void blame(const TreeNode& node, const TickTrace& trace, std::vector<NodeId>& out) {
  auto status = trace.status_of(node.id);
  if (!status || *status != NodeStatus::Failure) return;
  switch (node.kind) {
    case NodeKind::Condition:
      out.push_back(node.id);
      break;
    case NodeKind::Action:
      break;
    case NodeKind::Sequence:
      for (const auto& c : node.children) {
        auto s = trace.status_of(c.id);
        if (s && *s == NodeStatus::Failure) {
          blame(c, trace, out);
          break;
        }
      }
      break;
    case NodeKind::Fallback:
      for (const auto& c : node.children) blame(c, trace, out);
      break;
  }
}

using StateKey = std::pair<std::set<Atom>, std::set<Atom>>;

}  // namespace

PlanOutcome continue_plan(BehaviorTree tree, const Domain& domain, const WorldState& initial,
                          const PlanConfig& config, const ActionModel& model) {
  config.validate();
  tree.validate();
  PlanStats stats;
  std::set<NodeId> dead;  // conditions no skill achieves

  for (;;) {
    ++stats.runs;
    WorldState state = initial;
    std::set<StateKey> seen{{state.visible(), state.hidden()}};
    std::size_t run_ticks = 0;
    std::size_t run_actions = 0;
    bool changed = false;

    while (!changed) {
      if (run_ticks++ >= config.max_sim_ticks)
        throw PlanBudgetExceeded("simulation exceeded " + std::to_string(config.max_sim_ticks) + " ticks", tree);
      ++stats.ticks;

      std::optional<ActionFailure> failure;
      std::optional<Conflict> conflict;
      auto act = [&](NodeId id, const GroundAction& action) {
        if (model) {
          if (auto message = model(action, state)) {
            failure = ActionFailure{id, action, *message, state};
            return NodeStatus::Failure;
          }
        }
        WorldState next = apply_effects(domain, state, action);
        conflict = find_conflict(tree, id, state, next);
        state = std::move(next);
        ++run_actions;
        // One action per tick: the next tick observes its effects from the root.
        return NodeStatus::Running;
      };
      TickTrace trace = tick(tree, observe(state, act));

      if (failure) return {std::move(tree), std::move(state), stats, std::move(failure)};

      if (trace.root_status == NodeStatus::Success) {
        stats.actions = run_actions;
        return {std::move(tree), std::move(state), stats, std::nullopt};
      }

      if (trace.root_status == NodeStatus::Running) {
        if (conflict) {
          if (++stats.reorders > config.max_conflict_reorders)
            throw PlanBudgetExceeded("more than " + std::to_string(config.max_conflict_reorders) +
                                         " conflict reorders",
                                     tree);
          tree.move_child_left(conflict->sequence, conflict->index);
          changed = true;
        } else if (!seen.insert({state.visible(), state.hidden()}).second) {
          throw PlanBudgetExceeded("livelock: the tree revisits a state without progress", tree);
        }
        continue;
      }

      // Root Failure: expand the deepest, leftmost blamed condition.
      std::vector<NodeId> blamed;
      blame(tree.root(), trace, blamed);
      std::optional<NodeId> target;
      std::uint32_t best_depth = 0;
      for (const auto& e : trace.entries) {
        if (std::find(blamed.begin(), blamed.end(), e.id) == blamed.end()) continue;
        const TreeNode* n = tree.find(e.id);
        if (n->guard || dead.count(e.id) || is_expanded_condition(tree, e.id)) continue;
        if (!target || e.depth > best_depth) {
          target = e.id;
          best_depth = e.depth;
        }
      }
      if (!target) {
        // Report the first hopeless condition, else the first blamed one.
        for (NodeId id : blamed) {
          if (dead.count(id)) throw Unsolvable(*tree.find(id)->condition);
        }
        const TreeNode* n = blamed.empty() ? nullptr : tree.find(blamed.front());
        if (n != nullptr) throw Unsolvable(*n->condition);
        throw Error(ErrorKind::Internal, "root failed without a failed condition");
      }
      try {
        tree = expand_condition(tree, *target, domain, state);
      } catch (const Unsolvable&) {
        dead.insert(*target);
        continue;  // same state, same tree: pick the next candidate
      }
      if (++stats.expansions > config.max_expansions)
        throw PlanBudgetExceeded("more than " + std::to_string(config.max_expansions) + " expansions", tree);
      changed = true;
    }
  }
}

BehaviorTree plan(const GoalSpec& goals, const Domain& domain, const WorldState& state,
                  const PlanConfig& config) {
  goals.validate(domain);
  return continue_plan(init_tree(goals), domain, state, config).tree;
}

}  // namespace btx
