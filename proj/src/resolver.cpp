#include "btx/resolver.hpp"

#include <algorithm>

#include "btx/error.hpp"

namespace btx {

std::string to_string(const Insertion& insertion) {
  return std::visit([](const auto& v) { return to_string(v); }, insertion);
}

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Success: return "success";
    case Outcome::Exhausted: return "exhausted";
    case Outcome::Unsolvable: return "unsolvable";
    case Outcome::Failure: return "failure";
  }
  return "failure";
}

namespace {

std::string describe(const Error& e) { return std::string(to_string(e.kind())) + ": " + e.what(); }

// Unanswered calls surface as failed rounds; an unreachable backend aborts.
std::optional<std::string> ask(Backend& backend, const LlmRequest& request,
                               const CompletionSettings& settings, LlmExchange& exchange) {
  try {
    exchange.raw_response = backend.complete(request, settings);
    return std::nullopt;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::BackendUnavailable) throw;
    return describe(e);
  }
}

bool mentions(const GroundAction& action, const std::string& object) {
  auto objects = action.objects();
  return std::find(objects.begin(), objects.end(), object) != objects.end();
}

}  // namespace

std::vector<NodeId> apply_settings(BehaviorTree& tree, const Domain& domain,
                                   const std::vector<SlotSetting>& settings) {
  std::vector<NodeId> changed;
  if (settings.empty()) return changed;
  for (NodeId id : tree.preorder()) {
    const TreeNode* node = tree.find(id);
    if (node->kind != NodeKind::Action) continue;
    const GroundAction& action = *node->action;
    const SkillTemplate* skill = domain.skill(action.skill);
    if (skill == nullptr) continue;
    for (const auto& s : settings) {
      if (!s.skill.empty() && s.skill != action.skill) continue;
      const ParamDecl* decl = skill->param(s.slot);
      if (decl == nullptr || decl->kind == SlotKind::Object || action.is_bound(s.slot)) continue;
      if (!s.object.empty() && !mentions(action, s.object)) continue;
      ParamValue value = parse_param_response("ANSWER: " + s.value, *decl).value;
      tree.bind_slot(id, s.slot, value.value);
      changed.push_back(id);
      break;
    }
  }
  return changed;
}

ResolveResult resolve(const BehaviorTree& tree, const FailureEvent& event, Backend& backend,
                      const ResolveContext& ctx) {
  const Domain& domain = *ctx.domain;
  ResolveResult result{tree, {}, std::nullopt};
  ResolutionRecord& rec = result.record;
  rec.event = event;
  rec.tree_before = tree.preorder();
  rec.tree_after = rec.tree_before;

  const TreeNode* target = tree.find(event.action_id);
  if (target == nullptr || target->kind != NodeKind::Action)
    throw Error(ErrorKind::InvalidTarget, "failure event does not point at an action leaf");

  rec.exchange.prompt = failure_prompt(domain, event.world_snapshot, ctx.instruction, event.action,
                                       event.error_message);
  rec.exchange.prompt_text = build_prompt(rec.exchange.prompt);
  LlmRequest request{rec.exchange.prompt_text, PromptRole::FailureResolution, ctx.scenario_id, "",
                     event.action, event.error_message};
  if ((rec.error = ask(backend, request, ctx.config.settings, rec.exchange))) {
    rec.exchange.error = rec.error;
    return result;
  }

  std::vector<Literal> suggested;
  try {
    auto parsed = parse_precondition_response(rec.exchange.raw_response, domain);
    rec.exchange.reasoning = parsed.reasoning;
    rec.exchange.parsed = parsed.preconditions;
    suggested = std::move(parsed.preconditions);
  } catch (const Error& e) {
    rec.error = rec.exchange.error = describe(e);
    return result;
  }

  std::vector<Literal> existing = action_preconditions(tree, event.action_id);
  std::vector<Literal> fresh;
  for (auto& lit : suggested)
    if (std::find(existing.begin(), existing.end(), lit) == existing.end()) fresh.push_back(lit);
  if (fresh.empty()) {
    rec.error = std::string(to_string(ErrorKind::DuplicateSuggestion)) + ": " +
                format_answer(suggested).substr(8) + " already guards " + to_string(event.action);
    return result;
  }

  try {
    BehaviorTree patched = insert_preconditions(tree, event.action_id, fresh);
    PlanOutcome planned = continue_plan(std::move(patched), domain, ctx.world, ctx.config.plan, ctx.model);
    for (const auto& state : ctx.also_from) {
      if (planned.failure) break;
      planned = continue_plan(std::move(planned.tree), domain, state, ctx.config.plan, ctx.model);
    }
    result.tree = std::move(planned.tree);
    result.pending = std::move(planned.failure);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Unsolvable && e.kind() != ErrorKind::BudgetExceeded) throw;
    rec.error = describe(e);
    result.tree = tree;
    return result;
  }
  for (auto& lit : fresh) rec.inserted.emplace_back(std::move(lit));
  rec.targets = {event.action_id};
  rec.tree_after = result.tree.preorder();
  return result;
}

ResolveResult resolve_parameter(const BehaviorTree& tree, const FailureEvent& event,
                                Backend& backend, const ResolveContext& ctx) {
  const Domain& domain = *ctx.domain;
  ResolveResult result{tree, {}, std::nullopt};
  ResolutionRecord& rec = result.record;
  rec.event = event;
  rec.tree_before = tree.preorder();
  rec.tree_after = rec.tree_before;

  if (!event.missing_slot) throw Error(ErrorKind::InvalidTarget, "failure event names no parameter");
  const SkillTemplate* skill = domain.skill(event.action.skill);
  const ParamDecl* decl = skill == nullptr ? nullptr : skill->param(*event.missing_slot);
  if (decl == nullptr || decl->kind == SlotKind::Object)
    throw Error(ErrorKind::InvalidTarget, "'" + *event.missing_slot + "' is not a parameter of " + event.action.skill);

  rec.exchange.prompt = parameter_prompt(domain, event.world_snapshot, ctx.instruction, event.action, *decl);
  rec.exchange.prompt.error_message = event.error_message;
  rec.exchange.prompt_text = build_prompt(rec.exchange.prompt);
  LlmRequest request{rec.exchange.prompt_text, PromptRole::ParameterResolution, ctx.scenario_id,
                     decl->name, event.action, event.error_message};
  if ((rec.error = ask(backend, request, ctx.config.settings, rec.exchange))) {
    rec.exchange.error = rec.error;
    return result;
  }

  ParamValue value;
  try {
    auto parsed = parse_param_response(rec.exchange.raw_response, *decl);
    rec.exchange.reasoning = parsed.reasoning;
    rec.exchange.parsed = parsed.value;
    value = parsed.value;
  } catch (const Error& e) {
    rec.error = rec.exchange.error = describe(e);
    return result;
  }

  auto objects = event.action.objects();
  SlotSetting setting{"", objects.empty() ? "" : objects.front(), decl->name, to_string(value.value)};
  rec.targets = apply_settings(result.tree, domain, {setting});
  rec.inserted.emplace_back(value);
  rec.tree_after = result.tree.preorder();
  return result;
}

namespace {

FailureEvent planning_event(const ActionFailure& f) {
  return {FailurePhase::Planning, f.action_id, f.action, f.message, f.state.visible_only(), std::nullopt, ""};
}

}  // namespace

RunResult resolve_until_success(const Scenario& scenario, Backend& backend, const ResolveConfig& config) {
  const Domain& domain = scenario.domain;
  RunResult run;
  run.final_world = scenario.initial;

  LlmExchange goal;
  goal.prompt = goal_prompt(domain, scenario.initial, scenario.instruction);
  goal.prompt_text = build_prompt(goal.prompt);
  ++run.backend_calls;
  goal.raw_response = backend.complete(
      {goal.prompt_text, PromptRole::GoalInterpretation, scenario.id, "", std::nullopt, ""}, config.settings);
  GoalResponse parsed = parse_goal_response(goal.raw_response, domain);
  goal.parsed = parsed.goals;
  goal.reasoning = parsed.reasoning;
  run.goal_exchange = goal;
  run.goals = parsed.goals;

  std::vector<SlotSetting> settings = scenario.presets;
  ResolveContext ctx{&domain, scenario.id, scenario.instruction, scenario.initial, {scenario.initial},
                     scenario.planning_model(), config};
  WorldState& world = run.final_world;

  BehaviorTree tree = init_tree(*run.goals);
  std::optional<FailureEvent> pending;
  auto replan = [&](BehaviorTree t) -> bool {
    try {
      PlanOutcome out = continue_plan(std::move(t), domain, world, config.plan, ctx.model);
      tree = std::move(out.tree);
      if (out.failure) pending = planning_event(*out.failure);
      apply_settings(tree, domain, settings);
      return true;
    } catch (const Unsolvable& e) {
      run.outcome = Outcome::Unsolvable;
      run.message = e.what();
    } catch (const PlanBudgetExceeded& e) {
      tree = e.partial_tree();
      run.outcome = Outcome::Exhausted;
      run.message = e.what();
    }
    return false;
  };

  if (!replan(tree)) {
    run.tree = tree;
    return run;
  }
  run.planned = tree;

  std::size_t rounds = 0;
  for (;;) {
    if (!pending) {
      ExecutionTrace trace;
      try {
        trace = execute(tree, scenario, world, config.exec);
      } catch (const TickBudgetExceeded& e) {
        run.traces.push_back(e.trace());
        world = e.trace().final_state;
        run.outcome = Outcome::Exhausted;
        run.message = e.what();
        break;
      }
      world = trace.final_state;
      run.traces.push_back(trace);
      if (trace.final_status == NodeStatus::Success) {
        run.outcome = Outcome::Success;
        run.message = "goal reached";
        break;
      }
      if (trace.failures.empty()) {
        // The world moved somewhere the tree has no branch for yet.
        std::size_t before = tree.size();
        if (!replan(tree)) break;
        if (tree.size() == before && !pending) {
          run.outcome = Outcome::Failure;
          run.message = "policy failed without an action failure";
          break;
        }
        continue;
      }
      pending = trace.failures.back();
    }

    if (!config.resolve) {
      run.outcome = Outcome::Failure;
      run.message = pending->error_message;
      break;
    }
    if (rounds >= config.max_resolution_rounds) {
      run.outcome = Outcome::Exhausted;
      run.message = "unresolved after " + std::to_string(rounds) + " rounds: " + pending->error_message;
      break;
    }
    ++rounds;
    ++run.backend_calls;
    ctx.world = world;
    ResolveResult r = pending->missing_slot ? resolve_parameter(tree, *pending, backend, ctx)
                                            : resolve(tree, *pending, backend, ctx);
    r.record.round = rounds;
    if (r.record.ok()) {
      tree = std::move(r.tree);
      if (pending->missing_slot) {
        const auto& value = std::get<ParamValue>(r.record.inserted.front());
        auto objects = pending->action.objects();
        settings.push_back({"", objects.empty() ? "" : objects.front(), value.slot, to_string(value.value)});
      }
      apply_settings(tree, domain, settings);
      pending.reset();
      if (r.pending) pending = planning_event(*r.pending);
    }
    run.records.push_back(std::move(r.record));
  }
  run.tree = tree;
  return run;
}

RunResult replay(const BehaviorTree& tree, const Scenario& scenario, const ResolveConfig& config) {
  RunResult run;
  run.tree = tree;
  run.final_world = scenario.initial;
  try {
    ExecutionTrace trace = execute(tree, scenario, scenario.initial, config.exec);
    run.final_world = trace.final_state;
    run.outcome = trace.final_status == NodeStatus::Success ? Outcome::Success : Outcome::Failure;
    run.message = trace.failures.empty() ? (run.outcome == Outcome::Success ? "goal reached" : "policy failed")
                                         : trace.failures.back().error_message;
    run.traces.push_back(std::move(trace));
  } catch (const TickBudgetExceeded& e) {
    run.outcome = Outcome::Exhausted;
    run.message = e.what();
    run.traces.push_back(e.trace());
  }
  return run;
}

}  // namespace btx
