#include <algorithm>

#include "btx/bench.hpp"
#include "btx/error.hpp"
#include "btx/resolver.hpp"
#include "btx/tree_io.hpp"
#include "doctest.h"
#include "paths.hpp"

using namespace btx;

namespace {

Scenario scenario(const char* id) { return load_scenario(testdata::scenarios() / (std::string(id) + ".json")); }

OracleBackend oracle_for(const Scenario& s) {
  OracleBackend o;
  add_scenario_knowledge(o, {s});
  return o;
}

RunResult run(const Scenario& s) {
  OracleBackend o = oracle_for(s);
  return resolve_until_success(s, o);
}

// Nodes of the tree satisfying `pred`.
void collect(const TreeNode& n, const std::function<bool(const TreeNode&)>& pred, std::vector<const TreeNode*>& out) {
  if (pred(n)) out.push_back(&n);
  for (const auto& c : n.children) collect(c, pred, out);
}

std::vector<const TreeNode*> actions_named(const BehaviorTree& t, const std::string& skill) {
  std::vector<const TreeNode*> out;
  collect(t.root(), [&](const TreeNode& n) { return n.kind == NodeKind::Action && n.action->skill == skill; }, out);
  return out;
}

// The literal a child of a precondition sequence stands for.
std::optional<Literal> head_literal(const TreeNode& n) {
  if (n.kind == NodeKind::Condition) return n.condition;
  if (n.kind == NodeKind::Fallback && n.children[0].kind == NodeKind::Condition) return n.children[0].condition;
  return std::nullopt;
}

}  // namespace

TEST_CASE("golden cube stacking: planned and resolved trees") {
  Scenario s = scenario("golden_cube_stack");
  RunResult r = run(s);
  REQUIRE(r.outcome == Outcome::Success);
  REQUIRE(r.planned);
  CHECK(same_structure(r.planned->root(), load_tree(s.golden.at("planned")).root()));
  CHECK(same_structure(r.tree->root(), load_tree(s.golden.at("resolved")).root()));
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].event.error_message == "No collision free path found");
  CHECK(to_string(r.records[0].inserted.at(0)) == "~on(any_object, blue_cube)");
}

TEST_CASE("two blockers take two rounds") {
  RunResult r = run(scenario("pre_02_two_blockers"));
  CHECK(r.outcome == Outcome::Success);
  CHECK(r.records.size() == 2);
  for (const auto& rec : r.records) CHECK(rec.ok());
}

TEST_CASE("a fault-free scenario needs no resolution") {
  Scenario s = scenario("golden_cube_stack");
  s.faults.clear();
  RunResult r = run(s);
  CHECK(r.outcome == Outcome::Success);
  CHECK(r.records.empty());
  CHECK(r.backend_calls == 1);
}

TEST_CASE("unparseable answers exhaust the round budget") {
  Scenario s = scenario("golden_cube_stack");
  ScriptedBackend b({{"golden_cube_stack/goal", {"ANSWER: on(blue_cube, green_cube)"}},
                     {"golden_cube_stack/failure", {"I think the red cube is in the way."}}});
  ResolveConfig cfg;
  cfg.max_resolution_rounds = 3;
  RunResult r = resolve_until_success(s, b, cfg);
  CHECK(r.outcome == Outcome::Exhausted);
  REQUIRE(r.records.size() == 3);
  for (const auto& rec : r.records) {
    CHECK_FALSE(rec.ok());
    CHECK(rec.inserted.empty());
    CHECK(rec.tree_before == rec.tree_after);
  }
  CHECK(same_structure(r.tree->root(), r.planned->root()));
}

TEST_CASE("suggesting an existing precondition is rejected") {
  Scenario s = scenario("golden_cube_stack");
  ScriptedBackend b({{"golden_cube_stack/goal", {"ANSWER: on(blue_cube, green_cube)"}},
                     {"golden_cube_stack/failure", {"ANSWER: ~grasped(any_object)"}}});
  ResolveConfig cfg;
  cfg.max_resolution_rounds = 1;
  RunResult r = resolve_until_success(s, b, cfg);
  CHECK(r.outcome == Outcome::Exhausted);
  REQUIRE(r.records.size() == 1);
  REQUIRE(r.records[0].error);
  CHECK(r.records[0].error->find("DuplicateSuggestion") != std::string::npos);
}

TEST_CASE("unachievable suggestions roll back") {
  Scenario s = scenario("golden_cube_stack");
  ScriptedBackend b({{"golden_cube_stack/goal", {"ANSWER: on(blue_cube, green_cube)"}},
                     {"golden_cube_stack/failure", {"ANSWER: grasped(table)"}}});
  ResolveConfig cfg;
  cfg.max_resolution_rounds = 1;
  RunResult r = resolve_until_success(s, b, cfg);
  REQUIRE(r.records.size() == 1);
  REQUIRE(r.records[0].error);
  CHECK(r.records[0].tree_before == r.records[0].tree_after);
}

TEST_CASE("disabling resolution reports the first failure") {
  Scenario s = scenario("pre_05_locked_cupboard");
  OracleBackend o = oracle_for(s);
  ResolveConfig cfg;
  cfg.resolve = false;
  RunResult r = resolve_until_success(s, o, cfg);
  CHECK(r.outcome == Outcome::Failure);
  CHECK(r.message.find("Torque limit exceeded") != std::string::npos);
  CHECK(r.records.empty());
}

TEST_CASE("learned fixes are permanent and repairs are monotone") {
  for (const auto& s : load_scenarios(testdata::scenarios())) {
    CAPTURE(s.id);
    OracleBackend o = oracle_for(s);
    CountingBackend counting(o);
    RunResult r = resolve_until_success(s, counting);
    REQUIRE(r.outcome == Outcome::Success);
    if (s.expected_rounds) CHECK(r.records.size() == *s.expected_rounds);
    CHECK(r.backend_calls == counting.calls());
    CHECK(counting.calls() <= r.records.size() + 1);

    RunResult again = replay(*r.tree, s);
    CHECK(again.outcome == Outcome::Success);
    CHECK(again.backend_calls == 0);

    for (const auto& rec : r.records) {
      REQUIRE(rec.ok());
      for (NodeId id : rec.tree_before)
        CHECK(std::find(rec.tree_after.begin(), rec.tree_after.end(), id) != rec.tree_after.end());
      NodeId max_before = *std::max_element(rec.tree_before.begin(), rec.tree_before.end());
      for (NodeId id : rec.tree_after)
        if (std::find(rec.tree_before.begin(), rec.tree_before.end(), id) == rec.tree_before.end())
          CHECK(id > max_before);
    }
  }
}

TEST_CASE("inserted preconditions come first") {
  for (const char* id : {"golden_cube_stack", "pre_03_upside_down_cup", "pre_05_locked_cupboard", "pre_10_sweep_without_mop"}) {
    CAPTURE(id);
    Scenario s = scenario(id);
    OracleBackend o = oracle_for(s);
    BehaviorTree planned = plan(GoalSpec({parse_literal(s.oracle.goal)}), s.domain, s.initial);
    apply_settings(planned, s.domain, s.presets);
    ExecutionTrace trace = execute(planned, s, s.initial);
    REQUIRE_FALSE(trace.failures.empty());
    const FailureEvent& ev = trace.failures.front();
    ResolveContext ctx;
    ctx.domain = &s.domain;
    ctx.scenario_id = s.id;
    ctx.instruction = s.instruction;
    ctx.world = ev.world_snapshot;
    ctx.also_from = {s.initial};
    ctx.model = s.planning_model();
    ResolveResult res = resolve(planned, ev, o, ctx);
    REQUIRE(res.record.ok());
    auto path = enclosing_sequence(res.tree, ev.action_id);
    REQUIRE(path);
    const TreeNode& seq = res.tree.at(*path);
    for (std::size_t i = 0; i < res.record.inserted.size(); ++i) {
      auto head = head_literal(seq.children.at(i));
      REQUIRE(head);
      CHECK(*head == std::get<Literal>(res.record.inserted[i]));
    }
    CHECK(std::find(res.record.targets.begin(), res.record.targets.end(), ev.action_id) != res.record.targets.end());
  }
}

TEST_CASE("parameter values propagate to actions on the same object") {
  Scenario sand = scenario("param_05_sand_bucket");
  RunResult r = run(sand);
  REQUIRE(r.outcome == Outcome::Success);
  CHECK(r.records.size() == 1);
  auto leaves = actions_named(*r.tree, "Scoop");
  auto pours = actions_named(*r.tree, "Pour");
  leaves.insert(leaves.end(), pours.begin(), pours.end());
  REQUIRE(leaves.size() >= 2);
  for (const TreeNode* n : leaves) {
    const SlotValue* tool = n->action->get("tool");
    REQUIRE(tool);
    CHECK(std::get<CategoryValue>(*tool).symbol == "shovel");
  }
  CHECK(r.records[0].targets.size() == leaves.size());

  RunResult baby = run(scenario("param_04_baby_crib"));
  REQUIRE(baby.outcome == Outcome::Success);
  for (const TreeNode* n : actions_named(*baby.tree, "Carry"))
    CHECK(std::get<Quantity>(*n->action->get("speed")) == Quantity{0.1, "m/s"});
  CHECK(parameter_mismatches(*baby.tree, scenario("param_04_baby_crib")).empty());
}

TEST_CASE("presets are applied and egg and hammer get their own forces") {
  Scenario s = scenario("param_01_egg_hammer");
  RunResult r = run(s);
  REQUIRE(r.outcome == Outcome::Success);
  for (const TreeNode* n : actions_named(*r.tree, "Pick")) {
    auto q = std::get<Quantity>(*n->action->get("force"));
    CHECK(q == (n->action->objects().front() == "Egg" ? Quantity{5.3, "N"} : Quantity{37.2, "N"}));
  }
  for (const TreeNode* n : actions_named(*r.tree, "Carry"))
    CHECK(std::get<Quantity>(*n->action->get("speed")) == Quantity{0.5, "m/s"});
}

TEST_CASE("settings bind only unbound matching slots") {
  Scenario s = scenario("param_02_pillow");
  BehaviorTree t = plan(GoalSpec({parse_literal(s.oracle.goal)}), s.domain, s.initial);
  auto changed = apply_settings(t, s.domain, s.presets);
  CHECK_FALSE(changed.empty());
  CHECK(apply_settings(t, s.domain, s.presets).empty());
}
