#include "btx/error.hpp"
#include "btx/planner.hpp"
#include "btx/sim.hpp"
#include "btx/tree_io.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "paths.hpp"

using namespace btx;

namespace {

Atom atom(const char* text) { return to_atom(parse_literal(text)); }

GoalSpec goal(std::initializer_list<const char*> lits) {
  std::vector<Literal> out;
  for (const char* l : lits) out.push_back(parse_literal(l));
  return GoalSpec(out);
}

const Domain& blocks() {
  static Domain d = load_domain(testdata::fixture("blocks.json"));
  return d;
}

// Ticks a tree against a state with instant actions and no planning.
std::pair<NodeStatus, WorldState> run_static(const BehaviorTree& tree, const Domain& d, WorldState s,
                                             std::size_t max_ticks = 100) {
  for (std::size_t i = 0; i < max_ticks; ++i) {
    std::optional<GroundAction> chosen;
    TickTrace t = tick(tree, observe(s, [&](NodeId, const GroundAction& a) {
                         chosen = a;
                         return NodeStatus::Running;
                       }));
    if (t.root_status != NodeStatus::Running) return {t.root_status, s};
    s = apply_effects(d, s, *chosen);
  }
  return {NodeStatus::Running, s};
}

}  // namespace

TEST_CASE("goal specs must be non-empty") {
  CHECK_THROWS_AS(GoalSpec({}), Error);
  CHECK(to_string(goal({"on(a, b)", "~lit(lamp)"})) == "on(a, b) & ~lit(lamp)");
}

TEST_CASE("initial tree is a sequence of goal conditions") {
  BehaviorTree t = init_tree(goal({"on(a, b)", "lit(lamp)"}));
  CHECK(t.root().kind == NodeKind::Sequence);
  REQUIRE(t.root().children.size() == 2);
  CHECK(to_string(*t.root().children[1].condition) == "lit(lamp)");
}

TEST_CASE("expanding a condition builds a fallback over its achievers") {
  BehaviorTree t = init_tree(goal({"on(a, b)"}));
  BehaviorTree x = expand_condition(t, 2, blocks(), WorldState{});
  const TreeNode& fb = x.root().children[0];
  CHECK(fb.kind == NodeKind::Fallback);
  CHECK(fb.children[0].id == 2);
  CHECK(fb.children[1].kind == NodeKind::Sequence);
  CHECK(fb.children[1].children.back().action->skill == "stack");

  WorldState done({atom("on(a, b)")});
  try {
    expand_condition(t, 2, blocks(), done);
    FAIL("expected PreconditionViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PreconditionViolation);
  }
}

TEST_CASE("golden cube stacking plan") {
  Scenario s = load_scenario(testdata::scenarios() / "golden_cube_stack.json");
  BehaviorTree planned = plan(goal({"on(blue_cube, green_cube)"}), s.domain, s.initial);
  BehaviorTree golden = load_tree(s.golden.at("planned"));
  CHECK(same_structure(planned.root(), golden.root()));
}

TEST_CASE("unreachable goals are unsolvable") {
  try {
    plan(goal({"holding(table)"}), blocks(), WorldState{});
    FAIL("expected Unsolvable");
  } catch (const Unsolvable& e) {
    CHECK(to_string(e.literal()) == "holding(table)");
  }
}

TEST_CASE("expansion budget yields a partial tree") {
  PlanConfig tight;
  tight.max_expansions = 1;
  WorldState s({atom("on(a, table)"), atom("on(b, table)"), atom("holding(c)")});
  try {
    plan(goal({"on(a, b)"}), blocks(), s, tight);
    FAIL("expected PlanBudgetExceeded");
  } catch (const PlanBudgetExceeded& e) {
    CHECK(e.kind() == ErrorKind::BudgetExceeded);
    CHECK(e.partial_tree().size() > 1);
  }
  PlanConfig zero;
  zero.max_expansions = 0;
  CHECK_THROWS_AS(zero.validate(), Error);
}

TEST_CASE("plans agree with breadth-first search on the blocks domain") {
  const Domain& d = blocks();
  std::vector<std::set<Atom>> starts{
      {atom("on(a, table)"), atom("on(b, table)"), atom("on(c, table)")},
      {atom("on(a, b)"), atom("on(b, c)"), atom("on(c, table)")},
      {atom("holding(a)"), atom("on(b, c)"), atom("lit(lamp)")},
  };
  std::vector<std::string> singles;
  for (const char* x : {"a", "b", "c"}) {
    singles.push_back(std::string("holding(") + x + ")");
    singles.push_back(std::string("~on(any_object, ") + x + ")");
    for (const char* y : {"a", "b", "c", "table"})
      if (std::string(x) != y) singles.push_back(std::string("on(") + x + ", " + y + ")");
  }
  singles.push_back("lit(lamp)");
  singles.push_back("~lit(lamp)");
  singles.push_back("holding(lamp)");
  for (const auto& init : starts)
    for (const auto& g : singles) {
      CAPTURE(g);
      std::vector<Literal> lits{parse_literal(g)};
      auto bfs = oracle::bfs_plan_length(d, init, lits);
      bool planned = true;
      try {
        PlanOutcome out = continue_plan(init_tree(GoalSpec(lits)), d, WorldState(init));
        CHECK(GoalSpec(lits).satisfied_by(out.final_state));
      } catch (const Error&) {
        planned = false;
      }
      CHECK(planned == bfs.has_value());
    }
}

TEST_CASE("planned trees react to disturbances without replanning") {
  const Domain& d = blocks();
  WorldState init({atom("on(a, table)"), atom("on(b, table)"), atom("on(c, a)")});
  GoalSpec g = goal({"on(a, b)"});
  PlanOutcome out = continue_plan(init_tree(g), d, init);
  REQUIRE(g.satisfied_by(out.final_state));
  // Undo the goal: a back on the table.
  WorldState disturbed = out.final_state;
  disturbed.remove(atom("on(a, b)"));
  disturbed.add(atom("on(a, table)"));
  auto [status, end] = run_static(out.tree, d, disturbed);
  CHECK(status == NodeStatus::Success);
  CHECK(g.satisfied_by(end));
}

TEST_CASE("observe evaluates conditions against visible atoms") {
  WorldState s({atom("on(a, b)")}, {atom("jammed(lamp)")});
  TickContext ctx = observe(s, {});
  CHECK(ctx.condition(parse_literal("on(a, any_object)")));
  CHECK_FALSE(ctx.condition(parse_literal("lit(lamp)")));
}
