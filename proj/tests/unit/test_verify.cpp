#include "btx/sim.hpp"
#include "btx/tree_io.hpp"
#include "btx/verify.hpp"
#include "doctest.h"
#include "paths.hpp"

using namespace btx;

namespace {

TreeNode cond(const char* text) { return TreeNode::make_condition(parse_literal(text)); }

TreeNode lamp(const char* skill) { return TreeNode::make_action(GroundAction{skill, {{"l", ObjectValue{"lamp"}}}}); }

bool has(const VerificationReport& r, const char* check) {
  for (const auto& v : r.violations)
    if (v.check == check) return true;
  return false;
}

const Domain& blocks() {
  static Domain d = load_domain(testdata::fixture("blocks.json"));
  return d;
}

}  // namespace

TEST_CASE("golden trees pass every check") {
  Scenario s = load_scenario(testdata::scenarios() / "golden_cube_stack.json");
  GoalSpec g({parse_literal("on(blue_cube, green_cube)")});
  for (const char* which : {"planned", "resolved"}) {
    CAPTURE(which);
    VerificationReport r = verify_tree(load_tree(s.golden.at(which)), s.domain, g);
    CHECK(r.passed());
    CHECK(r.exhaustive);
    CHECK(r.checks.size() == 5);
    CHECK(report_text(r).rfind("PASS", 0) == 0);
  }
}

TEST_CASE("a goal without a condition leaf is reported") {
  Scenario s = load_scenario(testdata::scenarios() / "golden_cube_stack.json");
  GoalSpec g({parse_literal("on(blue_cube, green_cube)"), parse_literal("on(red_cube, blue_cube)")});
  VerificationReport r = verify_tree(load_tree(s.golden.at("planned")), s.domain, g);
  CHECK_FALSE(r.passed());
  CHECK(has(r, kCheckGoals));
  CHECK(report_text(r).rfind("FAIL", 0) == 0);
  CHECK(report_json(r).find("\"goals\"") != std::string::npos);
}

TEST_CASE("unguarded and unknown actions are reported") {
  BehaviorTree t(TreeNode::fallback({cond("on(a, b)"), TreeNode::make_action(GroundAction{
                                                         "stack", {{"x", ObjectValue{"a"}}, {"y", ObjectValue{"b"}}}})}));
  VerificationReport r = verify_tree(t, blocks(), std::nullopt);
  CHECK(has(r, kCheckPreconditions));

  BehaviorTree bad(TreeNode::fallback({cond("on(a, b)"), TreeNode::make_action(GroundAction{"teleport", {}})}));
  CHECK(has(verify_tree(bad, blocks(), std::nullopt), kCheckActions));
}

TEST_CASE("identical fallback branches are reported") {
  BehaviorTree t(TreeNode::fallback({cond("lit(lamp)"), lamp("switch_on"), lamp("switch_on")}));
  CHECK(has(verify_tree(t, blocks(), std::nullopt), kCheckFallbacks));
}

TEST_CASE("a toggling policy is a livelock") {
  BehaviorTree t(TreeNode::fallback({TreeNode::sequence({cond("lit(lamp)"), lamp("switch_off")}),
                                     TreeNode::sequence({cond("~lit(lamp)"), lamp("switch_on")})}));
  Domain small = blocks().restricted_to({"a", "lamp"});
  VerificationReport r = verify_tree(t, small, std::nullopt);
  CHECK(has(r, kCheckLivelock));
  CHECK(r.exhaustive);
  CHECK(r.states_explored == 2);

  BehaviorTree settles(TreeNode::fallback({cond("lit(lamp)"), lamp("switch_on")}));
  CHECK(verify_tree(settles, small, std::nullopt).passed());
}

TEST_CASE("large domains fall back to seed states") {
  Domain cafe = load_domain(testdata::domain("cafe"));
  BehaviorTree t(TreeNode::fallback({cond("Active(TubeLight)"), cond("Known(Coffee)")}));
  VerifyConfig cfg;
  VerificationReport r = verify_tree(t, cafe, std::nullopt, cfg);
  CHECK_FALSE(r.exhaustive);
}
