#include "btx/domain.hpp"
#include "btx/error.hpp"
#include "doctest.h"
#include "paths.hpp"

using namespace btx;

namespace {

Atom atom(const char* text) { return to_atom(parse_literal(text)); }

const Domain& tabletop() {
  static Domain d = load_domain(testdata::domain("tabletop"));
  return d;
}

}  // namespace

TEST_CASE("wildcards are existential when positive and universal when negated") {
  std::set<Atom> s{atom("on(red_cube, blue_cube)")};
  CHECK(holds(s, parse_literal("on(any_object, blue_cube)")));
  CHECK_FALSE(holds(s, parse_literal("~on(any_object, blue_cube)")));
  CHECK(holds(s, parse_literal("~on(any_object, green_cube)")));
  CHECK_FALSE(holds(s, parse_literal("on(any_object, green_cube)")));
  CHECK(holds({}, parse_literal("~grasped(any_object)")));
}

TEST_CASE("validation rejects unknown symbols and bad arity") {
  const Domain& d = tabletop();
  CHECK_NOTHROW(d.validate_literal(parse_literal("on(blue_cube, any_object)")));
  CHECK_THROWS_AS(d.validate_literal(parse_literal("on(banana, blue_cube)")), UnknownSymbol);
  CHECK_THROWS_AS(d.validate_literal(parse_literal("levitating(blue_cube)")), UnknownSymbol);
  CHECK_THROWS_AS(d.validate_literal(parse_literal("on(blue_cube)")), FormatError);
  CHECK_THROWS_AS(d.validate_literal(parse_literal("on(?x, blue_cube)")), FormatError);
}

TEST_CASE("effects delete before they add") {
  const Domain& d = tabletop();
  WorldState s({atom("on(red_cube, blue_cube)"), atom("on(blue_cube, table)")});
  GroundAction grasp{"grasp", {{"obj", ObjectValue{"red_cube"}}}};
  WorldState after = apply_effects(d, s, grasp);
  CHECK(after.contains(atom("grasped(red_cube)")));
  CHECK_FALSE(after.contains(atom("on(red_cube, blue_cube)")));
  CHECK(after.contains(atom("on(blue_cube, table)")));

  GroundAction place{"place", {{"obj", ObjectValue{"red_cube"}}, {"dst", ObjectValue{"green_cube"}}}};
  WorldState placed = apply_effects(d, after, place);
  CHECK(placed.contains(atom("on(red_cube, green_cube)")));
  CHECK_FALSE(placed.contains(atom("grasped(red_cube)")));
}

TEST_CASE("substitution needs bound object slots") {
  GroundAction a{"place", {{"obj", ObjectValue{"red_cube"}}}};
  CHECK(substitute(parse_literal("grasped(?obj)"), a) == parse_literal("grasped(red_cube)"));
  try {
    substitute(parse_literal("on(?obj, ?dst)"), a);
    FAIL("expected UnboundSlot");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundSlot);
  }
}

TEST_CASE("achievers unify with the goal and guard wildcard links") {
  const Domain& d = tabletop();
  auto on = ground_achievers(d, parse_literal("on(blue_cube, green_cube)"));
  REQUIRE(on.size() == 1);
  CHECK(to_string(on[0].action) == "place(blue_cube, green_cube)");
  CHECK_FALSE(on[0].guard);

  // Clearing the blue cube: grasping whatever sits on it.
  auto clear = ground_achievers(d, parse_literal("~on(any_object, blue_cube)"));
  REQUIRE_FALSE(clear.empty());
  CHECK(clear[0].action.skill == "grasp");
  REQUIRE(clear[0].guard);
  CHECK(clear[0].guard->predicate == "on");
  CHECK(clear[0].guard->args[1].name == "blue_cube");
  for (const auto& a : clear) CHECK(a.action.object("obj") != "blue_cube");

  CHECK(ground_achievers(d, parse_literal("grasped(table)")).empty());
}

TEST_CASE("restriction keeps the named objects only") {
  Domain r = tabletop().restricted_to({"red_cube", "table"});
  CHECK(r.objects.size() == 2);
  CHECK(r.object("blue_cube") == nullptr);
  CHECK(r.objects_in({"cube"}) == std::vector<std::string>{"red_cube"});
}

TEST_CASE("hidden predicates stay out of the catalog") {
  Domain cafe = load_domain(testdata::domain("cafe"));
  for (const auto* p : cafe.catalog()) CHECK_FALSE(p->hidden);
  CHECK(cafe.predicate("Locked") != nullptr);
  CHECK_THROWS_AS(cafe.validate_literal(parse_literal("Locked(Cupboard)")), UnknownSymbol);
  CHECK_NOTHROW(cafe.validate_literal(parse_literal("Locked(Cupboard)"), false, true));
}

TEST_CASE("malformed domain files are schema errors with positions") {
  try {
    parse_domain(R"({"format": "btx-domain", "version": 1, "name": "x",
      "predicates": [{"name": "on", "arity": "two"}], "objects": [], "skills": []})",
                 "bad.json");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.source() == "bad.json");
    CHECK(e.line() >= 1);
  }
  CHECK_THROWS_AS(parse_domain("{", "trunc.json"), SchemaError);
}

TEST_CASE("bundled domains load") {
  for (const char* name : {"tabletop", "cafe", "household"}) {
    CAPTURE(name);
    Domain d = load_domain(testdata::domain(name));
    CHECK_FALSE(d.skills.empty());
    for (const auto& sk : d.skills)
      for (const auto& e : sk.effects) CHECK_NOTHROW(d.validate_literal(e, true, true));
  }
  CHECK_NOTHROW(load_domain(testdata::fixture("blocks.json")));
}
