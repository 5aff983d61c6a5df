#include <algorithm>
#include <random>

#include "btx/error.hpp"
#include "btx/llm.hpp"
#include "btx/sim.hpp"
#include "doctest.h"
#include "fuzz.hpp"
#include "paths.hpp"

using namespace btx;

namespace {

const Domain& tabletop() {
  static Domain d = load_domain(testdata::domain("tabletop"));
  return d;
}

Atom atom(const char* text) { return to_atom(parse_literal(text)); }

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("prompts contain every piece of context for their role") {
  for (const auto& sc : load_scenarios(testdata::scenarios())) {
    CAPTURE(sc.id);
    std::vector<PromptSpec> specs{goal_prompt(sc.domain, sc.initial, sc.instruction)};
    for (const auto& sk : sc.domain.skills) {
      // Any grounding over the scenario's objects will do.
      GroundAction a{sk.name, {}};
      bool grounded = true;
      for (const auto& q : sk.params)
        if (q.kind == SlotKind::Object) {
          auto candidates = sc.domain.objects_in(q.categories);
          if (candidates.empty()) grounded = false;
          else a.bind(q.name, ObjectValue{candidates.front()});
        }
      if (!grounded) continue;
      specs.push_back(failure_prompt(sc.domain, sc.initial, sc.instruction, a, "Gripper stalled"));
      for (const auto& p : sk.params)
        if (p.kind != SlotKind::Object) specs.push_back(parameter_prompt(sc.domain, sc.initial, sc.instruction, a, p));
    }
    CHECK(specs.size() > 1);
    for (const auto& spec : specs) {
      std::string text = build_prompt(spec);
      CHECK(contains(text, sc.instruction));
      for (const auto* p : sc.domain.catalog()) {
        CHECK(contains(text, p->description));
        CHECK(contains(text, p->name + "("));
      }
      for (const auto& pred : sc.domain.predicates)
        if (pred.hidden) CHECK_FALSE(contains(text, pred.name + "("));
      for (const auto& o : sc.domain.objects) CHECK(contains(text, o.name));
      CHECK(contains(text, spec.scene_description));
      CHECK(contains(text, spec.output_format));
      if (spec.error_message) CHECK(contains(text, *spec.error_message));
      if (spec.slot) CHECK(contains(text, spec.slot->name));
      CHECK(build_prompt(spec) == text);
    }
  }
}

TEST_CASE("scene descriptions use predicate phrases") {
  WorldState s({atom("on(red_cube, blue_cube)"), atom("grasped(green_cube)")});
  std::string scene = describe_scene(tabletop(), s);
  CHECK(contains(scene, "red_cube"));
  CHECK(contains(scene, "blue_cube"));
  CHECK(contains(scene, "green_cube"));
}

TEST_CASE("incomplete prompt specs are rejected") {
  PromptSpec spec = goal_prompt(tabletop(), WorldState{}, "stack");
  spec.role = PromptRole::FailureResolution;
  try {
    build_prompt(spec);
    FAIL("expected InvalidSpec");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidSpec);
  }
}

TEST_CASE("goal answers parse with optional reasoning") {
  auto r = parse_goal_response("ANSWER: on(blue_cube, green_cube) & ~grasped(any_object)\nREASONING: stack it\nand more",
                               tabletop());
  REQUIRE(r.goals.conjuncts().size() == 2);
  CHECK(to_string(r.goals) == "on(blue_cube, green_cube) & ~grasped(any_object)");
  REQUIRE(r.reasoning);
  CHECK(contains(*r.reasoning, "stack it"));
  CHECK(contains(*r.reasoning, "and more"));

  auto bare = parse_goal_response("\n  ANSWER: open(centrifuge)", tabletop());
  CHECK_FALSE(bare.reasoning);
}

TEST_CASE("format errors name the token and column") {
  struct Case {
    const char* raw;
    std::size_t column;
  };
  for (Case c : {Case{"GOAL: on(blue_cube, table)", 1}, Case{"ANSWER: on(blue_cube table)", 22},
                 Case{"ANSWER: on(blue_cube, table) &", 31}, Case{"ANSWER:", 8}, Case{"", 1},
                 Case{"ANSWER: grasped(?x)", 17}}) {
    CAPTURE(c.raw);
    try {
      parse_precondition_response(c.raw, tabletop());
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.column() == c.column);
    }
  }
}

TEST_CASE("unknown symbols are reported by name") {
  try {
    parse_goal_response("ANSWER: on(banana, table)", tabletop());
    FAIL("expected UnknownSymbol");
  } catch (const UnknownSymbol& e) {
    CHECK(e.name() == "banana");
  }
  CHECK_THROWS_AS(parse_goal_response("ANSWER: floating(red_cube)", tabletop()), UnknownSymbol);
}

TEST_CASE("parameter answers check units and vocabulary") {
  ParamDecl force{"force", SlotKind::Numeric, {}, "N", {}, ""};
  auto f = parse_param_response("ANSWER: 5.3 N\nREASONING: eggs are fragile", force);
  CHECK(f.value.slot == "force");
  CHECK(std::get<Quantity>(f.value.value) == Quantity{5.3, "N"});
  try {
    parse_param_response("ANSWER: 5.3 kg", force);
    FAIL("expected UnitMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnitMismatch);
  }
  CHECK_THROWS_AS(parse_param_response("ANSWER: gentle", force), FormatError);

  ParamDecl tool{"tool", SlotKind::Categorical, {}, "", {"shovel", "spoon"}, ""};
  auto in = parse_param_response("ANSWER: shovel", tool);
  CHECK_FALSE(std::get<CategoryValue>(in.value.value).out_of_vocabulary);
  auto out = parse_param_response("ANSWER: ladle", tool);
  CHECK(std::get<CategoryValue>(out.value.value).out_of_vocabulary);
}

TEST_CASE("formatted answers parse back") {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    std::vector<Literal> lits;
    for (int k = 0; k < 1 + i % 3; ++k) {
      Literal l = fuzz::random_literal(rng, tabletop());
      if (std::find(lits.begin(), lits.end(), l) == lits.end()) lits.push_back(l);
    }
    CHECK(parse_precondition_response(format_answer(lits), tabletop()).preconditions == lits);
  }
  ParamDecl speed{"speed", SlotKind::Numeric, {}, "m/s", {}, ""};
  CHECK(std::get<Quantity>(parse_param_response(format_answer(SlotValue{Quantity{0.6, "m/s"}}), speed).value.value) ==
        Quantity{0.6, "m/s"});
}

TEST_CASE("parsers only ever throw typed errors") {
  std::mt19937 rng(11);
  ParamDecl force{"force", SlotKind::Numeric, {}, "N", {}, ""};
  for (int i = 0; i < 2000; ++i) {
    std::string raw = fuzz::random_response(rng, tabletop());
    CAPTURE(raw);
    for (int which = 0; which < 3; ++which) {
      try {
        if (which == 0) parse_goal_response(raw, tabletop());
        if (which == 1) parse_precondition_response(raw, tabletop());
        if (which == 2) parse_param_response(raw, force);
      } catch (const FormatError& e) {
        CHECK(e.column() >= 1);
      } catch (const UnknownSymbol&) {
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnitMismatch);
      }
    }
  }
}
