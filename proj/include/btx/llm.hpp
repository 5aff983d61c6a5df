#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btx/action.hpp"
#include "btx/domain.hpp"
#include "btx/planner.hpp"

namespace btx {

struct CatalogEntry {
  std::string signature;  // "on(x, y)"
  std::string description;
};

struct PromptSpec {
  PromptRole role = PromptRole::GoalInterpretation;
  std::string instruction;
  std::vector<ObjectRef> objects;
  std::vector<CatalogEntry> condition_catalog;
  std::vector<PromptExample> examples;
  std::string scene_description;
  std::optional<std::string> error_message;
  std::optional<GroundAction> failing_action;
  std::optional<ParamDecl> slot;  // parameter resolution only
  std::string output_format;

  // Throws Error(InvalidSpec) when the role's required context is missing.
  void validate() const;
};

// "<red_cube> is on <blue_cube>. <gripper> is open." from visible atoms,
// using each predicate's phrase template ("<{0}> is on <{1}>").
std::string describe_scene(const Domain& domain, const WorldState& state);

// Catalog rows for visible predicates, e.g. {"on(x, y)", "..."}.
std::vector<CatalogEntry> condition_catalog(const Domain& domain);

// Grammar text appended to every prompt of the role.
std::string output_format(PromptRole role, const ParamDecl* slot = nullptr);

PromptSpec goal_prompt(const Domain& domain, const WorldState& state, std::string instruction);
PromptSpec failure_prompt(const Domain& domain, const WorldState& state, std::string instruction,
                          const GroundAction& action, std::string error_message);
PromptSpec parameter_prompt(const Domain& domain, const WorldState& state,
                            std::string instruction, const GroundAction& action,
                            const ParamDecl& slot);

// Deterministic rendering: role instructions, condition catalog, objects,
// scene, examples, error context, output format.
std::string build_prompt(const PromptSpec& spec);

// Answer grammar (first non-empty line, optional reasoning after it):
//   ANSWER: <literal> [& <literal>]...
//   REASONING: <free text, may continue on later lines>
struct GoalResponse {
  GoalSpec goals;
  std::optional<std::string> reasoning;
};

struct PreconditionResponse {
  std::vector<Literal> preconditions;
  std::optional<std::string> reasoning;
};

struct ParamResponse {
  ParamValue value;
  std::optional<std::string> reasoning;
};

// Throw FormatError (grammar) or UnknownSymbol (predicate/object not in the
// domain catalog); both name the offending token.
GoalResponse parse_goal_response(std::string_view raw, const Domain& domain);
PreconditionResponse parse_precondition_response(std::string_view raw, const Domain& domain);
// Numeric slots need "<number> <unit>" with the declared unit (else
// Error(UnitMismatch)); categorical values outside the vocabulary are
// flagged out_of_vocabulary.
ParamResponse parse_param_response(std::string_view raw, const ParamDecl& slot);

// Inverse of the parsers: "ANSWER: on(a, b) & ~open(c)".
std::string format_answer(const std::vector<Literal>& literals);
std::string format_answer(const SlotValue& value);

using ParsedAnswer = std::variant<std::monostate, GoalSpec, std::vector<Literal>, ParamValue>;

struct LlmExchange {
  PromptSpec prompt;
  std::string prompt_text;
  std::string raw_response;
  ParsedAnswer parsed;  // monostate when parsing failed
  std::optional<std::string> reasoning;
  std::optional<std::string> error;  // "<Kind>: message" when the call or parse failed

  bool ok() const { return !std::holds_alternative<std::monostate>(parsed); }
};

}  // namespace btx
