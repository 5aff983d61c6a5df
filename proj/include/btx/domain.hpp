#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "btx/action.hpp"
#include "btx/literal.hpp"

namespace btx {

struct ObjectRef {
  std::string name;
  std::string category;
  auto operator<=>(const ObjectRef&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::size_t arity = 0;
  std::string description;  // one line, shown to the LLM
  std::string phrase;       // scene sentence, e.g. "<{0}> is on <{1}>"
  bool hidden = false;      // fault-state only; never shown to planner or LLM
};

enum class SlotKind { Object, Numeric, Categorical };

struct ParamDecl {
  std::string name;
  SlotKind kind = SlotKind::Object;
  std::vector<std::string> categories;  // Object: allowed categories (empty = any)
  std::string unit;                     // Numeric
  std::vector<std::string> vocabulary;  // Categorical
  std::string description;
};

struct SkillTemplate {
  std::string name;
  std::vector<ParamDecl> params;
  std::vector<Literal> preconditions;
  std::vector<Literal> effects;
  // Side channel into the hidden fault state (e.g. unlock clears Locked).
  std::vector<Literal> hidden_effects;
  std::size_t duration = 1;  // simulated ticks until completion
  std::string description;

  const ParamDecl* param(std::string_view slot) const;
};

enum class PromptRole { GoalInterpretation, FailureResolution, ParameterResolution };

const char* to_string(PromptRole role);

struct PromptExample {
  std::string instruction;
  std::string answer;
};

class Domain {
 public:
  std::string name;
  std::vector<PredicateDecl> predicates;
  std::vector<ObjectRef> objects;
  std::vector<SkillTemplate> skills;
  std::map<PromptRole, std::vector<PromptExample>> examples;

  const PredicateDecl* predicate(std::string_view name) const;
  const ObjectRef* object(std::string_view name) const;
  const SkillTemplate* skill(std::string_view name) const;

  // Sorted names of objects whose category is in `categories` (all objects
  // when `categories` is empty).
  std::vector<std::string> objects_in(const std::vector<std::string>& categories) const;

  // Throws UnknownSymbol (predicate/object) or FormatError (arity, params).
  void validate_literal(const Literal& literal, bool allow_params = false,
                        bool allow_hidden = false) const;
  // Checks skill existence and that every bound slot is type-correct.
  void validate_action(const GroundAction& action) const;

  // Copy with only the named objects; order follows `names`.
  Domain restricted_to(const std::vector<std::string>& names) const;

  // Visible predicates only, in declaration order.
  std::vector<const PredicateDecl*> catalog() const;
};

Domain load_domain(const std::filesystem::path& path);
Domain parse_domain(std::string_view text, const std::string& source = "<domain>");

// Closed-world state: atoms present are true, absent atoms are false. The
// hidden part holds fault state that only the simulator reads.
class WorldState {
 public:
  WorldState() = default;
  WorldState(std::set<Atom> visible, std::set<Atom> hidden = {})
      : visible_(std::move(visible)), hidden_(std::move(hidden)) {}

  const std::set<Atom>& visible() const { return visible_; }
  const std::set<Atom>& hidden() const { return hidden_; }
  std::set<Atom>& visible() { return visible_; }
  std::set<Atom>& hidden() { return hidden_; }

  bool contains(const Atom& atom) const { return visible_.count(atom) > 0; }
  void add(Atom atom) { visible_.insert(std::move(atom)); }
  void remove(const Atom& atom) { visible_.erase(atom); }

  // Same state without the hidden part.
  WorldState visible_only() const { return WorldState(visible_); }

  bool operator==(const WorldState&) const = default;

 private:
  std::set<Atom> visible_;
  std::set<Atom> hidden_;
};

// Pattern match of a ground atom against a literal's positive form whose
// arguments are objects or wildcards.
bool matches(const Atom& atom, const Literal& pattern);

// Truth of a literal without params over a set of atoms (wildcards:
// existential when positive, universal when negated).
bool holds(const std::set<Atom>& atoms, const Literal& literal);
// Validating variant; throws UnknownSymbol / FormatError.
bool holds(const Domain& domain, const WorldState& state, const Literal& literal);

// Replace Param terms with the action's object bindings. Throws
// Error(UnboundSlot) when a referenced slot is not bound to an object.
Literal substitute(const Literal& templ, const GroundAction& action);

// Delete-then-add over visible effects and the hidden side channel.
WorldState apply_effects(const Domain& domain, const WorldState& state,
                         const GroundAction& action);

// Skill whose effect template unifies with a goal literal. Slots absent
// from `binding` are free; `linked` lists free object slots that stand for
// the goal's wildcard and need a relevance guard once grounded.
struct Achiever {
  const SkillTemplate* skill = nullptr;
  std::map<std::string, std::string> binding;
  std::set<std::string> linked;
  std::size_t effect_index = 0;
};

std::vector<Achiever> achievers(const Domain& domain, const Literal& goal);

// Fully grounded achiever. `guard`, when present, must hold for the action
// to be relevant to the goal (e.g. on(red_cube, blue_cube) for grasping the
// red cube to clear the blue one); the planner never expands guards.
struct GroundAchiever {
  GroundAction action;
  std::optional<Literal> guard;
  std::vector<Literal> preconditions;  // guard removed
};

// Completes free slots by enumerating domain objects (category filtered,
// lexicographic, object slots pairwise distinct) and drops achievers whose
// preconditions are a superset of an earlier achiever with the same guard.
std::vector<GroundAchiever> ground_achievers(const Domain& domain, const Literal& goal);

}  // namespace btx
