#include "btx/domain.hpp"

#include <algorithm>

#include "btx/error.hpp"

namespace btx {

const char* to_string(PromptRole role) {
  switch (role) {
    case PromptRole::GoalInterpretation: return "goal";
    case PromptRole::FailureResolution: return "failure";
    case PromptRole::ParameterResolution: return "parameter";
  }
  return "goal";
}

const ParamDecl* SkillTemplate::param(std::string_view slot) const {
  for (const auto& p : params)
    if (p.name == slot) return &p;
  return nullptr;
}

const PredicateDecl* Domain::predicate(std::string_view name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

const ObjectRef* Domain::object(std::string_view name) const {
  for (const auto& o : objects)
    if (o.name == name) return &o;
  return nullptr;
}

const SkillTemplate* Domain::skill(std::string_view name) const {
  for (const auto& s : skills)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<std::string> Domain::objects_in(const std::vector<std::string>& categories) const {
  std::vector<std::string> out;
  for (const auto& o : objects) {
    if (categories.empty() ||
        std::find(categories.begin(), categories.end(), o.category) != categories.end())
      out.push_back(o.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Domain::validate_literal(const Literal& literal, bool allow_params, bool allow_hidden) const {
  const PredicateDecl* decl = predicate(literal.predicate);
  if (decl == nullptr || (decl->hidden && !allow_hidden))
    throw UnknownSymbol(literal.predicate, "condition");
  if (decl->arity != literal.args.size())
    throw FormatError("condition '" + literal.predicate + "' takes " + std::to_string(decl->arity) +
                          " argument(s), got " + std::to_string(literal.args.size()),
                      literal.predicate, 1);
  for (const auto& term : literal.args) {
    if (term.is_param() && !allow_params)
      throw FormatError("slot reference '?" + term.name + "' not allowed here", "?" + term.name, 1);
    if (term.is_object() && object(term.name) == nullptr) throw UnknownSymbol(term.name, "object");
  }
}

void Domain::validate_action(const GroundAction& action) const {
  const SkillTemplate* s = skill(action.skill);
  if (s == nullptr) throw UnknownSymbol(action.skill, "skill");
  for (const auto& [slot, value] : action.binding) {
    const ParamDecl* decl = s->param(slot);
    if (decl == nullptr)
      throw Error(ErrorKind::UnboundSlot, "skill '" + s->name + "' has no slot '" + slot + "'");
    switch (decl->kind) {
      case SlotKind::Object: {
        const auto* obj = std::get_if<ObjectValue>(&value);
        if (obj == nullptr)
          throw Error(ErrorKind::UnboundSlot, "slot '" + slot + "' of " + s->name + " expects an object");
        const ObjectRef* ref = object(obj->name);
        if (ref == nullptr) throw UnknownSymbol(obj->name, "object");
        if (!decl->categories.empty() &&
            std::find(decl->categories.begin(), decl->categories.end(), ref->category) ==
                decl->categories.end())
          throw Error(ErrorKind::UnboundSlot, "object '" + obj->name + "' has category '" +
                                                   ref->category + "', not allowed for slot '" +
                                                   slot + "' of " + s->name);
        break;
      }
      case SlotKind::Numeric: {
        const auto* q = std::get_if<Quantity>(&value);
        if (q == nullptr)
          throw Error(ErrorKind::UnitMismatch, "slot '" + slot + "' of " + s->name + " expects a quantity");
        if (q->unit != decl->unit)
          throw Error(ErrorKind::UnitMismatch, "slot '" + slot + "' expects unit '" + decl->unit +
                                                   "', got '" + q->unit + "'");
        break;
      }
      case SlotKind::Categorical:
        if (!std::holds_alternative<CategoryValue>(value))
          throw Error(ErrorKind::UnboundSlot, "slot '" + slot + "' of " + s->name + " expects a symbol");
        break;
    }
  }
  for (const auto& p : s->params) {
    if (p.kind == SlotKind::Object && !action.is_bound(p.name))
      throw Error(ErrorKind::UnboundSlot, "object slot '" + p.name + "' of " + s->name + " is unbound");
  }
}

Domain Domain::restricted_to(const std::vector<std::string>& names) const {
  Domain copy = *this;
  copy.objects.clear();
  for (const auto& n : names) {
    const ObjectRef* ref = object(n);
    if (ref == nullptr) throw UnknownSymbol(n, "object");
    copy.objects.push_back(*ref);
  }
  return copy;
}

std::vector<const PredicateDecl*> Domain::catalog() const {
  std::vector<const PredicateDecl*> out;
  for (const auto& p : predicates)
    if (!p.hidden) out.push_back(&p);
  return out;
}

bool matches(const Atom& atom, const Literal& pattern) {
  if (atom.predicate != pattern.predicate || atom.args.size() != pattern.args.size()) return false;
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    const Term& t = pattern.args[i];
    if (t.is_wildcard()) continue;
    if (t.name != atom.args[i]) return false;
  }
  return true;
}

namespace {

bool any_match(const std::set<Atom>& atoms, const Literal& pattern) {
  for (auto it = atoms.lower_bound(Atom{pattern.predicate, {}});
       it != atoms.end() && it->predicate == pattern.predicate; ++it) {
    if (matches(*it, pattern)) return true;
  }
  return false;
}

void remove_matching(std::set<Atom>& atoms, const Literal& pattern) {
  auto it = atoms.lower_bound(Atom{pattern.predicate, {}});
  while (it != atoms.end() && it->predicate == pattern.predicate) {
    if (matches(*it, pattern))
      it = atoms.erase(it);
    else
      ++it;
  }
}

void apply_literals(std::set<Atom>& atoms, const std::vector<Literal>& templates,
                    const GroundAction& action) {
  std::vector<Literal> ground;
  ground.reserve(templates.size());
  for (const auto& t : templates) ground.push_back(substitute(t, action));
  for (const auto& lit : ground)
    if (lit.negated) remove_matching(atoms, lit);
  for (const auto& lit : ground)
    if (!lit.negated) atoms.insert(to_atom(lit));
}

}  // namespace

bool holds(const std::set<Atom>& atoms, const Literal& literal) {
  bool present;
  if (literal.has_wildcard()) {
    present = any_match(atoms, literal);
  } else {
    Atom atom{literal.predicate, {}};
    atom.args.reserve(literal.args.size());
    for (const auto& t : literal.args) atom.args.push_back(t.name);
    present = atoms.count(atom) > 0;
  }
  return literal.negated ? !present : present;
}

bool holds(const Domain& domain, const WorldState& state, const Literal& literal) {
  domain.validate_literal(literal);
  return holds(state.visible(), literal);
}

Literal substitute(const Literal& templ, const GroundAction& action) {
  Literal out = templ;
  for (auto& term : out.args) {
    if (!term.is_param()) continue;
    auto obj = action.object(term.name);
    if (!obj)
      throw Error(ErrorKind::UnboundSlot,
                  "slot '?" + term.name + "' of " + action.skill + " is not bound to an object");
    term = Term::object(*obj);
  }
  return out;
}

WorldState apply_effects(const Domain& domain, const WorldState& state, const GroundAction& action) {
  const SkillTemplate* skill = domain.skill(action.skill);
  if (skill == nullptr) throw UnknownSymbol(action.skill, "skill");
  WorldState next = state;
  apply_literals(next.visible(), skill->effects, action);
  apply_literals(next.hidden(), skill->hidden_effects, action);
  return next;
}

std::vector<Achiever> achievers(const Domain& domain, const Literal& goal) {
  std::vector<Achiever> out;
  for (const auto& skill : domain.skills) {
    std::vector<Achiever> mine;
    for (std::size_t e = 0; e < skill.effects.size(); ++e) {
      const Literal& eff = skill.effects[e];
      if (eff.predicate != goal.predicate || eff.negated != goal.negated ||
          eff.args.size() != goal.args.size())
        continue;
      Achiever a{&skill, {}, {}, e};
      bool ok = true;
      for (std::size_t i = 0; i < goal.args.size() && ok; ++i) {
        const Term& g = goal.args[i];
        const Term& t = eff.args[i];
        if (g.is_object()) {
          if (t.is_object()) {
            ok = t.name == g.name;
          } else if (t.is_param()) {
            auto [it, inserted] = a.binding.emplace(t.name, g.name);
            ok = inserted || it->second == g.name;
          }
          // A deleting wildcard covers any constant.
        } else if (g.is_wildcard() && t.is_param() && goal.negated) {
          a.linked.insert(t.name);
        }
      }
      if (!ok) continue;
      std::erase_if(a.linked, [&](const std::string& slot) { return a.binding.count(slot) > 0; });
      // Bound objects must fit the slot categories.
      for (const auto& [slot, obj] : a.binding) {
        const ParamDecl* decl = skill.param(slot);
        const ObjectRef* ref = domain.object(obj);
        if (decl == nullptr || decl->kind != SlotKind::Object || ref == nullptr ||
            (!decl->categories.empty() &&
             std::find(decl->categories.begin(), decl->categories.end(), ref->category) ==
                 decl->categories.end())) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      bool duplicate = std::any_of(mine.begin(), mine.end(), [&](const Achiever& other) {
        return other.binding == a.binding && other.linked == a.linked;
      });
      if (!duplicate) mine.push_back(std::move(a));
    }
    std::stable_sort(mine.begin(), mine.end(),
                     [](const Achiever& x, const Achiever& y) { return x.binding < y.binding; });
    for (auto& a : mine) out.push_back(std::move(a));
  }
  return out;
}

namespace {

void enumerate_bindings(const Domain& domain, const SkillTemplate& skill, const Achiever& a,
                        const std::set<std::string>& goal_objects, std::size_t slot_index,
                        std::vector<std::string>& chosen,
                        std::vector<std::vector<std::string>>& out) {
  if (slot_index == skill.params.size()) {
    out.push_back(chosen);
    return;
  }
  const ParamDecl& p = skill.params[slot_index];
  if (p.kind != SlotKind::Object) {
    chosen.emplace_back();
    enumerate_bindings(domain, skill, a, goal_objects, slot_index + 1, chosen, out);
    chosen.pop_back();
    return;
  }
  std::vector<std::string> candidates;
  if (auto it = a.binding.find(p.name); it != a.binding.end()) {
    candidates.push_back(it->second);
  } else {
    candidates = domain.objects_in(p.categories);
  }
  for (const auto& obj : candidates) {
    if (std::find(chosen.begin(), chosen.end(), obj) != chosen.end()) continue;
    if (a.linked.count(p.name) && goal_objects.count(obj)) continue;
    chosen.push_back(obj);
    enumerate_bindings(domain, skill, a, goal_objects, slot_index + 1, chosen, out);
    chosen.pop_back();
  }
}

bool is_subset(const std::vector<Literal>& small, const std::vector<Literal>& big) {
  return std::all_of(small.begin(), small.end(), [&](const Literal& l) {
    return std::find(big.begin(), big.end(), l) != big.end();
  });
}

}  // namespace

std::vector<GroundAchiever> ground_achievers(const Domain& domain, const Literal& goal) {
  std::set<std::string> goal_objects;
  for (const auto& t : goal.args)
    if (t.is_object()) goal_objects.insert(t.name);

  struct Candidate {
    std::size_t skill_index;
    std::vector<std::string> objects;
    GroundAchiever achiever;
  };
  std::vector<Candidate> candidates;

  for (const Achiever& a : achievers(domain, goal)) {
    const SkillTemplate& skill = *a.skill;
    std::size_t skill_index = static_cast<std::size_t>(&skill - domain.skills.data());
    std::vector<std::vector<std::string>> bindings;
    std::vector<std::string> chosen;
    enumerate_bindings(domain, skill, a, goal_objects, 0, chosen, bindings);
    for (const auto& b : bindings) {
      GroundAchiever ga;
      ga.action.skill = skill.name;
      std::vector<std::string> objects;
      for (std::size_t i = 0; i < skill.params.size(); ++i) {
        if (skill.params[i].kind != SlotKind::Object) continue;
        ga.action.binding.emplace_back(skill.params[i].name, ObjectValue{b[i]});
        objects.push_back(b[i]);
      }
      if (goal.negated && goal.has_wildcard()) {
        const Literal effect = substitute(skill.effects[a.effect_index], ga.action);
        Literal guard = goal.positive();
        bool specialised = false;
        for (std::size_t i = 0; i < guard.args.size(); ++i) {
          if (guard.args[i].is_wildcard() && effect.args[i].is_object()) {
            guard.args[i] = effect.args[i];
            specialised = true;
          }
        }
        if (specialised) ga.guard = guard;
      }
      for (const auto& pre : skill.preconditions) {
        Literal g = substitute(pre, ga.action);
        if (ga.guard && g == *ga.guard) continue;
        if (std::find(ga.preconditions.begin(), ga.preconditions.end(), g) == ga.preconditions.end())
          ga.preconditions.push_back(std::move(g));
      }
      candidates.push_back({skill_index, std::move(objects), std::move(ga)});
    }
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.skill_index != y.skill_index) return x.skill_index < y.skill_index;
    return x.objects < y.objects;
  });

  std::vector<GroundAchiever> out;
  for (auto& c : candidates) {
    bool dominated = std::any_of(out.begin(), out.end(), [&](const GroundAchiever& kept) {
      return kept.action == c.achiever.action ||
             (kept.guard == c.achiever.guard &&
              is_subset(kept.preconditions, c.achiever.preconditions));
    });
    if (!dominated) out.push_back(std::move(c.achiever));
  }
  return out;
}

}  // namespace btx
