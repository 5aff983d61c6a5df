#include "btx/sim.hpp"

#include <algorithm>

#include "btx/error.hpp"
#include "btx/llm.hpp"
#include "codec.hpp"

namespace btx {

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Precondition: return "precondition";
    case ScenarioKind::Parameter: return "parameter";
    case ScenarioKind::Golden: return "golden";
  }
  return "precondition";
}

const char* to_string(FailurePhase phase) {
  return phase == FailurePhase::Planning ? "planning" : "execution";
}

namespace {

bool literal_holds(const Domain& domain, const WorldState& state, const Literal& lit) {
  const PredicateDecl* decl = domain.predicate(lit.predicate);
  bool hidden = decl != nullptr && decl->hidden;
  return holds(hidden ? state.hidden() : state.visible(), lit);
}

bool all_hold(const Domain& domain, const WorldState& state, const std::vector<Literal>& lits) {
  return std::all_of(lits.begin(), lits.end(),
                     [&](const Literal& l) { return literal_holds(domain, state, l); });
}

}  // namespace

bool FaultRule::matches(const GroundAction& action) const {
  if (action.skill != skill) return false;
  auto objects = action.objects();
  if (objects.size() != args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!args[i].is_wildcard() && args[i].name != objects[i]) return false;
  return true;
}

bool FaultRule::active(const Domain& domain, const WorldState& state) const {
  if (!all_hold(domain, state, guard)) return false;
  return clears_when.empty() || !all_hold(domain, state, clears_when);
}

OracleKnowledge Scenario::knowledge() const {
  OracleKnowledge k;
  k.goal = oracle.goal;
  for (const auto& f : faults) {
    auto it = oracle.preconditions.find(f.id);
    if (it != oracle.preconditions.end()) k.faults.push_back({f.skill, f.args, f.message, it->second});
  }
  for (const auto& p : oracle.parameters) k.parameters.push_back({p.skill, p.object, p.slot, p.value});
  return k;
}

ActionModel Scenario::planning_model() const {
  std::vector<FaultRule> rules;
  for (const auto& f : faults)
    if (f.planning && f.mode == FaultMode::Fail) rules.push_back(f);
  if (rules.empty()) return {};
  return [rules, domain = domain](const GroundAction& action,
                                  const WorldState& state) -> std::optional<std::string> {
    for (const auto& r : rules)
      if (r.matches(action) && r.active(domain, state)) return r.message;
    return std::nullopt;
  };
}

std::string missing_parameter_message(const std::string& slot, const GroundAction& action) {
  GroundAction objects_only{action.skill, {}};
  for (const auto& [name, value] : action.binding)
    if (std::holds_alternative<ObjectValue>(value)) objects_only.binding.emplace_back(name, value);
  return "Parameter \"" + slot + "\" of " + to_string(objects_only) + " is not specified";
}

namespace {

using detail::Json;
using detail::JsonDoc;

std::vector<std::string> strings_of(const JsonDoc& doc, const Json& owner, const char* key) {
  std::vector<std::string> out;
  const Json* list = doc.optional_member(owner, key);
  if (list == nullptr) return out;
  if (!list->is_array()) doc.fail(owner, std::string("\"") + key + "\" must be an array");
  for (const auto& v : *list) {
    if (!v.is_string()) doc.fail(*list, std::string("entries of \"") + key + "\" must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::vector<Literal> literals_of(const JsonDoc& doc, const Json& owner, const char* key,
                                 const Domain& domain, bool allow_hidden) {
  std::vector<Literal> out;
  for (const auto& text : strings_of(doc, owner, key)) {
    Literal lit = detail::literal_from(doc, owner, text);
    try {
      domain.validate_literal(lit, false, allow_hidden);
    } catch (const Error& e) {
      doc.fail(owner, std::string(key) + ": " + e.what());
    }
    out.push_back(std::move(lit));
  }
  return out;
}

std::set<Atom> atoms_of(const JsonDoc& doc, const Json& owner, const char* key, const Domain& domain,
                        bool hidden) {
  std::set<Atom> out;
  const Json* list = doc.optional_member(owner, key);
  if (list == nullptr) return out;
  out = detail::atoms_from(doc, owner, *list);
  for (const auto& a : out) {
    const PredicateDecl* decl = domain.predicate(a.predicate);
    if (decl == nullptr) doc.fail(*list, "unknown predicate '" + a.predicate + "'");
    if (decl->hidden != hidden)
      doc.fail(*list, "'" + to_string(a) + "' belongs in \"" + (decl->hidden ? "hidden" : "initial") + "\"");
    try {
      domain.validate_literal(to_literal(a), false, true);
    } catch (const Error& e) {
      doc.fail(*list, e.what());
    }
  }
  return out;
}

void check_slot_value(const JsonDoc& doc, const Json& owner, const Domain& domain, const SlotSetting& s) {
  const SkillTemplate* skill = domain.skill(s.skill);
  if (skill == nullptr) doc.fail(owner, "unknown skill '" + s.skill + "'");
  const ParamDecl* decl = skill->param(s.slot);
  if (decl == nullptr || decl->kind == SlotKind::Object)
    doc.fail(owner, "skill '" + s.skill + "' has no parameter slot '" + s.slot + "'");
  if (!s.object.empty() && domain.object(s.object) == nullptr)
    doc.fail(owner, "unknown object '" + s.object + "'");
  try {
    parse_param_response("ANSWER: " + s.value, *decl);
  } catch (const Error& e) {
    doc.fail(owner, "value '" + s.value + "' for " + s.skill + "." + s.slot + ": " + e.what());
  }
}

std::vector<SlotSetting> settings_of(const JsonDoc& doc, const Json& owner, const char* key,
                                     const Domain& domain) {
  std::vector<SlotSetting> out;
  const Json* list = doc.optional_member(owner, key);
  if (list == nullptr) return out;
  if (!list->is_array()) doc.fail(owner, std::string("\"") + key + "\" must be an array");
  for (const auto& item : *list) {
    doc.expect_object(item, "a parameter");
    SlotSetting s{doc.string_member(item, "skill"), doc.string_or(item, "object", ""),
                  doc.string_member(item, "slot"), doc.string_member(item, "value")};
    check_slot_value(doc, item, domain, s);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Literal> conjunction_of(const JsonDoc& doc, const Json& owner, const std::string& text,
                                    const Domain& domain) {
  try {
    return parse_precondition_response("ANSWER: " + text, domain).preconditions;
  } catch (const Error& e) {
    doc.fail(owner, "answer '" + text + "': " + e.what());
  }
}

Scenario parse_scenario_impl(std::string_view text, const std::filesystem::path& source,
                             std::map<std::filesystem::path, Domain>& cache) {
  JsonDoc doc(text, source.string(), ErrorKind::Schema);
  doc.expect_format("btx-scenario", 1);
  const Json& root = doc.root();

  Scenario sc;
  sc.source = source;
  sc.id = doc.string_member(root, "id");
  if (!is_identifier(sc.id)) doc.fail(root, "scenario id '" + sc.id + "' is not an identifier");
  sc.title = doc.string_or(root, "title", sc.id);
  std::string kind = doc.string_or(root, "kind", "precondition");
  if (kind == "precondition") sc.kind = ScenarioKind::Precondition;
  else if (kind == "parameter") sc.kind = ScenarioKind::Parameter;
  else if (kind == "golden") sc.kind = ScenarioKind::Golden;
  else doc.fail(root, "kind must be precondition, parameter or golden");

  std::string domain_ref = doc.string_member(root, "domain");
  sc.domain_path = (source.parent_path() / domain_ref).lexically_normal();
  auto cached = cache.find(sc.domain_path);
  if (cached == cache.end()) {
    std::string domain_text;
    try {
      domain_text = detail::read_file(sc.domain_path);
    } catch (const Error&) {
      doc.fail(root, "cannot read domain file '" + sc.domain_path.string() + "'");
    }
    cached = cache.emplace(sc.domain_path, parse_domain(domain_text, sc.domain_path.string())).first;
  }
  sc.domain = cached->second;
  if (doc.optional_member(root, "objects") != nullptr) {
    try {
      sc.domain = sc.domain.restricted_to(strings_of(doc, root, "objects"));
    } catch (const Error& e) {
      doc.fail(root, std::string("objects: ") + e.what());
    }
  }

  sc.instruction = doc.string_member(root, "instruction");
  sc.initial = WorldState(atoms_of(doc, root, "initial", sc.domain, false),
                          atoms_of(doc, root, "hidden", sc.domain, true));

  if (const Json* faults = doc.optional_member(root, "faults")) {
    if (!faults->is_array()) doc.fail(root, "\"faults\" must be an array");
    for (const auto& f : *faults) {
      doc.expect_object(f, "a fault");
      FaultRule rule;
      rule.id = doc.string_member(f, "id");
      rule.skill = doc.string_member(f, "skill");
      const SkillTemplate* skill = sc.domain.skill(rule.skill);
      if (skill == nullptr) doc.fail(f, "unknown skill '" + rule.skill + "'");
      for (const auto& a : strings_of(doc, f, "args")) {
        if (a == kWildcard) {
          rule.args.push_back(Term::wildcard());
        } else {
          if (sc.domain.object(a) == nullptr) doc.fail(f, "unknown object '" + a + "'");
          rule.args.push_back(Term::object(a));
        }
      }
      std::size_t object_slots = std::count_if(skill->params.begin(), skill->params.end(),
                                               [](const ParamDecl& p) { return p.kind == SlotKind::Object; });
      if (rule.args.size() != object_slots)
        doc.fail(f, "skill '" + rule.skill + "' takes " + std::to_string(object_slots) + " object argument(s)");
      rule.guard = literals_of(doc, f, "guard", sc.domain, true);
      rule.clears_when = literals_of(doc, f, "clears_when", sc.domain, true);
      std::string mode = doc.string_or(f, "mode", "fail");
      if (mode == "fail") rule.mode = FaultMode::Fail;
      else if (mode == "suppress_effects") rule.mode = FaultMode::SuppressEffects;
      else doc.fail(f, "mode must be fail or suppress_effects");
      rule.message = doc.string_or(f, "message", "");
      if (rule.message.empty() && rule.mode == FaultMode::Fail) doc.fail(f, "fault needs a non-empty message");
      if (const Json* planning = doc.optional_member(f, "planning")) {
        if (!planning->is_boolean()) doc.fail(f, "\"planning\" must be a boolean");
        rule.planning = planning->get<bool>();
      }
      if (std::any_of(sc.faults.begin(), sc.faults.end(), [&](const FaultRule& r) { return r.id == rule.id; }))
        doc.fail(f, "duplicate fault id '" + rule.id + "'");
      if (rule.mode == FaultMode::SuppressEffects && rule.message.empty()) {
        for (const auto& eff : skill->effects) {
          if (eff.negated) continue;
          GroundAction probe{skill->name, {}};
          std::size_t i = 0;
          for (const auto& p : skill->params)
            if (p.kind == SlotKind::Object) probe.binding.emplace_back(p.name, ObjectValue{rule.args[i++].name});
          std::string name = eff.predicate;
          for (const auto& t : substitute(eff, probe).args) name += "_" + t.name;
          rule.message = "Postcondition " + name + " not met after " + skill->name + " action completion";
          break;
        }
      }
      sc.faults.push_back(std::move(rule));
    }
  }

  sc.presets = settings_of(doc, root, "parameters", sc.domain);

  const Json& oracle = doc.object_member(root, "oracle");
  sc.oracle.goal = doc.string_member(oracle, "goal");
  try {
    parse_goal_response("ANSWER: " + sc.oracle.goal, sc.domain);
  } catch (const Error& e) {
    doc.fail(oracle, "goal '" + sc.oracle.goal + "': " + e.what());
  }
  if (const Json* pre = doc.optional_member(oracle, "preconditions")) {
    if (!pre->is_object()) doc.fail(oracle, "\"preconditions\" must be an object");
    for (const auto& [id, answer] : pre->items()) {
      if (!answer.is_string()) doc.fail(*pre, "answer for '" + id + "' must be a string");
      conjunction_of(doc, *pre, answer.get<std::string>(), sc.domain);
      sc.oracle.preconditions[id] = answer.get<std::string>();
    }
  }
  for (const auto& rule : sc.faults)
    if (!sc.oracle.preconditions.count(rule.id))
      doc.fail(oracle, "missing oracle answer for fault '" + rule.id + "'");
  sc.oracle.parameters = settings_of(doc, oracle, "parameters", sc.domain);

  if (const Json* expected = doc.optional_member(root, "expected")) {
    sc.expected_outcome = doc.string_or(*expected, "outcome", "success");
    if (const Json* rounds = doc.optional_member(*expected, "rounds")) {
      if (!rounds->is_number_unsigned()) doc.fail(*expected, "\"rounds\" must be a non-negative integer");
      sc.expected_rounds = rounds->get<std::size_t>();
    }
  }
  if (const Json* golden = doc.optional_member(root, "golden")) {
    if (!golden->is_object()) doc.fail(root, "\"golden\" must be an object");
    for (const auto& [name, path] : golden->items()) {
      if (!path.is_string()) doc.fail(*golden, "golden paths must be strings");
      sc.golden[name] = (source.parent_path() / path.get<std::string>()).lexically_normal();
    }
  }
  return sc;
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& source) {
  std::map<std::filesystem::path, Domain> cache;
  return parse_scenario_impl(text, source, cache);
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(detail::read_file(path), path);
}

std::vector<Scenario> load_scenarios(const std::filesystem::path& path) {
  std::map<std::filesystem::path, Domain> cache;
  std::vector<Scenario> out;
  if (!std::filesystem::is_directory(path)) {
    out.push_back(parse_scenario_impl(detail::read_file(path), path, cache));
    return out;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(path))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(parse_scenario_impl(detail::read_file(f), f, cache));
  std::sort(out.begin(), out.end(), [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].id == out[i - 1].id)
      throw SchemaError(out[i].source.string(), 0, 0, "unique scenario id ('" + out[i].id + "' repeats)");
  return out;
}

namespace {

void check_tree(const BehaviorTree& tree, const Domain& domain) {
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    try {
      if (n.kind == NodeKind::Condition) domain.validate_literal(*n.condition);
      if (n.kind == NodeKind::Action) domain.validate_action(*n.action);
    } catch (const Error& e) {
      throw Error(ErrorKind::Evaluation, "node " + std::to_string(n.id) + ": " + e.what());
    }
    for (const auto& c : n.children) walk(c);
  };
  walk(tree.root());
}

}  // namespace

ExecutionTrace execute(const BehaviorTree& tree, const Scenario& scenario, const WorldState& start,
                       const ExecConfig& config) {
  const Domain& domain = scenario.domain;
  check_tree(tree, domain);

  ExecutionTrace trace;
  WorldState world = start;
  NodeId running = 0;        // action currently in progress
  std::size_t remaining = 0;  // ticks until it completes

  for (std::size_t t = 0; t < config.max_ticks; ++t) {
    bool executed = false;
    auto act = [&](NodeId id, const GroundAction& action) {
      executed = true;
      const SkillTemplate* skill = domain.skill(action.skill);
      auto fail = [&](std::string message, std::optional<std::string> slot, std::string fault) {
        trace.failures.push_back({FailurePhase::Execution, id, action, std::move(message),
                                  world.visible_only(), std::move(slot), std::move(fault)});
        running = 0;
        return NodeStatus::Failure;
      };

      if (running != id) {
        for (const auto& p : skill->params)
          if (p.kind != SlotKind::Object && !action.is_bound(p.name))
            return fail(missing_parameter_message(p.name, action), p.name, "");
        for (const auto& rule : scenario.faults)
          if (rule.mode == FaultMode::Fail && rule.matches(action) && rule.active(domain, world))
            return fail(rule.message, std::nullopt, rule.id);
        running = id;
        remaining = skill->duration;
      }
      if (--remaining > 0) return NodeStatus::Running;

      running = 0;
      const FaultRule* suppress = nullptr;
      for (const auto& rule : scenario.faults)
        if (rule.mode == FaultMode::SuppressEffects && rule.matches(action) && rule.active(domain, world))
          suppress = &rule;
      WorldState before = world;
      if (suppress == nullptr) world = apply_effects(domain, world, action);
      trace.actions.push_back({t, id, action, before.visible_only(), world.visible_only(), suppress != nullptr});

      // Wildcard deletions may be overridden by the action's own additions.
      for (const auto& eff : skill->effects) {
        if (eff.negated && eff.has_wildcard()) continue;
        Literal post = substitute(eff, action);
        if (holds(world.visible(), post)) continue;
        if (suppress != nullptr) return fail(suppress->message, std::nullopt, suppress->id);
        std::string name = post.predicate;
        for (const auto& a : post.args) name += "_" + a.name;
        return fail("Postcondition " + name + " not met after " + action.skill + " action completion",
                    std::nullopt, "");
      }
      return NodeStatus::Running;
    };

    TickTrace tr = tick(tree, observe(world, act));
    if (!executed) running = 0;
    trace.ticks.push_back(tr);
    if (tr.root_status != NodeStatus::Running || !trace.failures.empty()) {
      trace.final_status = trace.failures.empty() ? tr.root_status : NodeStatus::Failure;
      trace.final_state = world;
      return trace;
    }
  }
  trace.final_status = NodeStatus::Running;
  trace.final_state = world;
  throw TickBudgetExceeded("execution exceeded " + std::to_string(config.max_ticks) + " ticks",
                           std::move(trace));
}

std::string trace_jsonl(const ExecutionTrace& trace) {
  std::string out;
  std::size_t next_action = 0, next_failure = 0;
  for (std::size_t t = 0; t < trace.ticks.size(); ++t) {
    const TickTrace& tr = trace.ticks[t];
    Json rec = Json::object();
    rec["tick"] = t;
    rec["root"] = to_string(tr.root_status);
    Json nodes = Json::array();
    for (const auto& e : tr.entries) nodes.push_back(Json::array({e.id, to_string(e.status)}));
    rec["visited"] = std::move(nodes);
    while (next_action < trace.actions.size() && trace.actions[next_action].tick == t) {
      const auto& a = trace.actions[next_action++];
      Json j = Json::object();
      j["node"] = a.node;
      j["action"] = to_string(a.action);
      j["suppressed"] = a.suppressed;
      j["state_after"] = detail::to_json(a.after.visible());
      rec["completed"] = std::move(j);
    }
    if (t + 1 == trace.ticks.size()) {
      Json failures = Json::array();
      for (; next_failure < trace.failures.size(); ++next_failure) {
        const auto& f = trace.failures[next_failure];
        Json j = Json::object();
        j["node"] = f.action_id;
        j["action"] = to_string(f.action);
        j["message"] = f.error_message;
        failures.push_back(std::move(j));
      }
      if (!failures.empty()) rec["failures"] = std::move(failures);
      rec["final"] = to_string(trace.final_status);
    }
    out += rec.dump() + "\n";
  }
  return out;
}

}  // namespace btx
