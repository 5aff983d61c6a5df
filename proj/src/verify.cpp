#include "btx/verify.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace btx {

namespace {

void walk(const TreeNode& node, const std::function<void(const TreeNode&)>& fn) {
  fn(node);
  for (const auto& c : node.children) walk(c, fn);
}

void check_actions(const BehaviorTree& tree, const Domain& domain, VerificationReport& report) {
  walk(tree.root(), [&](const TreeNode& n) {
    if (n.kind != NodeKind::Action) return;
    try {
      domain.validate_action(*n.action);
    } catch (const std::exception& e) {
      report.violations.push_back({kCheckActions, n.id, e.what()});
    }
  });
}

void check_goals(const BehaviorTree& tree, const GoalSpec& goals, VerificationReport& report) {
  std::set<Literal> present;
  walk(tree.root(), [&](const TreeNode& n) {
    if (n.kind == NodeKind::Condition) present.insert(*n.condition);
  });
  for (const auto& g : goals.conjuncts())
    if (!present.count(g))
      report.violations.push_back({kCheckGoals, tree.root().id, "goal " + to_string(g) + " has no condition leaf"});
}

void check_preconditions(const BehaviorTree& tree, const Domain& domain, VerificationReport& report) {
  walk(tree.root(), [&](const TreeNode& n) {
    if (n.kind != NodeKind::Action) return;
    const SkillTemplate* skill = domain.skill(n.action->skill);
    if (skill == nullptr) return;  // reported by the action check
    std::vector<Literal> guarded = action_preconditions(tree, n.id);
    for (const auto& pre : skill->preconditions) {
      Literal lit;
      try {
        lit = substitute(pre, *n.action);
      } catch (const std::exception& e) {
        report.violations.push_back({kCheckPreconditions, n.id, e.what()});
        continue;
      }
      if (std::find(guarded.begin(), guarded.end(), lit) == guarded.end())
        report.violations.push_back({kCheckPreconditions, n.id,
                                     to_string(*n.action) + " is not guarded by " + to_string(lit)});
    }
  });
}

void check_fallbacks(const BehaviorTree& tree, VerificationReport& report) {
  walk(tree.root(), [&](const TreeNode& n) {
    if (n.kind != NodeKind::Fallback) return;
    for (std::size_t i = 0; i < n.children.size(); ++i)
      for (std::size_t j = i + 1; j < n.children.size(); ++j)
        if (same_structure(n.children[i], n.children[j]))
          report.violations.push_back({kCheckFallbacks, n.id,
                                       "children " + std::to_string(i) + " and " + std::to_string(j) +
                                           " are identical"});
  });
}

// Ground atoms a condition literal can read.
void relevant_atoms(const Literal& lit, const Domain& domain, std::set<Atom>& out) {
  std::vector<std::vector<std::string>> choices;
  for (const auto& t : lit.args) {
    if (t.is_wildcard()) {
      std::vector<std::string> all;
      for (const auto& o : domain.objects) all.push_back(o.name);
      choices.push_back(std::move(all));
    } else {
      choices.push_back({t.name});
    }
  }
  std::vector<std::string> args(choices.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == choices.size()) {
      out.insert(Atom{lit.predicate, args});
      return;
    }
    for (const auto& c : choices[i]) {
      args[i] = c;
      rec(i + 1);
    }
  };
  rec(0);
}

std::set<Atom> project(const std::set<Atom>& atoms, const std::set<Atom>& relevant) {
  std::set<Atom> out;
  for (const auto& a : atoms)
    if (relevant.count(a)) out.insert(a);
  return out;
}

struct Explorer {
  const BehaviorTree& tree;
  const Domain& domain;
  const std::set<Atom>& relevant;
  std::size_t max_ticks;
  std::map<std::set<Atom>, bool> settled;  // state -> terminates
  std::size_t explored = 0;

  // Returns the action that closes a state cycle, or nullopt.
  std::optional<std::pair<NodeId, std::set<Atom>>> run(const std::set<Atom>& start) {
    std::vector<std::set<Atom>> path;
    std::set<std::set<Atom>> on_path;
    std::set<Atom> state = start;
    std::optional<std::pair<NodeId, std::set<Atom>>> result;
    bool terminates = true;
    for (std::size_t t = 0;; ++t) {
      if (auto it = settled.find(state); it != settled.end()) {
        terminates = it->second;
        break;
      }
      if (t >= max_ticks || on_path.count(state)) {
        terminates = false;
        break;
      }
      path.push_back(state);
      on_path.insert(state);
      ++explored;

      std::optional<std::pair<NodeId, GroundAction>> ran;
      WorldState ws(state);
      TickTrace trace = tick(tree, observe(ws, [&](NodeId id, const GroundAction& a) {
                               ran.emplace(id, a);
                               return NodeStatus::Running;
                             }));
      if (trace.root_status != NodeStatus::Running || !ran) break;
      std::set<Atom> next = project(apply_effects(domain, ws, ran->second).visible(), relevant);
      if (on_path.count(next) || t + 1 >= max_ticks) result = std::make_pair(ran->first, next);
      state = std::move(next);
    }
    for (auto& s : path) settled.emplace(std::move(s), terminates);
    if (terminates) return std::nullopt;
    if (!result) result = std::make_pair(NodeId{0}, state);
    return result;
  }
};

std::string describe_state(const std::set<Atom>& atoms) {
  if (atoms.empty()) return "{}";
  std::string s = "{";
  for (const auto& a : atoms) s += (s.size() > 1 ? ", " : "") + to_string(a);
  return s + "}";
}

void check_livelock(const BehaviorTree& tree, const Domain& domain, const VerifyConfig& config,
                    VerificationReport& report) {
  std::set<Atom> relevant;
  walk(tree.root(), [&](const TreeNode& n) {
    if (n.kind == NodeKind::Condition) relevant_atoms(*n.condition, domain, relevant);
  });
  Explorer explorer{tree, domain, relevant, config.max_sim_ticks, {}, 0};

  std::vector<std::set<Atom>> starts;
  report.exhaustive = domain.objects.size() <= config.max_objects_exhaustive &&
                      relevant.size() <= config.max_atoms_exhaustive;
  if (report.exhaustive) {
    std::vector<Atom> atoms(relevant.begin(), relevant.end());
    for (std::size_t mask = 0; mask < (std::size_t{1} << atoms.size()); ++mask) {
      std::set<Atom> s;
      for (std::size_t i = 0; i < atoms.size(); ++i)
        if (mask & (std::size_t{1} << i)) s.insert(atoms[i]);
      starts.push_back(std::move(s));
    }
  } else if (config.seeds.empty()) {
    starts.emplace_back();
  } else {
    for (const auto& seed : config.seeds) starts.push_back(project(seed.visible(), relevant));
  }

  for (const auto& start : starts) {
    if (auto cycle = explorer.run(start)) {
      report.violations.push_back({kCheckLivelock, cycle->first,
                                   "ticking from " + describe_state(start) + " revisits " +
                                       describe_state(cycle->second) + " without terminating"});
      break;
    }
  }
  report.states_explored = explorer.explored;
}

}  // namespace

VerificationReport verify_tree(const BehaviorTree& tree, const Domain& domain,
                               const std::optional<GoalSpec>& goals, const VerifyConfig& config) {
  VerificationReport report;
  report.checks.push_back(kCheckActions);
  check_actions(tree, domain, report);
  if (goals) {
    report.checks.push_back(kCheckGoals);
    check_goals(tree, *goals, report);
  }
  report.checks.push_back(kCheckPreconditions);
  check_preconditions(tree, domain, report);
  report.checks.push_back(kCheckFallbacks);
  check_fallbacks(tree, report);
  // Ticking needs well-formed actions.
  bool actions_ok = std::none_of(report.violations.begin(), report.violations.end(),
                                 [](const Violation& v) { return v.check == std::string(kCheckActions); });
  if (actions_ok) {
    report.checks.push_back(kCheckLivelock);
    check_livelock(tree, domain, config, report);
  }
  return report;
}

std::string report_text(const VerificationReport& report) {
  std::ostringstream os;
  os << (report.passed() ? "PASS" : "FAIL") << " (" << report.checks.size() << " checks, "
     << report.states_explored << " states" << (report.exhaustive ? ", exhaustive" : "") << ")\n";
  for (const auto& c : report.checks) {
    std::size_t n = std::count_if(report.violations.begin(), report.violations.end(),
                                  [&](const Violation& v) { return v.check == c; });
    os << "  " << c << ": " << (n == 0 ? "ok" : std::to_string(n) + " violation(s)") << "\n";
  }
  for (const auto& v : report.violations)
    os << "  [" << v.check << "] node " << v.node << ": " << v.message << "\n";
  return os.str();
}

std::string report_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed();
  j["checks"] = report.checks;
  j["states_explored"] = report.states_explored;
  j["exhaustive"] = report.exhaustive;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : report.violations)
    j["violations"].push_back({{"check", v.check}, {"node", v.node}, {"message", v.message}});
  return j.dump(2) + "\n";
}

}  // namespace btx
