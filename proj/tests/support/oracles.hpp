#pragma once

// Reference implementations used as test oracles. They share only plain
// data (domain declarations, literals) with the library, never its logic.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "btx/domain.hpp"

namespace oracle {

// --- tick semantics -----------------------------------------------------

enum class Status { Success, Failure, Running };

struct Node {
  enum Kind { Leaf, Seq, Sel } kind = Leaf;
  std::vector<Node> kids;
  int leaf = -1;  // index into the status assignment
};

struct Eval {
  Status status;
  std::vector<int> ticked;  // leaf indices in tick order
};

inline Status eval(const Node& n, const std::vector<Status>& leaves, std::vector<int>& ticked) {
  if (n.kind == Node::Leaf) {
    ticked.push_back(n.leaf);
    return leaves[n.leaf];
  }
  // Sequence: AND with short circuit; Selector: OR with short circuit.
  const Status stop_on = n.kind == Node::Seq ? Status::Failure : Status::Success;
  for (const auto& k : n.kids) {
    Status s = eval(k, leaves, ticked);
    if (s == Status::Running) return Status::Running;
    if (s == stop_on) return s;
  }
  return n.kind == Node::Seq ? Status::Success : Status::Failure;
}

inline Eval evaluate(const Node& root, const std::vector<Status>& leaves) {
  Eval e;
  e.status = eval(root, leaves, e.ticked);
  return e;
}

// All shapes of depth <= `depth` with 1..max_children children per control node.
inline std::vector<Node> shapes(int depth, int max_children) {
  std::vector<Node> out{Node{}};
  if (depth <= 1) return out;
  std::vector<Node> sub = shapes(depth - 1, max_children);
  for (auto kind : {Node::Seq, Node::Sel}) {
    std::vector<std::vector<Node>> lists{{}};
    for (int n = 1; n <= max_children; ++n) {
      std::vector<std::vector<Node>> next;
      for (const auto& l : lists)
        for (const auto& s : sub) {
          auto copy = l;
          copy.push_back(s);
          next.push_back(std::move(copy));
        }
      lists = std::move(next);
      for (const auto& l : lists) out.push_back(Node{kind, l, -1});
    }
  }
  return out;
}

inline int number_leaves(Node& n, int next = 0) {
  if (n.kind == Node::Leaf) {
    n.leaf = next;
    return next + 1;
  }
  for (auto& k : n.kids) next = number_leaves(k, next);
  return next;
}

// --- STRIPS state space ---------------------------------------------------

using Fact = std::pair<std::string, std::vector<std::string>>;
using State = std::set<Fact>;

struct GroundOp {
  std::string name;
  std::vector<btx::Literal> pre;  // objects and wildcards only
  std::vector<btx::Literal> eff;
};

inline bool fact_matches(const Fact& f, const btx::Literal& l) {
  if (f.first != l.predicate || f.second.size() != l.args.size()) return false;
  for (std::size_t i = 0; i < f.second.size(); ++i)
    if (!l.args[i].is_wildcard() && l.args[i].name != f.second[i]) return false;
  return true;
}

inline bool satisfied(const State& s, const btx::Literal& l) {
  bool any = false;
  for (const auto& f : s)
    if (fact_matches(f, l)) {
      any = true;
      break;
    }
  return l.negated ? !any : any;
}

inline State successor(const State& s, const GroundOp& op) {
  State out = s;
  for (const auto& e : op.eff)
    if (e.negated)
      for (auto it = out.begin(); it != out.end();) it = fact_matches(*it, e) ? out.erase(it) : std::next(it);
  for (const auto& e : op.eff)
    if (!e.negated) {
      Fact f{e.predicate, {}};
      for (const auto& a : e.args) f.second.push_back(a.name);
      out.insert(f);
    }
  return out;
}

inline btx::Literal instantiate(const btx::Literal& templ, const std::map<std::string, std::string>& b) {
  btx::Literal out = templ;
  for (auto& t : out.args)
    if (t.is_param()) t = btx::Term::object(b.at(t.name));
  return out;
}

// Every grounding of every skill over object slots (distinct objects).
inline std::vector<GroundOp> ground_all(const btx::Domain& d) {
  std::vector<GroundOp> ops;
  for (const auto& sk : d.skills) {
    std::vector<const btx::ParamDecl*> slots;
    for (const auto& p : sk.params)
      if (p.kind == btx::SlotKind::Object) slots.push_back(&p);
    std::map<std::string, std::string> b;
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == slots.size()) {
        GroundOp op{sk.name, {}, {}};
        for (const auto& [k, v] : b) op.name += " " + k + "=" + v;
        for (const auto& p : sk.preconditions) op.pre.push_back(instantiate(p, b));
        for (const auto& e : sk.effects) op.eff.push_back(instantiate(e, b));
        ops.push_back(std::move(op));
        return;
      }
      for (const auto& o : d.objects) {
        const auto& cats = slots[i]->categories;
        if (!cats.empty() && std::find(cats.begin(), cats.end(), o.category) == cats.end()) continue;
        bool used = false;
        for (const auto& [k, v] : b) used = used || v == o.name;
        if (used) continue;
        b[slots[i]->name] = o.name;
        rec(i + 1);
        b.erase(slots[i]->name);
      }
    };
    rec(0);
  }
  return ops;
}

inline State to_state(const std::set<btx::Atom>& atoms) {
  State s;
  for (const auto& a : atoms) s.insert({a.predicate, a.args});
  return s;
}

// Shortest plan length, or nullopt when no reachable state satisfies every
// goal literal. Explores at most `cap` states.
inline std::optional<std::size_t> bfs_plan_length(const btx::Domain& d, const std::set<btx::Atom>& init,
                                                  const std::vector<btx::Literal>& goals,
                                                  std::size_t cap = 200000) {
  auto ops = ground_all(d);
  auto done = [&](const State& s) {
    for (const auto& g : goals)
      if (!satisfied(s, g)) return false;
    return true;
  };
  std::map<State, std::size_t> dist;
  std::deque<State> queue;
  State start = to_state(init);
  dist[start] = 0;
  queue.push_back(start);
  while (!queue.empty() && dist.size() < cap) {
    State s = queue.front();
    queue.pop_front();
    if (done(s)) return dist[s];
    for (const auto& op : ops) {
      bool ok = true;
      for (const auto& p : op.pre) ok = ok && satisfied(s, p);
      if (!ok) continue;
      State n = successor(s, op);
      if (dist.emplace(n, dist[s] + 1).second) queue.push_back(std::move(n));
    }
  }
  return std::nullopt;
}

// Every state reachable from `init`; nullopt when more than `cap` exist.
inline std::optional<std::set<State>> reachable_states(const btx::Domain& d, const std::set<btx::Atom>& init,
                                                       std::size_t cap = 200000) {
  auto ops = ground_all(d);
  std::set<State> seen{to_state(init)};
  std::deque<State> queue{to_state(init)};
  while (!queue.empty()) {
    State s = queue.front();
    queue.pop_front();
    for (const auto& op : ops) {
      bool ok = true;
      for (const auto& p : op.pre) ok = ok && satisfied(s, p);
      if (!ok) continue;
      State n = successor(s, op);
      if (seen.insert(n).second) {
        if (seen.size() > cap) return std::nullopt;
        queue.push_back(std::move(n));
      }
    }
  }
  return seen;
}

}  // namespace oracle
