#include "btx/bt.hpp"

#include <algorithm>

#include "btx/error.hpp"

namespace btx {

const char* to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::Success: return "Success";
    case NodeStatus::Failure: return "Failure";
    case NodeStatus::Running: return "Running";
  }
  return "?";
}

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Sequence: return "sequence";
    case NodeKind::Fallback: return "fallback";
    case NodeKind::Condition: return "condition";
    case NodeKind::Action: return "action";
  }
  return "?";
}

TreeNode TreeNode::sequence(std::vector<TreeNode> children) {
  TreeNode n;
  n.kind = NodeKind::Sequence;
  n.children = std::move(children);
  return n;
}

TreeNode TreeNode::fallback(std::vector<TreeNode> children) {
  TreeNode n;
  n.kind = NodeKind::Fallback;
  n.children = std::move(children);
  return n;
}

TreeNode TreeNode::make_condition(Literal literal, bool guard) {
  TreeNode n;
  n.kind = NodeKind::Condition;
  n.condition = std::move(literal);
  n.guard = guard;
  return n;
}

TreeNode TreeNode::make_action(GroundAction action) {
  TreeNode n;
  n.kind = NodeKind::Action;
  n.action = std::move(action);
  return n;
}

bool same_structure(const TreeNode& a, const TreeNode& b) {
  if (a.kind != b.kind || a.guard != b.guard || a.condition != b.condition ||
      a.action != b.action || a.children.size() != b.children.size())
    return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_structure(a.children[i], b.children[i])) return false;
  return true;
}

namespace {

NodeId max_id(const TreeNode& node) {
  NodeId m = node.id;
  for (const auto& c : node.children) m = std::max(m, max_id(c));
  return m;
}

}  // namespace

BehaviorTree::BehaviorTree(TreeNode root) : root_(std::move(root)) {
  next_id_ = max_id(root_) + 1;
  assign_ids(root_);
  reindex();
}

void BehaviorTree::assign_ids(TreeNode& node) {
  if (node.id == 0) node.id = next_id_++;
  for (auto& c : node.children) assign_ids(c);
}

void BehaviorTree::reindex() {
  index_.clear();
  NodePath path;
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    if (!index_.emplace(n.id, path).second)
      throw Error(ErrorKind::InvalidTree, "duplicate node id " + std::to_string(n.id));
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      path.push_back(i);
      walk(n.children[i]);
      path.pop_back();
    }
  };
  walk(root_);
}

const TreeNode* BehaviorTree::find(NodeId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &at(it->second);
}

std::optional<NodePath> BehaviorTree::path_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const TreeNode& BehaviorTree::at(const NodePath& path) const {
  const TreeNode* n = &root_;
  for (std::size_t i : path) n = &n->children.at(i);
  return *n;
}

TreeNode& BehaviorTree::mutable_at(const NodePath& path) {
  TreeNode* n = &root_;
  for (std::size_t i : path) n = &n->children.at(i);
  return *n;
}

const TreeNode* BehaviorTree::parent_of(NodeId id) const {
  auto path = path_of(id);
  if (!path || path->empty()) return nullptr;
  path->pop_back();
  return &at(*path);
}

std::vector<NodeId> BehaviorTree::preorder() const {
  std::vector<NodeId> out;
  out.reserve(index_.size());
  std::function<void(const TreeNode&)> walk = [&](const TreeNode& n) {
    out.push_back(n.id);
    for (const auto& c : n.children) walk(c);
  };
  walk(root_);
  return out;
}

void BehaviorTree::validate() const {
  std::size_t count = 0;
  std::function<void(const TreeNode&, const NodePath&)> walk = [&](const TreeNode& n,
                                                                   const NodePath& path) {
    ++count;
    if (n.id == 0 || n.id >= next_id_)
      throw Error(ErrorKind::InvalidTree, "node id " + std::to_string(n.id) + " out of range");
    auto it = index_.find(n.id);
    if (it == index_.end() || it->second != path)
      throw Error(ErrorKind::InvalidTree, "id index stale for node " + std::to_string(n.id));
    if (n.is_control()) {
      if (n.children.empty())
        throw Error(ErrorKind::InvalidTree,
                    std::string(to_string(n.kind)) + " " + std::to_string(n.id) + " has no children");
      if (n.condition || n.action)
        throw Error(ErrorKind::InvalidTree, "control node " + std::to_string(n.id) + " has a payload");
    } else {
      if (!n.children.empty())
        throw Error(ErrorKind::InvalidTree, "leaf " + std::to_string(n.id) + " has children");
      if (n.kind == NodeKind::Condition && (!n.condition || n.action))
        throw Error(ErrorKind::InvalidTree, "condition " + std::to_string(n.id) + " needs a literal payload");
      if (n.kind == NodeKind::Action && (!n.action || n.condition))
        throw Error(ErrorKind::InvalidTree, "action " + std::to_string(n.id) + " needs an action payload");
    }
    if (n.guard && n.kind != NodeKind::Condition)
      throw Error(ErrorKind::InvalidTree, "only conditions can be guards");
    NodePath child = path;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      child.push_back(i);
      walk(n.children[i], child);
      child.pop_back();
    }
  };
  walk(root_, {});
  if (count != index_.size()) throw Error(ErrorKind::InvalidTree, "id index size mismatch");
}

void BehaviorTree::replace(const NodePath& path, TreeNode node) {
  assign_ids(node);
  mutable_at(path) = std::move(node);
  reindex();
}

void BehaviorTree::insert_child(const NodePath& path, std::size_t index, TreeNode node) {
  TreeNode& parent = mutable_at(path);
  if (!parent.is_control()) throw Error(ErrorKind::InvalidTarget, "cannot add children to a leaf");
  assign_ids(node);
  index = std::min(index, parent.children.size());
  parent.children.insert(parent.children.begin() + static_cast<std::ptrdiff_t>(index), std::move(node));
  reindex();
}

void BehaviorTree::move_child_left(const NodePath& path, std::size_t index) {
  TreeNode& parent = mutable_at(path);
  if (index == 0 || index >= parent.children.size())
    throw Error(ErrorKind::InvalidTarget, "cannot move child " + std::to_string(index) + " left");
  std::swap(parent.children[index - 1], parent.children[index]);
  reindex();
}

void BehaviorTree::bind_slot(NodeId id, const std::string& slot, SlotValue value) {
  auto path = path_of(id);
  if (!path) throw Error(ErrorKind::UnknownNode, "no node with id " + std::to_string(id));
  TreeNode& n = mutable_at(*path);
  if (n.kind != NodeKind::Action) throw Error(ErrorKind::InvalidTarget, "node " + std::to_string(id) + " is not an action");
  n.action->bind(slot, std::move(value));
}

bool BehaviorTree::operator==(const BehaviorTree& other) const {
  std::function<bool(const TreeNode&, const TreeNode&)> eq = [&](const TreeNode& a, const TreeNode& b) {
    if (a.id != b.id || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
      if (!eq(a.children[i], b.children[i])) return false;
    return true;
  };
  return same_structure(root_, other.root_) && eq(root_, other.root_);
}

bool TickTrace::visited(NodeId id) const {
  return std::any_of(entries.begin(), entries.end(), [id](const TraceEntry& e) { return e.id == id; });
}

std::optional<NodeStatus> TickTrace::status_of(NodeId id) const {
  for (const auto& e : entries)
    if (e.id == id) return e.status;
  return std::nullopt;
}

namespace {

NodeStatus tick_node(const TreeNode& node, const TickContext& ctx, std::uint32_t depth,
                     TickTrace& trace) {
  std::size_t slot = trace.entries.size();
  trace.entries.push_back({node.id, node.kind, NodeStatus::Failure, depth});
  NodeStatus status = NodeStatus::Failure;
  switch (node.kind) {
    case NodeKind::Condition:
      status = ctx.condition(*node.condition) ? NodeStatus::Success : NodeStatus::Failure;
      break;
    case NodeKind::Action:
      status = ctx.action(node.id, *node.action);
      break;
    case NodeKind::Sequence:
      status = NodeStatus::Success;
      for (const auto& child : node.children) {
        status = tick_node(child, ctx, depth + 1, trace);
        if (status != NodeStatus::Success) break;
      }
      break;
    case NodeKind::Fallback:
      status = NodeStatus::Failure;
      for (const auto& child : node.children) {
        status = tick_node(child, ctx, depth + 1, trace);
        if (status != NodeStatus::Failure) break;
      }
      break;
  }
  trace.entries[slot].status = status;
  return status;
}

}  // namespace

TickTrace tick(const BehaviorTree& tree, const TickContext& ctx) {
  TickTrace trace;
  trace.root_status = tick_node(tree.root(), ctx, 0, trace);
  return trace;
}

std::optional<NodeId> failing_action(const TickTrace& trace) {
  std::optional<NodeId> best;
  std::uint32_t best_depth = 0;
  for (const auto& e : trace.entries) {
    if (e.kind != NodeKind::Action || e.status != NodeStatus::Failure) continue;
    if (!best || e.depth > best_depth) {
      best = e.id;
      best_depth = e.depth;
    }
  }
  return best;
}

std::optional<NodePath> enclosing_sequence(const BehaviorTree& tree, NodeId action_id) {
  auto path = tree.path_of(action_id);
  if (!path || path->empty()) return std::nullopt;
  std::size_t index = path->back();
  NodePath parent_path(path->begin(), path->end() - 1);
  const TreeNode& parent = tree.at(parent_path);
  if (parent.kind == NodeKind::Sequence && index + 1 == parent.children.size()) return parent_path;
  return std::nullopt;
}

BehaviorTree insert_preconditions(BehaviorTree tree, NodeId action_id, std::span<const Literal> conds) {
  const TreeNode* node = tree.find(action_id);
  if (node == nullptr) throw Error(ErrorKind::UnknownNode, "no node with id " + std::to_string(action_id));
  if (node->kind != NodeKind::Action)
    throw Error(ErrorKind::InvalidTarget, "node " + std::to_string(action_id) + " is a " +
                                              to_string(node->kind) + ", not an action");
  if (conds.empty()) return tree;

  auto seq_path = enclosing_sequence(tree, action_id);
  if (!seq_path) {
    NodePath action_path = *tree.path_of(action_id);
    TreeNode wrapped = TreeNode::sequence({*node});
    tree.replace(action_path, std::move(wrapped));
    seq_path = action_path;
  }
  for (std::size_t i = 0; i < conds.size(); ++i)
    tree.insert_child(*seq_path, i, TreeNode::make_condition(conds[i]));
  tree.validate();
  return tree;
}

std::vector<Literal> action_preconditions(const BehaviorTree& tree, NodeId action_id) {
  std::vector<Literal> out;
  auto seq_path = enclosing_sequence(tree, action_id);
  if (!seq_path) return out;
  const TreeNode& seq = tree.at(*seq_path);
  for (std::size_t i = 0; i + 1 < seq.children.size(); ++i) {
    const TreeNode& c = seq.children[i];
    if (c.kind == NodeKind::Condition) {
      out.push_back(*c.condition);
    } else if (c.kind == NodeKind::Fallback && !c.children.empty() &&
               c.children.front().kind == NodeKind::Condition) {
      out.push_back(*c.children.front().condition);
    }
  }
  return out;
}

bool is_expanded_condition(const BehaviorTree& tree, NodeId id) {
  auto path = tree.path_of(id);
  if (!path || path->empty() || path->back() != 0) return false;
  const TreeNode* parent = tree.parent_of(id);
  return parent != nullptr && parent->kind == NodeKind::Fallback &&
         tree.find(id)->kind == NodeKind::Condition;
}

}  // namespace btx
