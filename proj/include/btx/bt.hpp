#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "btx/action.hpp"
#include "btx/literal.hpp"

namespace btx {

enum class NodeStatus { Success, Failure, Running };
enum class NodeKind { Sequence, Fallback, Condition, Action };

const char* to_string(NodeStatus status);
const char* to_string(NodeKind kind);

// Monotonically assigned per tree; 0 means "not yet assigned".
using NodeId = std::uint32_t;

struct TreeNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::Sequence;
  std::vector<TreeNode> children;
  std::optional<Literal> condition;   // Condition leaves
  bool guard = false;                 // relevance check, never expanded
  std::optional<GroundAction> action; // Action leaves

  bool is_control() const { return kind == NodeKind::Sequence || kind == NodeKind::Fallback; }
  bool is_leaf() const { return !is_control(); }

  static TreeNode sequence(std::vector<TreeNode> children);
  static TreeNode fallback(std::vector<TreeNode> children);
  static TreeNode make_condition(Literal literal, bool guard = false);
  static TreeNode make_action(GroundAction action);
};

// Equality ignoring node ids.
bool same_structure(const TreeNode& a, const TreeNode& b);

// Child indices from the root.
using NodePath = std::vector<std::size_t>;

class BehaviorTree {
 public:
  // Nodes with id 0 receive fresh ids in preorder; explicit ids are kept.
  explicit BehaviorTree(TreeNode root);

  const TreeNode& root() const { return root_; }
  NodeId next_id() const { return next_id_; }
  std::size_t size() const { return index_.size(); }

  const TreeNode* find(NodeId id) const;
  std::optional<NodePath> path_of(NodeId id) const;
  const TreeNode& at(const NodePath& path) const;
  // Parent of `id`, nullptr for the root or unknown ids.
  const TreeNode* parent_of(NodeId id) const;

  // Ids in preorder.
  std::vector<NodeId> preorder() const;

  // Throws Error(InvalidTree) when the structure or index is inconsistent.
  void validate() const;

  // Replaces the subtree at `path`; new nodes (id 0) get fresh ids.
  void replace(const NodePath& path, TreeNode node);
  // Inserts `node` as child `index` of the control node at `path`.
  void insert_child(const NodePath& path, std::size_t index, TreeNode node);
  // Moves child `index` of the control node at `path` one slot to the left.
  void move_child_left(const NodePath& path, std::size_t index);
  // Binds `slot` on the action leaf `id`.
  void bind_slot(NodeId id, const std::string& slot, SlotValue value);

  bool operator==(const BehaviorTree& other) const;

 private:
  TreeNode& mutable_at(const NodePath& path);
  void assign_ids(TreeNode& node);
  void reindex();

  TreeNode root_;
  NodeId next_id_ = 1;
  std::unordered_map<NodeId, NodePath> index_;
};

struct TraceEntry {
  NodeId id = 0;
  NodeKind kind = NodeKind::Sequence;
  NodeStatus status = NodeStatus::Failure;
  std::uint32_t depth = 0;
};

// Nodes in visit order (root first) with the status each returned.
struct TickTrace {
  std::vector<TraceEntry> entries;
  NodeStatus root_status = NodeStatus::Failure;

  bool visited(NodeId id) const;
  std::optional<NodeStatus> status_of(NodeId id) const;
};

struct TickContext {
  std::function<bool(const Literal&)> condition;
  std::function<NodeStatus(NodeId, const GroundAction&)> action;
};

// One memoryless pass from the root. Sequences stop at the first
// non-Success child, fallbacks at the first non-Failure child; Running
// propagates immediately. Callback exceptions propagate unchanged.
TickTrace tick(const BehaviorTree& tree, const TickContext& ctx);

// Deepest action leaf that returned Failure (leftmost among equals).
std::optional<NodeId> failing_action(const TickTrace& trace);

// Sequence that owns the action's precondition slot: its parent when the
// action is the parent's last child and the parent is a Sequence.
std::optional<NodePath> enclosing_sequence(const BehaviorTree& tree, NodeId action_id);

// Inserts `conds` as the leftmost children of the action's enclosing
// Sequence, wrapping the action in a new Sequence if it has none.
BehaviorTree insert_preconditions(BehaviorTree tree, NodeId action_id,
                                  std::span<const Literal> conds);

// Condition leaves directly guarding the action: leaves left of it in its
// enclosing Sequence plus the heads of expanded-condition Fallbacks there.
std::vector<Literal> action_preconditions(const BehaviorTree& tree, NodeId action_id);

// A condition is expanded when it heads a Fallback.
bool is_expanded_condition(const BehaviorTree& tree, NodeId id);

}  // namespace btx
