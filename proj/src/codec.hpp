#pragma once

// JSON encodings shared by the tree, scenario, trace and record formats.

#include "btx/bt.hpp"
#include "json_util.hpp"

namespace btx::detail {

Json to_json(const SlotValue& value);
Json to_json(const GroundAction& action);
Json to_json(const TreeNode& node);
Json to_json(const BehaviorTree& tree);
Json to_json(const std::set<Atom>& atoms);

SlotValue slot_value_from(const JsonDoc& doc, const Json& node);
GroundAction action_from(const JsonDoc& doc, const Json& node);
TreeNode node_from(const JsonDoc& doc, const Json& node);
Literal literal_from(const JsonDoc& doc, const Json& owner, const std::string& text);
std::set<Atom> atoms_from(const JsonDoc& doc, const Json& owner, const Json& list);

}  // namespace btx::detail
