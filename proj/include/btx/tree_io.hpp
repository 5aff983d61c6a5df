#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "btx/bt.hpp"

namespace btx {

// Tree file schema:
//   {"format": "btx-tree", "version": 1, "root": <node>}
//   node    := {"id": N, "kind": "sequence"|"fallback", "children": [node...]}
//            | {"id": N, "kind": "condition", "payload": {"literal": "~on(any_object, x)", "guard": false}}
//            | {"id": N, "kind": "action", "payload": {"skill": "grasp", "binding": [binding...]}}
//   binding := {"slot": s, "object": o} | {"slot": s, "quantity": 5.3, "unit": "N"}
//            | {"slot": s, "symbol": "shovel", "out_of_vocabulary": false}
// "id" is optional on input; missing ids are assigned in preorder.
std::string serialize_tree(const BehaviorTree& tree);
BehaviorTree parse_tree(std::string_view text, const std::string& source = "<tree>");

BehaviorTree load_tree(const std::filesystem::path& path);
void save_tree(const BehaviorTree& tree, const std::filesystem::path& path);

// Writes a sibling temp file, then renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

// Graphviz digraph. Conditions end in "?", actions in "!", negation is "~".
std::string to_dot(const BehaviorTree& tree, const std::string& name = "policy");

// `~on(any_object, blue_cube)?` / `grasp(blue_cube)!` / `->` / `?`.
std::string node_label(const TreeNode& node);

}  // namespace btx
