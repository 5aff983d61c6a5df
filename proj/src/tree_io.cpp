#include "btx/tree_io.hpp"

#include <set>

#include "btx/error.hpp"
#include "codec.hpp"

namespace btx {

namespace detail {

Json to_json(const SlotValue& value) {
  Json j = Json::object();
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ObjectValue>) {
          j["object"] = v.name;
        } else if constexpr (std::is_same_v<T, Quantity>) {
          j["quantity"] = v.value;
          j["unit"] = v.unit;
        } else {
          j["symbol"] = v.symbol;
          j["out_of_vocabulary"] = v.out_of_vocabulary;
        }
      },
      value);
  return j;
}

Json to_json(const GroundAction& action) {
  Json binding = Json::array();
  for (const auto& [slot, value] : action.binding) {
    Json b = Json::object();
    b["slot"] = slot;
    Json encoded = to_json(value);
    for (auto& [k, v] : encoded.items()) b[k] = v;
    binding.push_back(std::move(b));
  }
  Json j = Json::object();
  j["skill"] = action.skill;
  j["binding"] = std::move(binding);
  return j;
}

Json to_json(const TreeNode& node) {
  Json j = Json::object();
  j["id"] = node.id;
  j["kind"] = to_string(node.kind);
  if (node.is_control()) {
    Json children = Json::array();
    for (const auto& c : node.children) children.push_back(to_json(c));
    j["children"] = std::move(children);
  } else if (node.kind == NodeKind::Condition) {
    Json payload = Json::object();
    payload["literal"] = to_string(*node.condition);
    payload["guard"] = node.guard;
    j["payload"] = std::move(payload);
  } else {
    j["payload"] = to_json(*node.action);
  }
  return j;
}

Json to_json(const BehaviorTree& tree) {
  Json j = Json::object();
  j["format"] = "btx-tree";
  j["version"] = 1;
  j["root"] = to_json(tree.root());
  return j;
}

Json to_json(const std::set<Atom>& atoms) {
  Json j = Json::array();
  for (const auto& a : atoms) j.push_back(to_string(a));
  return j;
}

SlotValue slot_value_from(const JsonDoc& doc, const Json& node) {
  if (const Json* obj = doc.optional_member(node, "object")) {
    if (!obj->is_string()) doc.fail(node, "\"object\" must be a string");
    return ObjectValue{obj->get<std::string>()};
  }
  if (const Json* q = doc.optional_member(node, "quantity")) {
    if (!q->is_number()) doc.fail(node, "\"quantity\" must be a number");
    return Quantity{q->get<double>(), doc.string_or(node, "unit", "")};
  }
  if (const Json* s = doc.optional_member(node, "symbol")) {
    if (!s->is_string()) doc.fail(node, "\"symbol\" must be a string");
    const Json* oov = doc.optional_member(node, "out_of_vocabulary");
    if (oov != nullptr && !oov->is_boolean()) doc.fail(node, "\"out_of_vocabulary\" must be a boolean");
    return CategoryValue{s->get<std::string>(), oov != nullptr && oov->get<bool>()};
  }
  doc.fail(node, "expected one of \"object\", \"quantity\" or \"symbol\"");
}

GroundAction action_from(const JsonDoc& doc, const Json& node) {
  doc.expect_object(node, "an action");
  GroundAction action;
  action.skill = doc.string_member(node, "skill");
  if (!is_identifier(action.skill)) doc.fail(node, "skill name '" + action.skill + "' is not an identifier");
  if (const Json* binding = doc.optional_member(node, "binding")) {
    if (!binding->is_array()) doc.fail(node, "\"binding\" must be an array");
    for (const auto& b : *binding) {
      doc.expect_object(b, "a binding");
      std::string slot = doc.string_member(b, "slot");
      if (action.is_bound(slot)) doc.fail(b, "slot '" + slot + "' bound twice");
      action.binding.emplace_back(slot, slot_value_from(doc, b));
    }
  }
  return action;
}

Literal literal_from(const JsonDoc& doc, const Json& owner, const std::string& text) {
  try {
    return parse_literal(text);
  } catch (const FormatError& e) {
    doc.fail(owner, "expected a literal, got \"" + text + "\" (" + e.what() + ")");
  }
}

std::set<Atom> atoms_from(const JsonDoc& doc, const Json& owner, const Json& list) {
  if (!list.is_array()) doc.fail(owner, "expected an array of atoms");
  std::set<Atom> out;
  for (const auto& item : list) {
    if (!item.is_string()) doc.fail(list, "atoms must be strings");
    Literal lit = literal_from(doc, list, item.get<std::string>());
    try {
      out.insert(to_atom(lit));
    } catch (const FormatError& e) {
      doc.fail(list, "\"" + item.get<std::string>() + "\" is not a ground positive atom");
    }
  }
  return out;
}

TreeNode node_from(const JsonDoc& doc, const Json& node) {
  doc.expect_object(node, "a node");
  TreeNode out;
  if (const Json* id = doc.optional_member(node, "id")) {
    if (!id->is_number_unsigned() || id->get<std::uint64_t>() == 0 ||
        id->get<std::uint64_t>() > 0xFFFFFFF0u)
      doc.fail(node, "expected a positive integer \"id\"");
    out.id = id->get<NodeId>();
  }
  std::string kind = doc.string_member(node, "kind");
  if (kind == "sequence" || kind == "fallback") {
    out.kind = kind == "sequence" ? NodeKind::Sequence : NodeKind::Fallback;
    const Json& children = doc.array_member(node, "children");
    if (children.empty()) doc.fail(node, "expected at least one child");
    for (const auto& c : children) out.children.push_back(node_from(doc, c));
    if (doc.optional_member(node, "payload") != nullptr) doc.fail(node, "control nodes take no payload");
  } else if (kind == "condition") {
    out.kind = NodeKind::Condition;
    const Json& payload = doc.object_member(node, "payload");
    out.condition = literal_from(doc, payload, doc.string_member(payload, "literal"));
    if (out.condition->has_params()) doc.fail(payload, "condition literals cannot contain slots");
    if (const Json* guard = doc.optional_member(payload, "guard")) {
      if (!guard->is_boolean()) doc.fail(payload, "\"guard\" must be a boolean");
      out.guard = guard->get<bool>();
    }
  } else if (kind == "action") {
    out.kind = NodeKind::Action;
    out.action = action_from(doc, doc.object_member(node, "payload"));
  } else {
    doc.fail(node, "expected kind sequence, fallback, condition or action, got \"" + kind + "\"");
  }
  if (out.is_leaf() && doc.optional_member(node, "children") != nullptr)
    doc.fail(node, "leaves take no children");
  return out;
}

}  // namespace detail

std::string serialize_tree(const BehaviorTree& tree) {
  tree.validate();
  return detail::to_json(tree).dump(2) + "\n";
}

BehaviorTree parse_tree(std::string_view text, const std::string& source) {
  detail::JsonDoc doc(text, source, ErrorKind::Parse);
  doc.expect_format("btx-tree", 1);
  const detail::Json& root = doc.member(doc.root(), "root");
  TreeNode node = detail::node_from(doc, root);

  std::set<NodeId> seen;
  std::function<void(const TreeNode&)> check = [&](const TreeNode& n) {
    if (n.id != 0 && !seen.insert(n.id).second)
      throw ParseError(source, 0, 0, "unique node ids (id " + std::to_string(n.id) + " repeats)");
    for (const auto& c : n.children) check(c);
  };
  check(node);
  return BehaviorTree(std::move(node));
}

BehaviorTree load_tree(const std::filesystem::path& path) {
  std::string text;
  try {
    text = detail::read_file(path);
  } catch (const Error&) {
    throw ParseError(path.string(), 0, 0, "a readable tree file");
  }
  return parse_tree(text, path.string());
}

void save_tree(const BehaviorTree& tree, const std::filesystem::path& path) {
  detail::write_file_atomic(path, serialize_tree(tree));
}

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  detail::write_file_atomic(path, content);
}

std::string node_label(const TreeNode& node) {
  switch (node.kind) {
    case NodeKind::Sequence: return "->";
    case NodeKind::Fallback: return "?";
    case NodeKind::Condition: return to_string(*node.condition) + "?";
    case NodeKind::Action: return to_string(*node.action) + "!";
  }
  return "";
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void dot_node(const TreeNode& node, std::string& out) {
  std::string shape = node.kind == NodeKind::Action      ? "box"
                      : node.kind == NodeKind::Condition ? "ellipse"
                                                         : "square";
  out += "  n" + std::to_string(node.id) + " [label=\"" + dot_escape(node_label(node)) +
         "\", shape=" + shape;
  if (node.guard) out += ", style=dashed";
  out += "];\n";
  for (const auto& c : node.children) {
    dot_node(c, out);
    out += "  n" + std::to_string(node.id) + " -> n" + std::to_string(c.id) + ";\n";
  }
}

}  // namespace

std::string to_dot(const BehaviorTree& tree, const std::string& name) {
  std::string out = "digraph \"" + dot_escape(name) + "\" {\n  node [fontname=\"Helvetica\"];\n";
  dot_node(tree.root(), out);
  out += "}\n";
  return out;
}

}  // namespace btx
