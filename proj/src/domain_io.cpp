#include <algorithm>
#include <set>

#include "btx/domain.hpp"
#include "btx/error.hpp"
#include "json_util.hpp"

namespace btx {

namespace {

using detail::Json;
using detail::JsonDoc;

std::vector<std::string> string_list(const JsonDoc& doc, const Json& node, const char* key) {
  std::vector<std::string> out;
  const Json* arr = doc.optional_member(node, key);
  if (arr == nullptr) return out;
  if (!arr->is_array()) doc.fail(node, std::string("key \"") + key + "\" must be an array");
  for (const auto& v : *arr) {
    if (!v.is_string()) doc.fail(*arr, std::string("entries of \"") + key + "\" must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void require_identifier(const JsonDoc& doc, const Json& node, const std::string& name,
                        const char* what) {
  if (!is_identifier(name)) doc.fail(node, std::string(what) + " '" + name + "' is not an identifier");
}

Literal literal_field(const JsonDoc& doc, const Json& node, const std::string& text) {
  try {
    return parse_literal(text);
  } catch (const FormatError& e) {
    doc.fail(node, "bad literal \"" + text + "\": " + e.what());
  }
}

SlotKind slot_kind(const JsonDoc& doc, const Json& node, const std::string& kind) {
  if (kind == "object") return SlotKind::Object;
  if (kind == "numeric") return SlotKind::Numeric;
  if (kind == "categorical") return SlotKind::Categorical;
  doc.fail(node, "slot kind must be object, numeric or categorical (got '" + kind + "')");
}

std::vector<PromptExample> examples_for(const JsonDoc& doc, const Json& examples, const char* key) {
  std::vector<PromptExample> out;
  const Json* list = doc.optional_member(examples, key);
  if (list == nullptr) return out;
  if (!list->is_array()) doc.fail(examples, std::string("examples.") + key + " must be an array");
  for (const auto& e : *list) {
    doc.expect_object(e, "an example");
    out.push_back({doc.string_member(e, "instruction"), doc.string_member(e, "answer")});
  }
  return out;
}

}  // namespace

Domain parse_domain(std::string_view text, const std::string& source) {
  JsonDoc doc(text, source, ErrorKind::Schema);
  doc.expect_format("btx-domain", 1);
  const Json& root = doc.root();

  Domain domain;
  domain.name = doc.string_member(root, "name");

  std::set<std::string> seen;
  for (const auto& p : doc.array_member(root, "predicates")) {
    doc.expect_object(p, "a predicate");
    PredicateDecl decl;
    decl.name = doc.string_member(p, "name");
    require_identifier(doc, p, decl.name, "predicate");
    const Json& arity = doc.member(p, "arity");
    if (!arity.is_number_unsigned()) doc.fail(p, "arity must be a non-negative integer");
    decl.arity = arity.get<std::size_t>();
    decl.hidden = p.value("hidden", false);
    decl.description = doc.string_or(p, "description", "");
    decl.phrase = doc.string_or(p, "phrase", "");
    if (!decl.hidden && decl.description.empty())
      doc.fail(p, "predicate '" + decl.name + "' needs a non-empty description");
    if (!seen.insert(decl.name).second) doc.fail(p, "duplicate predicate '" + decl.name + "'");
    domain.predicates.push_back(std::move(decl));
  }

  seen.clear();
  for (const auto& o : doc.array_member(root, "objects")) {
    doc.expect_object(o, "an object");
    ObjectRef ref{doc.string_member(o, "name"), doc.string_member(o, "category")};
    require_identifier(doc, o, ref.name, "object");
    if (ref.name == kWildcard) doc.fail(o, "object name 'any_object' is reserved");
    if (!seen.insert(ref.name).second) doc.fail(o, "duplicate object '" + ref.name + "'");
    domain.objects.push_back(std::move(ref));
  }

  seen.clear();
  for (const auto& s : doc.array_member(root, "skills")) {
    doc.expect_object(s, "a skill");
    SkillTemplate skill;
    skill.name = doc.string_member(s, "name");
    require_identifier(doc, s, skill.name, "skill");
    if (!seen.insert(skill.name).second) doc.fail(s, "duplicate skill '" + skill.name + "'");
    skill.description = doc.string_or(s, "description", "");
    if (const Json* params = doc.optional_member(s, "params")) {
      for (const auto& p : *params) {
        doc.expect_object(p, "a slot");
        ParamDecl decl;
        decl.name = doc.string_member(p, "name");
        require_identifier(doc, p, decl.name, "slot");
        decl.kind = slot_kind(doc, p, doc.string_or(p, "kind", "object"));
        decl.categories = string_list(doc, p, "categories");
        decl.unit = doc.string_or(p, "unit", "");
        decl.vocabulary = string_list(doc, p, "vocabulary");
        decl.description = doc.string_or(p, "description", "");
        if (decl.kind == SlotKind::Numeric && decl.unit.empty())
          doc.fail(p, "numeric slot '" + decl.name + "' needs a unit");
        if (decl.kind == SlotKind::Categorical && decl.vocabulary.empty())
          doc.fail(p, "categorical slot '" + decl.name + "' needs a vocabulary");
        if (skill.param(decl.name) != nullptr) doc.fail(p, "duplicate slot '" + decl.name + "'");
        skill.params.push_back(std::move(decl));
      }
    }
    if (const Json* duration = doc.optional_member(s, "duration")) {
      if (!duration->is_number_unsigned() || duration->get<std::size_t>() == 0)
        doc.fail(s, "duration must be a positive integer");
      skill.duration = duration->get<std::size_t>();
    }

    auto read_templates = [&](const char* key, std::vector<Literal>& into, bool hidden) {
      for (const auto& text : string_list(doc, s, key)) {
        Literal lit = literal_field(doc, s, text);
        try {
          domain.validate_literal(lit, /*allow_params=*/true, /*allow_hidden=*/hidden);
        } catch (const Error& e) {
          doc.fail(s, std::string(key) + " of skill '" + skill.name + "': " + e.what());
        }
        for (const auto& t : lit.args) {
          if (!t.is_param()) continue;
          const ParamDecl* decl = skill.param(t.name);
          if (decl == nullptr || decl->kind != SlotKind::Object)
            doc.fail(s, "skill '" + skill.name + "' references undeclared object slot '?" + t.name + "'");
        }
        if (!lit.negated && lit.has_wildcard() && std::string(key) != "preconditions")
          doc.fail(s, "positive effect '" + text + "' cannot contain any_object");
        into.push_back(std::move(lit));
      }
    };
    // Objects must be known before templates are validated.
    read_templates("preconditions", skill.preconditions, false);
    read_templates("effects", skill.effects, false);
    read_templates("hidden_effects", skill.hidden_effects, true);
    domain.skills.push_back(std::move(skill));
  }

  if (const Json* examples = doc.optional_member(root, "examples")) {
    doc.expect_object(*examples, "an examples");
    domain.examples[PromptRole::GoalInterpretation] = examples_for(doc, *examples, "goal");
    domain.examples[PromptRole::FailureResolution] = examples_for(doc, *examples, "failure");
    domain.examples[PromptRole::ParameterResolution] = examples_for(doc, *examples, "parameter");
  }
  return domain;
}

Domain load_domain(const std::filesystem::path& path) {
  return parse_domain(detail::read_file(path), path.string());
}

}  // namespace btx
