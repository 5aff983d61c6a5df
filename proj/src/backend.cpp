#include "btx/backend.hpp"

#include <algorithm>

#include "btx/error.hpp"
#include "json_util.hpp"

namespace btx {

namespace {

std::string object_phrase(const GroundAction& action) {
  GroundAction objects_only{action.skill, {}};
  for (const auto& [slot, value] : action.binding)
    if (std::holds_alternative<ObjectValue>(value)) objects_only.binding.emplace_back(slot, value);
  return to_string(objects_only);
}

bool args_match(const std::vector<Term>& pattern, const std::vector<std::string>& objects) {
  if (pattern.size() != objects.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i)
    if (!pattern[i].is_wildcard() && pattern[i].name != objects[i]) return false;
  return true;
}

}  // namespace

std::vector<std::string> fixture_keys(const LlmRequest& request) {
  std::vector<std::string> parts{request.scenario, to_string(request.role)};
  if (!request.slot.empty()) parts.push_back(request.slot);
  if (request.action) parts.push_back(object_phrase(*request.action));
  std::vector<std::string> keys;
  for (std::size_t n = parts.size(); n >= 2; --n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) key += (i ? "/" : "") + parts[i];
    keys.push_back(std::move(key));
  }
  return keys;
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> responses)
    : responses_(std::move(responses)) {}

std::string ScriptedBackend::complete(const LlmRequest& request, const CompletionSettings&) {
  std::vector<std::string> keys = fixture_keys(request);
  std::lock_guard lock(mutex_);
  for (const auto& key : keys) {
    auto it = responses_.find(key);
    if (it == responses_.end() || it->second.empty()) continue;
    std::size_t& cursor = cursor_[key];
    const std::string& text = it->second[std::min(cursor, it->second.size() - 1)];
    ++cursor;
    return text;
  }
  throw MissingFixture(keys.front());
}

std::map<std::string, std::vector<std::string>> parse_fixtures(std::string_view text,
                                                               const std::string& source) {
  detail::JsonDoc doc(text, source, ErrorKind::Schema);
  doc.expect_format("btx-fixtures", 1);
  std::map<std::string, std::vector<std::string>> out;
  const detail::Json& responses = doc.object_member(doc.root(), "responses");
  for (const auto& [key, value] : responses.items()) {
    std::vector<std::string> list;
    if (value.is_string()) {
      list.push_back(value.get<std::string>());
    } else if (value.is_array() && !value.empty()) {
      for (const auto& v : value) {
        if (!v.is_string()) doc.fail(value, "responses for '" + key + "' must be strings");
        list.push_back(v.get<std::string>());
      }
    } else {
      doc.fail(responses, "response for '" + key + "' must be a string or a non-empty array");
    }
    out[key] = std::move(list);
  }
  return out;
}

std::map<std::string, std::vector<std::string>> load_fixtures(const std::filesystem::path& path) {
  return parse_fixtures(detail::read_file(path), path.string());
}

void OracleBackend::add(const std::string& scenario, OracleKnowledge knowledge) {
  knowledge_[scenario] = std::move(knowledge);
}

std::string OracleBackend::complete(const LlmRequest& request, const CompletionSettings&) {
  auto it = knowledge_.find(request.scenario);
  if (it == knowledge_.end()) throw MissingFixture(fixture_keys(request).front());
  const OracleKnowledge& k = it->second;
  switch (request.role) {
    case PromptRole::GoalInterpretation:
      if (!k.goal.empty()) return "ANSWER: " + k.goal;
      break;
    case PromptRole::FailureResolution:
      if (!request.action) break;
      for (const auto& f : k.faults) {
        if (f.skill == request.action->skill && args_match(f.args, request.action->objects()) &&
            f.message == request.error_message)
          return "ANSWER: " + f.answer;
      }
      break;
    case PromptRole::ParameterResolution: {
      if (!request.action) break;
      auto objects = request.action->objects();
      for (const auto& p : k.parameters) {
        if (p.skill != request.action->skill || p.slot != request.slot) continue;
        if (!p.object.empty() && (objects.empty() || objects.front() != p.object)) continue;
        return "ANSWER: " + p.value;
      }
      break;
    }
  }
  throw MissingFixture(fixture_keys(request).front());
}

std::string CountingBackend::complete(const LlmRequest& request, const CompletionSettings& settings) {
  ++total_;
  ++by_role_[static_cast<int>(request.role)];
  return inner_.complete(request, settings);
}

std::size_t CountingBackend::calls(PromptRole role) const {
  return by_role_[static_cast<int>(role)].load();
}

}  // namespace btx
