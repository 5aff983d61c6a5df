#include "btx/llm.hpp"

#include <algorithm>
#include <cctype>

#include "btx/error.hpp"

namespace btx {

namespace {

constexpr const char* kArgNames[] = {"x", "y", "z", "w", "v", "u"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string first_word(std::string_view s) {
  s = trim(s);
  std::size_t end = 0;
  while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end]))) ++end;
  return std::string(s.substr(0, std::min<std::size_t>(end, 40)));
}

std::string skill_phrase(const GroundAction& action) {
  GroundAction objects_only{action.skill, {}};
  for (const auto& [slot, value] : action.binding)
    if (std::holds_alternative<ObjectValue>(value)) objects_only.binding.emplace_back(slot, value);
  return to_string(objects_only);
}

}  // namespace

void PromptSpec::validate() const {
  if (role == PromptRole::FailureResolution && (!error_message || !failing_action))
    throw Error(ErrorKind::InvalidSpec, "failure prompts need an error message and the failing action");
  if (role == PromptRole::ParameterResolution && (!failing_action || !slot))
    throw Error(ErrorKind::InvalidSpec, "parameter prompts need the action and the slot");
  for (const auto& entry : condition_catalog)
    if (entry.description.empty())
      throw Error(ErrorKind::InvalidSpec, "condition '" + entry.signature + "' has no description");
}

std::string describe_scene(const Domain& domain, const WorldState& state) {
  std::string out;
  for (const auto& atom : state.visible()) {
    const PredicateDecl* decl = domain.predicate(atom.predicate);
    if (decl == nullptr || decl->hidden) continue;
    std::string sentence;
    if (decl->phrase.empty()) {
      sentence = to_string(atom) + " holds.";
    } else {
      sentence = decl->phrase;
      for (std::size_t i = 0; i < atom.args.size(); ++i) {
        std::string marker = "{" + std::to_string(i) + "}";
        for (std::size_t pos; (pos = sentence.find(marker)) != std::string::npos;)
          sentence.replace(pos, marker.size(), atom.args[i]);
      }
      if (sentence.back() != '.') sentence += '.';
    }
    if (!out.empty()) out += ' ';
    out += sentence;
  }
  return out.empty() ? "No conditions currently hold." : out;
}

std::vector<CatalogEntry> condition_catalog(const Domain& domain) {
  std::vector<CatalogEntry> out;
  for (const PredicateDecl* p : domain.catalog()) {
    std::string sig = p->name + "(";
    for (std::size_t i = 0; i < p->arity; ++i) {
      if (i > 0) sig += ", ";
      sig += i < std::size(kArgNames) ? kArgNames[i] : "a" + std::to_string(i);
    }
    sig += ")";
    out.push_back({std::move(sig), p->description});
  }
  return out;
}

std::string output_format(PromptRole role, const ParamDecl* slot) {
  const char* answer_first =
      "Give the answer first. If you want to explain it, do so afterwards on a line starting "
      "with REASONING:. Write nothing else.\n";
  switch (role) {
    case PromptRole::GoalInterpretation:
      return std::string(
                 "The first line of your reply must have the form\n"
                 "ANSWER: <condition> & <condition> & ...\n"
                 "listing the conditions that must hold when the instruction is fulfilled. Write "
                 "each condition as name(argument, ...) with the condition names and objects "
                 "listed above, and prefix it with ~ to require that it does not hold.\n") +
             answer_first;
    case PromptRole::FailureResolution:
      return std::string(
                 "The first line of your reply must have the form\n"
                 "ANSWER: <condition> & <condition> & ...\n"
                 "listing the conditions that must hold before the failing action can succeed. "
                 "Write each condition as name(argument, ...) with the condition names and "
                 "objects listed above, prefix it with ~ to require that it does not hold, and "
                 "use any_object to stand for an arbitrary object.\n") +
             answer_first;
    case PromptRole::ParameterResolution:
      if (slot != nullptr && slot->kind == SlotKind::Numeric)
        return "The first line of your reply must have the form\nANSWER: <number> " + slot->unit +
               "\nwith a plain decimal number.\n" + answer_first;
      return std::string("The first line of your reply must have the form\nANSWER: <value>\n"
                         "with a single word from the listed values if one fits.\n") +
             answer_first;
  }
  return answer_first;
}

PromptSpec goal_prompt(const Domain& domain, const WorldState& state, std::string instruction) {
  PromptSpec spec;
  spec.role = PromptRole::GoalInterpretation;
  spec.instruction = std::move(instruction);
  spec.objects = domain.objects;
  spec.condition_catalog = condition_catalog(domain);
  if (auto it = domain.examples.find(spec.role); it != domain.examples.end()) spec.examples = it->second;
  spec.scene_description = describe_scene(domain, state);
  spec.output_format = output_format(spec.role);
  return spec;
}

PromptSpec failure_prompt(const Domain& domain, const WorldState& state, std::string instruction,
                          const GroundAction& action, std::string error_message) {
  PromptSpec spec = goal_prompt(domain, state, std::move(instruction));
  spec.role = PromptRole::FailureResolution;
  spec.examples.clear();
  if (auto it = domain.examples.find(spec.role); it != domain.examples.end()) spec.examples = it->second;
  spec.error_message = std::move(error_message);
  spec.failing_action = action;
  spec.output_format = output_format(spec.role);
  return spec;
}

PromptSpec parameter_prompt(const Domain& domain, const WorldState& state,
                            std::string instruction, const GroundAction& action,
                            const ParamDecl& slot) {
  PromptSpec spec = goal_prompt(domain, state, std::move(instruction));
  spec.role = PromptRole::ParameterResolution;
  spec.examples.clear();
  if (auto it = domain.examples.find(spec.role); it != domain.examples.end()) spec.examples = it->second;
  spec.failing_action = action;
  spec.slot = slot;
  spec.output_format = output_format(spec.role, &slot);
  return spec;
}

std::string build_prompt(const PromptSpec& spec) {
  spec.validate();
  std::string out;
  switch (spec.role) {
    case PromptRole::GoalInterpretation:
      out += "You turn instructions given to a robot into formal goal conditions.\n";
      out += "Instruction: " + spec.instruction + "\n";
      break;
    case PromptRole::FailureResolution:
      out += "A robot failed while executing an action of its task. Identify the conditions "
             "that must hold before the action can succeed.\n";
      out += "Task: " + spec.instruction + "\n";
      break;
    case PromptRole::ParameterResolution:
      out += "A robot action has a parameter that nobody specified. Suggest a suitable value "
             "for the task.\n";
      out += "Task: " + spec.instruction + "\n";
      break;
  }

  out += "\nConditions:\n";
  for (const auto& entry : spec.condition_catalog)
    out += "- " + entry.signature + ": " + entry.description + "\n";

  out += "\nObjects (only the listed objects can be used; if something else is asked for, use "
         "the most similar listed object):\n";
  for (const auto& obj : spec.objects) out += "- " + obj.name + " (" + obj.category + ")\n";

  out += "\nScene: " + spec.scene_description + "\n";

  if (!spec.examples.empty()) {
    out += "\nExamples:\n";
    for (const auto& ex : spec.examples) {
      out += "Instruction: " + ex.instruction + "\n";
      out += ex.answer + "\n";
    }
  }

  if (spec.role == PromptRole::FailureResolution) {
    out += "\nFailing action: " + skill_phrase(*spec.failing_action) + "\n";
    out += "Error message: " + *spec.error_message + "\n";
  } else if (spec.role == PromptRole::ParameterResolution) {
    const ParamDecl& slot = *spec.slot;
    out += "\nAction: " + skill_phrase(*spec.failing_action) + "\n";
    out += "Parameter: " + slot.name;
    if (slot.kind == SlotKind::Numeric) {
      out += " (number in " + slot.unit + ")";
    } else {
      out += " (one of:";
      for (const auto& v : slot.vocabulary) out += " " + v;
      out += ")";
    }
    if (!slot.description.empty()) out += ": " + slot.description;
    out += "\n";
    if (spec.error_message) out += "Error message: " + *spec.error_message + "\n";
  }

  out += "\nOutput format:\n" + spec.output_format;
  return out;
}

namespace {

struct Sections {
  std::string answer;
  std::size_t answer_column = 1;  // 1-based column of `answer` within its line
  std::optional<std::string> reasoning;
};

Sections split_sections(std::string_view raw) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= raw.size()) {
    std::size_t end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }

  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw FormatError("empty response, expected 'ANSWER:'", "", 1);

  std::string_view line = lines[i];
  std::size_t indent = 0;
  while (indent < line.size() && std::isspace(static_cast<unsigned char>(line[indent]))) ++indent;
  constexpr std::string_view kAnswer = "ANSWER:";
  if (line.substr(indent, kAnswer.size()) != kAnswer)
    throw FormatError("expected 'ANSWER:' at the start of the response", first_word(line.substr(indent)),
                      indent + 1);

  Sections out;
  std::string_view rest = line.substr(indent + kAnswer.size());
  std::size_t lead = 0;
  while (lead < rest.size() && std::isspace(static_cast<unsigned char>(rest[lead]))) ++lead;
  out.answer = std::string(trim(rest));
  out.answer_column = indent + kAnswer.size() + lead + 1;
  if (out.answer.empty()) throw FormatError("empty ANSWER", "", out.answer_column);

  ++i;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size()) return out;

  std::string_view next = trim(lines[i]);
  constexpr std::string_view kReasoning = "REASONING:";
  if (next.substr(0, kReasoning.size()) != kReasoning)
    throw FormatError("unexpected text after the ANSWER line (only a REASONING: section may follow)",
                      first_word(next), 1);
  std::string reasoning(trim(next.substr(kReasoning.size())));
  for (++i; i < lines.size(); ++i) {
    if (!reasoning.empty()) reasoning += '\n';
    reasoning += std::string(lines[i]);
  }
  reasoning = std::string(trim(reasoning));
  if (!reasoning.empty()) out.reasoning = std::move(reasoning);
  return out;
}

std::vector<Literal> parse_conjunction(const Sections& sections, const Domain& domain) {
  std::vector<Literal> out;
  const std::string& text = sections.answer;
  std::size_t start = 0;
  while (true) {
    std::size_t amp = text.find('&', start);
    std::size_t end = amp == std::string::npos ? text.size() : amp;
    std::string_view piece(text.data() + start, end - start);
    std::size_t column = sections.answer_column + start;
    if (trim(piece).empty())
      throw FormatError("empty condition in ANSWER", amp == std::string::npos ? "" : "&",
                        column + piece.size());
    Literal lit;
    try {
      lit = parse_literal(piece);
    } catch (const FormatError& e) {
      std::string message = e.what();
      if (auto at = message.rfind(" (column "); at != std::string::npos) message.erase(at);
      std::size_t shifted = column + e.column() - 1;
      throw FormatError(message + " (column " + std::to_string(shifted) + ")", e.token(), shifted);
    }
    if (lit.has_params())
      throw FormatError("slot references ('?') are not allowed in answers", "?", column + piece.find('?'));
    try {
      domain.validate_literal(lit);
    } catch (const FormatError& e) {
      throw FormatError(e.what(), e.token(), column);
    }
    if (std::find(out.begin(), out.end(), lit) == out.end()) out.push_back(std::move(lit));
    if (amp == std::string::npos) break;
    start = amp + 1;
  }
  return out;
}

}  // namespace

GoalResponse parse_goal_response(std::string_view raw, const Domain& domain) {
  Sections s = split_sections(raw);
  return {GoalSpec(parse_conjunction(s, domain)), std::move(s.reasoning)};
}

PreconditionResponse parse_precondition_response(std::string_view raw, const Domain& domain) {
  Sections s = split_sections(raw);
  return {parse_conjunction(s, domain), std::move(s.reasoning)};
}

ParamResponse parse_param_response(std::string_view raw, const ParamDecl& slot) {
  Sections s = split_sections(raw);
  ParamResponse out;
  out.value.slot = slot.name;
  out.reasoning = std::move(s.reasoning);
  switch (slot.kind) {
    case SlotKind::Numeric: {
      auto q = parse_quantity(s.answer);
      if (!q)
        throw FormatError("expected '<number> " + slot.unit + "' for parameter '" + slot.name + "'",
                          first_word(s.answer), s.answer_column);
      if (q->unit.empty())
        throw FormatError("missing unit, expected '" + slot.unit + "'", "", s.answer_column + s.answer.size());
      if (q->unit != slot.unit)
        throw Error(ErrorKind::UnitMismatch, "parameter '" + slot.name + "' takes " + slot.unit +
                                                 ", got '" + q->unit + "'");
      out.value.value = *q;
      break;
    }
    case SlotKind::Categorical: {
      if (!is_identifier(s.answer))
        throw FormatError("expected a single value for parameter '" + slot.name + "'",
                          first_word(s.answer), s.answer_column);
      bool known = std::find(slot.vocabulary.begin(), slot.vocabulary.end(), s.answer) != slot.vocabulary.end();
      out.value.value = CategoryValue{s.answer, !known};
      break;
    }
    case SlotKind::Object:
      throw Error(ErrorKind::InvalidSpec, "object slot '" + slot.name + "' is bound by the planner");
  }
  return out;
}

std::string format_answer(const std::vector<Literal>& literals) {
  std::string out = "ANSWER: ";
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (i > 0) out += " & ";
    out += to_string(literals[i]);
  }
  return out;
}

std::string format_answer(const SlotValue& value) { return "ANSWER: " + to_string(value); }

}  // namespace btx
