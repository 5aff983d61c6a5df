#include "btx/action.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace btx {

namespace {

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string to_string(const SlotValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ObjectValue>) {
          return v.name;
        } else if constexpr (std::is_same_v<T, Quantity>) {
          return v.unit.empty() ? format_number(v.value) : format_number(v.value) + " " + v.unit;
        } else {
          return v.symbol;
        }
      },
      value);
}

std::string to_string(const ParamValue& value) { return value.slot + "=" + to_string(value.value); }

std::optional<Quantity> parse_quantity(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  // strtod accepts hex/inf/nan; restrict to plain decimal notation first.
  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i, ++digits;
  }
  if (digits == 0) return std::nullopt;
  std::string number(text.substr(0, i));
  Quantity q;
  q.value = std::strtod(number.c_str(), nullptr);
  std::string_view rest = trim(text.substr(i));
  for (char c : rest) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalpha(u) || c == '/' || c == '_')) return std::nullopt;
  }
  q.unit = std::string(rest);
  return q;
}

const SlotValue* GroundAction::get(std::string_view slot) const {
  for (const auto& [name, value] : binding)
    if (name == slot) return &value;
  return nullptr;
}

std::optional<std::string> GroundAction::object(std::string_view slot) const {
  const SlotValue* v = get(slot);
  if (v == nullptr) return std::nullopt;
  if (const auto* obj = std::get_if<ObjectValue>(v)) return obj->name;
  return std::nullopt;
}

std::vector<std::string> GroundAction::objects() const {
  std::vector<std::string> out;
  for (const auto& [name, value] : binding)
    if (const auto* obj = std::get_if<ObjectValue>(&value)) out.push_back(obj->name);
  return out;
}

void GroundAction::bind(const std::string& slot, SlotValue value) {
  for (auto& [name, existing] : binding) {
    if (name == slot) {
      existing = std::move(value);
      return;
    }
  }
  binding.emplace_back(slot, std::move(value));
}

std::string to_string(const GroundAction& action) {
  std::string out = action.skill + "(";
  bool first = true;
  for (const auto& [name, value] : action.binding) {
    if (!std::holds_alternative<ObjectValue>(value)) continue;
    if (!first) out += ", ";
    out += to_string(value);
    first = false;
  }
  for (const auto& [name, value] : action.binding) {
    if (std::holds_alternative<ObjectValue>(value)) continue;
    if (!first) out += ", ";
    out += name + "=" + to_string(value);
    first = false;
  }
  out += ")";
  return out;
}

}  // namespace btx
