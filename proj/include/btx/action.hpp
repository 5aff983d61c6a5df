#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace btx {

struct ObjectValue {
  std::string name;
  auto operator<=>(const ObjectValue&) const = default;
};

struct Quantity {
  double value = 0.0;
  std::string unit;
  auto operator<=>(const Quantity&) const = default;
};

struct CategoryValue {
  std::string symbol;
  bool out_of_vocabulary = false;
  auto operator<=>(const CategoryValue&) const = default;
};

using SlotValue = std::variant<ObjectValue, Quantity, CategoryValue>;

// A value suggested for (or preset on) a non-object skill slot.
struct ParamValue {
  std::string slot;
  SlotValue value;
  auto operator<=>(const ParamValue&) const = default;
};

// "5.3 N", "shovel", "blue_cube".
std::string to_string(const SlotValue& value);
std::string to_string(const ParamValue& value);

// Parses "<number> <unit>" (unit optional when `require_unit` is false).
// Returns nullopt when `text` is not numeric.
std::optional<Quantity> parse_quantity(std::string_view text);

// Skill instance. Bindings are kept in the skill's declared slot order;
// numeric and categorical slots may stay unbound until parameter resolution.
struct GroundAction {
  std::string skill;
  std::vector<std::pair<std::string, SlotValue>> binding;

  const SlotValue* get(std::string_view slot) const;
  std::optional<std::string> object(std::string_view slot) const;
  // Object arguments in slot order.
  std::vector<std::string> objects() const;
  void bind(const std::string& slot, SlotValue value);
  bool is_bound(std::string_view slot) const { return get(slot) != nullptr; }

  auto operator<=>(const GroundAction&) const = default;
};

// `place(blue_cube, green_cube)`, `Pick(Egg, force=5.3 N)`.
std::string to_string(const GroundAction& action);

}  // namespace btx
