#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace btx {

// Placeholder object. Existential under a positive literal, universal under
// negation: ~on(any_object, x) reads "nothing is on x".
inline constexpr std::string_view kWildcard = "any_object";

enum class TermKind { Object, Wildcard, Param };

struct Term {
  TermKind kind = TermKind::Object;
  std::string name;  // object or slot name; empty for the wildcard

  static Term object(std::string name) { return {TermKind::Object, std::move(name)}; }
  static Term wildcard() { return {TermKind::Wildcard, {}}; }
  static Term param(std::string name) { return {TermKind::Param, std::move(name)}; }

  bool is_object() const { return kind == TermKind::Object; }
  bool is_wildcard() const { return kind == TermKind::Wildcard; }
  bool is_param() const { return kind == TermKind::Param; }

  auto operator<=>(const Term&) const = default;
};

// A (possibly negated) predicate instance. Templates in skill definitions
// carry Param terms; ground literals carry only objects and wildcards.
struct Literal {
  std::string predicate;
  std::vector<Term> args;
  bool negated = false;

  bool has_params() const;
  bool has_wildcard() const;
  // No params and no wildcards.
  bool is_ground() const;

  Literal positive() const;
  Literal negation() const;

  auto operator<=>(const Literal&) const = default;
};

// Ground positive fact stored in a world state.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  auto operator<=>(const Atom&) const = default;
};

// `~on(any_object, blue_cube)`, params printed as `?slot`.
std::string to_string(const Term& term);
std::string to_string(const Literal& literal);
std::string to_string(const Atom& atom);

// Parses the answer-grammar literal form:
//   literal := ['~'] ident '(' [ term (',' term)* ] ')'
//   term    := ident | '?' ident
// `any_object` parses as the wildcard. Throws FormatError naming the
// offending token and its 1-based column within `text`.
Literal parse_literal(std::string_view text);

// Atom from a positive literal with object-only arguments; throws
// FormatError otherwise.
Atom to_atom(const Literal& literal);
Literal to_literal(const Atom& atom);

bool is_identifier(std::string_view text);

}  // namespace btx
