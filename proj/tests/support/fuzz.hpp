#pragma once

#include <random>
#include <string>
#include <vector>

#include "btx/domain.hpp"

namespace fuzz {

inline const std::vector<std::string> kTokens{
    "ANSWER:", "REASONING:", "answer:", "~", "(", ")", ",", "&", "?", " ", "\n", "\t", "any_object",
    "on", "grasped", "blue_cube", "table", "5.3", "N", "m/s", "-", "&&", "::", "\"", "ANSWER", ":", "\r\n",
    "\xc3\xa9", "\xff", "0", "1e309", "banana", "open", "((", "))", "~~", ",,", "ANSWER: ", "REASONING: x"};

// Random literal over the domain's visible predicates and objects.
inline btx::Literal random_literal(std::mt19937& rng, const btx::Domain& d, bool allow_wildcard = true) {
  auto cat = d.catalog();
  const auto* p = cat[rng() % cat.size()];
  btx::Literal l{p->name, {}, rng() % 2 == 0};
  for (std::size_t i = 0; i < p->arity; ++i) {
    if (allow_wildcard && rng() % 4 == 0)
      l.args.push_back(btx::Term::wildcard());
    else
      l.args.push_back(btx::Term::object(d.objects[rng() % d.objects.size()].name));
  }
  return l;
}

// A mix of token soup, byte noise and mutated well-formed answers.
inline std::string random_response(std::mt19937& rng, const btx::Domain& d) {
  std::string out;
  switch (rng() % 3) {
    case 0: {
      std::size_t n = rng() % 12;
      for (std::size_t i = 0; i < n; ++i) out += kTokens[rng() % kTokens.size()];
      break;
    }
    case 1: {
      std::size_t n = rng() % 40;
      for (std::size_t i = 0; i < n; ++i) out += static_cast<char>(rng() % 256);
      break;
    }
    default: {
      out = "ANSWER: ";
      std::size_t n = 1 + rng() % 3;
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out += " & ";
        out += btx::to_string(random_literal(rng, d));
      }
      std::size_t edits = rng() % 4;
      for (std::size_t i = 0; i < edits && !out.empty(); ++i) {
        std::size_t pos = rng() % out.size();
        switch (rng() % 3) {
          case 0: out.erase(pos, 1); break;
          case 1: out.insert(pos, kTokens[rng() % kTokens.size()]); break;
          default: out[pos] = static_cast<char>(rng() % 128); break;
        }
      }
      if (rng() % 2 == 0) out += "\nREASONING: because";
    }
  }
  return out;
}

}  // namespace fuzz
