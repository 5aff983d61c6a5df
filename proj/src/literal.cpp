#include "btx/literal.hpp"

#include <algorithm>
#include <cctype>

#include "btx/error.hpp"

namespace btx {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Internal: return "InternalError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Evaluation: return "EvaluationError";
    case ErrorKind::InvalidTree: return "InvalidTree";
    case ErrorKind::InvalidTarget: return "InvalidTarget";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::UnboundSlot: return "UnboundSlot";
    case ErrorKind::UnitMismatch: return "UnitMismatch";
    case ErrorKind::PreconditionViolation: return "PreconditionViolation";
    case ErrorKind::Unsolvable: return "Unsolvable";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::MissingFixture: return "MissingFixture";
    case ErrorKind::DuplicateSuggestion: return "DuplicateSuggestion";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
  }
  return "Error";
}

bool Literal::has_params() const {
  return std::any_of(args.begin(), args.end(), [](const Term& t) { return t.is_param(); });
}

bool Literal::has_wildcard() const {
  return std::any_of(args.begin(), args.end(), [](const Term& t) { return t.is_wildcard(); });
}

bool Literal::is_ground() const { return !has_params() && !has_wildcard(); }

Literal Literal::positive() const {
  Literal copy = *this;
  copy.negated = false;
  return copy;
}

Literal Literal::negation() const {
  Literal copy = *this;
  copy.negated = !negated;
  return copy;
}

std::string to_string(const Term& term) {
  switch (term.kind) {
    case TermKind::Object: return term.name;
    case TermKind::Wildcard: return std::string(kWildcard);
    case TermKind::Param: return "?" + term.name;
  }
  return {};
}

std::string to_string(const Literal& literal) {
  std::string out = literal.negated ? "~" : "";
  out += literal.predicate;
  out += '(';
  for (std::size_t i = 0; i < literal.args.size(); ++i) {
    if (i > 0) out += ", ";
    out += to_string(literal.args[i]);
  }
  out += ')';
  return out;
}

std::string to_string(const Atom& atom) { return to_string(to_literal(atom)); }

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

namespace {

class LiteralLexer {
 public:
  explicit LiteralLexer(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) fail(std::string("expected ") + what);
  }

  std::string identifier(const char* what) {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      auto u = static_cast<unsigned char>(text_[pos_]);
      if (!(std::isalnum(u) || u == '_')) break;
      ++pos_;
    }
    std::string_view word = text_.substr(start, pos_ - start);
    if (!is_identifier(word)) {
      pos_ = start;
      fail(std::string("expected ") + what);
    }
    return std::string(word);
  }

  [[noreturn]] void fail(const std::string& message) {
    skip_space();
    std::string token;
    if (pos_ < text_.size()) {
      std::size_t end = pos_ + 1;
      auto is_word = [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_';
      };
      if (is_word(text_[pos_])) {
        while (end < text_.size() && is_word(text_[end])) ++end;
      }
      token = std::string(text_.substr(pos_, end - pos_));
    }
    std::string where = token.empty() ? "end of input" : "'" + token + "'";
    throw FormatError(message + " at " + where + " (column " + std::to_string(pos_ + 1) + ")",
                      token, pos_ + 1);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Literal parse_literal(std::string_view text) {
  LiteralLexer lex(text);
  Literal lit;
  lit.negated = lex.accept('~');
  lit.predicate = lex.identifier("predicate name");
  lex.expect('(', "'('");
  if (!lex.accept(')')) {
    do {
      if (lex.accept('?')) {
        lit.args.push_back(Term::param(lex.identifier("slot name after '?'")));
      } else {
        std::string name = lex.identifier("argument");
        lit.args.push_back(name == kWildcard ? Term::wildcard() : Term::object(std::move(name)));
      }
    } while (lex.accept(','));
    lex.expect(')', "',' or ')'");
  }
  if (!lex.at_end()) lex.fail("unexpected trailing text");
  return lit;
}

Atom to_atom(const Literal& literal) {
  if (literal.negated || !literal.is_ground())
    throw FormatError("'" + to_string(literal) + "' is not a ground positive fact",
                      to_string(literal), 1);
  Atom atom{literal.predicate, {}};
  for (const auto& t : literal.args) atom.args.push_back(t.name);
  return atom;
}

Literal to_literal(const Atom& atom) {
  Literal lit{atom.predicate, {}, false};
  for (const auto& a : atom.args) lit.args.push_back(Term::object(a));
  return lit;
}

}  // namespace btx
