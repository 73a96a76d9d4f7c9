// Copyright 2026 The RuleLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fuzzy if-then rules and their text grammar:
//
//   rule   := "IF" clause ("AND" clause)* "THEN" clause
//   clause := ident "IS" term
//
// Keywords are case-insensitive. Identifiers and terms are bare tokens or
// double-quoted strings (with \" and \\ escapes). Spaces inside a bare term
// are written as underscores, e.g. very_low.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rulelens/error.hpp"
#include "rulelens/linguistics.hpp"

namespace rulelens {

struct Clause {
  std::string variable;
  std::string term;

  auto operator<=>(const Clause&) const = default;
};

enum class Provenance { automatic, whitelist };

inline const char* to_string(Provenance p) { return p == Provenance::automatic ? "auto" : "whitelist"; }

/// Conjunctive antecedents (sorted by variable order in the vocabulary) and a
/// consequent on the target. Equality compares the logic only; provenance and
/// whitelist weight are metadata.
struct Rule {
  std::vector<Clause> antecedents;
  Clause consequent;
  Provenance provenance = Provenance::automatic;
  double whitelist_weight = 0.0;

  bool operator==(const Rule& other) const {
    return antecedents == other.antecedents && consequent == other.consequent;
  }
};

/// Strict weak order on rule logic, for sets and deterministic sorting.
struct RuleLogicLess {
  bool operator()(const Rule& a, const Rule& b) const {
    if (a.antecedents != b.antecedents) return a.antecedents < b.antecedents;
    return a.consequent < b.consequent;
  }
};

class RuleParseError : public ValidationError {
 public:
  RuleParseError(std::size_t column, const std::string& message)
      : ValidationError("rule: at column " + std::to_string(column) + ": " + message), column_(column) {}

  /// 1-based character column of the offending token.
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

namespace detail {

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline bool is_keyword(std::string_view word) {
  const auto u = upper(word);
  return u == "IF" || u == "AND" || u == "THEN" || u == "IS";
}

struct Token {
  enum Kind { word, quoted, end } kind = end;
  std::string text;
  std::size_t column = 0;

  bool keyword(std::string_view kw) const { return kind == word && upper(text) == kw; }
};

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token tok;
    tok.column = i + 1;
    if (c == '"') {
      tok.kind = Token::quoted;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        const char d = text[i];
        if (d == '\\' && i + 1 < text.size() && (text[i + 1] == '"' || text[i + 1] == '\\')) {
          tok.text.push_back(text[i + 1]);
          i += 2;
        } else if (d == '"') {
          closed = true;
          ++i;
          break;
        } else {
          tok.text.push_back(d);
          ++i;
        }
      }
      if (!closed) throw RuleParseError(tok.column, "unterminated quoted string");
    } else {
      tok.kind = Token::word;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '"') {
        tok.text.push_back(text[i]);
        ++i;
      }
    }
    tokens.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::end;
  end.column = text.size() + 1;
  tokens.push_back(end);
  return tokens;
}

inline std::string describe(const Token& tok) {
  if (tok.kind == Token::end) return "end of rule";
  return "'" + tok.text + "'";
}

inline bool bare_safe(std::string_view s) {
  if (s.empty() || is_keyword(s)) return false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '"') return false;
  }
  return true;
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string spaces_to_underscores(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

}  // namespace detail

/// Parses one rule against the vocabulary. Antecedents come back sorted in
/// vocabulary column order.
inline Rule parse_rule(std::string_view text, const Vocabulary& vocab) {
  using detail::Token;
  const auto tokens = detail::tokenize(text);
  std::size_t pos = 0;

  auto expect_keyword = [&](std::string_view kw) {
    const Token& tok = tokens[pos];
    if (!tok.keyword(kw)) {
      throw RuleParseError(tok.column, "expected '" + std::string(kw) + "', found " + detail::describe(tok));
    }
    ++pos;
  };

  struct Parsed {
    std::size_t var;
    std::size_t term;
    std::size_t column;
  };

  auto clause = [&]() -> Parsed {
    const Token& ident = tokens[pos];
    if (ident.kind == Token::end || (ident.kind == Token::word && detail::is_keyword(ident.text))) {
      throw RuleParseError(ident.column, "expected a column name, found " + detail::describe(ident));
    }
    auto var = vocab.find(ident.text);
    if (!var) throw RuleParseError(ident.column, "unknown column '" + ident.text + "'");
    ++pos;
    expect_keyword("IS");
    const Token& term = tokens[pos];
    if (term.kind == Token::end || (term.kind == Token::word && detail::is_keyword(term.text))) {
      throw RuleParseError(term.column, "expected a term, found " + detail::describe(term));
    }
    const auto& lv = vocab.variable(*var);
    auto t = lv.find_term(term.text);
    if (!t && term.kind == Token::word) {
      std::string spaced = term.text;
      std::replace(spaced.begin(), spaced.end(), '_', ' ');
      t = lv.find_term(spaced);
    }
    if (!t) {
      throw RuleParseError(term.column, "unknown term '" + term.text + "' for column '" + lv.name + "'");
    }
    ++pos;
    return {*var, *t, ident.column};
  };

  expect_keyword("IF");
  std::vector<Parsed> antecedents;
  antecedents.push_back(clause());
  while (tokens[pos].keyword("AND")) {
    ++pos;
    antecedents.push_back(clause());
  }
  expect_keyword("THEN");
  const Parsed consequent = clause();
  if (tokens[pos].kind != Token::end) {
    throw RuleParseError(tokens[pos].column, "unexpected " + detail::describe(tokens[pos]) + " after consequent");
  }

  const std::size_t target = vocab.target_index();
  if (consequent.var != target) {
    throw RuleParseError(consequent.column, "consequent must be on the target column '" + vocab.target() + "'");
  }
  for (std::size_t a = 0; a < antecedents.size(); ++a) {
    if (antecedents[a].var == target) {
      throw RuleParseError(antecedents[a].column, "the target column cannot appear in the antecedent");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (antecedents[a].var == antecedents[b].var) {
        throw RuleParseError(antecedents[a].column,
                             "duplicate antecedent variable '" + vocab.variable(antecedents[a].var).name + "'");
      }
    }
  }
  std::sort(antecedents.begin(), antecedents.end(),
            [](const Parsed& a, const Parsed& b) { return a.var < b.var; });

  Rule rule;
  for (const auto& p : antecedents) {
    const auto& lv = vocab.variable(p.var);
    rule.antecedents.push_back({lv.name, lv.terms[p.term].label});
  }
  const auto& tv = vocab.variable(consequent.var);
  rule.consequent = {tv.name, tv.terms[consequent.term].label};
  return rule;
}

/// Canonical text of a rule. Uses underscores for multi-word terms unless that
/// would collide with another label of the same variable.
inline std::string format_rule(const Rule& rule, const Vocabulary* vocab = nullptr) {
  auto ident = [](const std::string& name) { return detail::bare_safe(name) ? name : detail::quote(name); };
  auto term = [&](const Clause& c) {
    // A bare token always resolves to an exact label first.
    if (detail::bare_safe(c.term)) return c.term;
    const std::string under = detail::spaces_to_underscores(c.term);
    const bool spaces_only = c.term.find_first_of("\t\n\r\"_") == std::string::npos;
    bool collides = false;
    if (vocab != nullptr && vocab->find(c.variable)) {
      collides = vocab->variable(c.variable).find_term(under).has_value();
    }
    if (spaces_only && !collides && detail::bare_safe(under)) return under;
    return detail::quote(c.term);
  };

  std::string out = "IF ";
  for (std::size_t a = 0; a < rule.antecedents.size(); ++a) {
    if (a) out += " AND ";
    out += ident(rule.antecedents[a].variable) + " IS " + term(rule.antecedents[a]);
  }
  out += " THEN " + ident(rule.consequent.variable) + " IS " + term(rule.consequent);
  return out;
}

/// Parses a whitelist/blacklist file: one rule per line, '#' comments and
/// blank lines ignored. Errors name the 1-based line.
inline std::vector<Rule> parse_rule_list(std::string_view text, const Vocabulary& vocab) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') {
      try {
        rules.push_back(parse_rule(line, vocab));
      } catch (const ValidationError& e) {
        throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
  return rules;
}

}  // namespace rulelens
