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

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "rulelens/dataset.hpp"
#include "rulelens/error.hpp"
#include "rulelens/linguistics.hpp"
#include "rulelens/rule.hpp"

namespace rulelens {

struct GeneratedRules {
  std::vector<Rule> rules;
  std::vector<std::string> warnings;
};

/// Enumerates every rule with 1..max_antecedents distinct non-target
/// antecedent variables crossed with every target term. Blacklisted rules are
/// dropped, then whitelist rules are appended (or, when already generated,
/// promoted to whitelist provenance).
inline GeneratedRules generate_rules(const Vocabulary& vocab, int max_antecedents,
                                     const std::vector<Rule>& blacklist = {},
                                     const std::vector<Rule>& whitelist = {}) {
  if (max_antecedents < 1) throw ValidationError("max_antecedents must be >= 1");
  GeneratedRules out;

  const std::size_t target = vocab.target_index();
  std::vector<std::size_t> features;
  for (std::size_t v = 0; v < vocab.variables().size(); ++v) {
    if (v != target) features.push_back(v);
  }
  std::size_t depth = static_cast<std::size_t>(max_antecedents);
  if (depth > features.size()) {
    out.warnings.push_back("max_antecedents " + std::to_string(max_antecedents) +
                           " exceeds the number of independent variables (" +
                           std::to_string(features.size()) + "); capped");
    depth = features.size();
  }

  const auto& tv = vocab.variable(target);
  std::set<Rule, RuleLogicLess> blocked(blacklist.begin(), blacklist.end());
  std::set<Rule, RuleLogicLess> seen;

  std::vector<std::size_t> combo;
  std::vector<std::size_t> terms;
  auto emit_terms = [&](auto&& self, std::size_t level) -> void {
    if (level == combo.size()) {
      Rule base;
      for (std::size_t a = 0; a < combo.size(); ++a) {
        const auto& lv = vocab.variable(combo[a]);
        base.antecedents.push_back({lv.name, lv.terms[terms[a]].label});
      }
      for (const auto& t : tv.terms) {
        Rule rule = base;
        rule.consequent = {tv.name, t.label};
        if (blocked.count(rule) || !seen.insert(rule).second) continue;
        out.rules.push_back(std::move(rule));
      }
      return;
    }
    const auto& lv = vocab.variable(combo[level]);
    for (std::size_t t = 0; t < lv.terms.size(); ++t) {
      terms[level] = t;
      self(self, level + 1);
    }
  };
  auto choose = [&](auto&& self, std::size_t start, std::size_t size) -> void {
    if (combo.size() == size) {
      terms.assign(size, 0);
      emit_terms(emit_terms, 0);
      return;
    }
    for (std::size_t f = start; f < features.size(); ++f) {
      combo.push_back(features[f]);
      self(self, f + 1, size);
      combo.pop_back();
    }
  };
  for (std::size_t size = 1; size <= depth; ++size) choose(choose, 0, size);

  for (const auto& w : whitelist) {
    Rule rule = w;
    rule.provenance = Provenance::whitelist;
    if (rule.whitelist_weight <= 0.0) rule.whitelist_weight = 1.0;
    auto existing = std::find(out.rules.begin(), out.rules.end(), rule);
    if (existing != out.rules.end()) {
      existing->provenance = Provenance::whitelist;
      existing->whitelist_weight = std::max(existing->whitelist_weight, rule.whitelist_weight);
      continue;
    }
    seen.insert(rule);
    out.rules.push_back(std::move(rule));
  }
  return out;
}

/// Every cell mapped to its highest-membership term index. Used only for
/// support and leverage; the fit itself works on fuzzy memberships.
class DiscretizedData {
 public:
  DiscretizedData(const Dataset& data, const Vocabulary& vocab) : n_(data.n()) {
    codes_.resize(vocab.variables().size());
    for (std::size_t v = 0; v < vocab.variables().size(); ++v) {
      const auto& lv = vocab.variable(v);
      const Column& col = data.column(lv.name);
      auto& codes = codes_[v];
      codes.resize(n_);
      if (lv.continuous()) {
        if (!col.continuous()) throw ValidationError("column '" + lv.name + "' is not continuous");
        for (std::size_t i = 0; i < n_; ++i) codes[i] = lv.discretize(col.numbers[i]);
      } else {
        std::vector<std::size_t> map(col.categories.size(), kNoTerm);
        for (std::size_t c = 0; c < col.categories.size(); ++c) {
          if (auto t = lv.find_term(col.categories[c])) map[c] = *t;
        }
        for (std::size_t i = 0; i < n_; ++i) codes[i] = map[col.codes[i]];
      }
    }
  }

  std::size_t n() const { return n_; }
  std::size_t code(std::size_t variable, std::size_t row) const { return codes_[variable][row]; }

  static constexpr std::size_t kNoTerm = static_cast<std::size_t>(-1);

 private:
  std::size_t n_;
  std::vector<std::vector<std::size_t>> codes_;
};

struct RuleScores {
  double support = 0.0;
  double leverage = 0.0;
  int antecedent_count = 0;
  double whitelist_weight = 0.0;
  double priority = 0.0;
};

struct PriorityWeights {
  double support = 1.0;
  double leverage = 1.0;
  double antecedents = 0.1;
  double whitelist = 10.0;
};

inline double priority(const RuleScores& s, const PriorityWeights& w) {
  return w.support * s.support + w.leverage * s.leverage + w.antecedents * s.antecedent_count +
         w.whitelist * s.whitelist_weight;
}

namespace detail {

struct ResolvedRule {
  std::vector<std::pair<std::size_t, std::size_t>> antecedents;  // (variable, term)
  std::pair<std::size_t, std::size_t> consequent;
};

inline ResolvedRule resolve(const Rule& rule, const Vocabulary& vocab) {
  ResolvedRule r;
  for (const auto& c : rule.antecedents) {
    const std::size_t v = vocab.index(c.variable);
    r.antecedents.emplace_back(v, vocab.variable(v).term_index(c.term));
  }
  const std::size_t v = vocab.index(rule.consequent.variable);
  r.consequent = {v, vocab.variable(v).term_index(rule.consequent.term)};
  return r;
}

struct Counts {
  std::size_t antecedent = 0;
  std::size_t consequent = 0;
  std::size_t both = 0;
};

inline Counts count(const ResolvedRule& r, const DiscretizedData& d) {
  Counts c;
  for (std::size_t i = 0; i < d.n(); ++i) {
    bool a = true;
    for (const auto& [v, t] : r.antecedents) {
      if (d.code(v, i) != t) {
        a = false;
        break;
      }
    }
    const bool b = d.code(r.consequent.first, i) == r.consequent.second;
    c.antecedent += a;
    c.consequent += b;
    c.both += a && b;
  }
  return c;
}

}  // namespace detail

/// Fraction of records where antecedent and consequent both hold on the
/// discretized data.
inline double support(const Rule& rule, const DiscretizedData& data, const Vocabulary& vocab) {
  if (data.n() == 0) return 0.0;
  const auto c = detail::count(detail::resolve(rule, vocab), data);
  return static_cast<double>(c.both) / static_cast<double>(data.n());
}

/// supp(A -> B) - supp(A) * supp(B).
inline double leverage(const Rule& rule, const DiscretizedData& data, const Vocabulary& vocab) {
  if (data.n() == 0) return 0.0;
  const auto c = detail::count(detail::resolve(rule, vocab), data);
  const double n = static_cast<double>(data.n());
  return c.both / n - (c.antecedent / n) * (c.consequent / n);
}

inline RuleScores score_rule(const Rule& rule, const DiscretizedData& data, const Vocabulary& vocab,
                             const PriorityWeights& weights = {}) {
  RuleScores s;
  const auto c = detail::count(detail::resolve(rule, vocab), data);
  const double n = static_cast<double>(data.n());
  if (n > 0) {
    s.support = c.both / n;
    s.leverage = c.both / n - (c.antecedent / n) * (c.consequent / n);
  }
  s.antecedent_count = static_cast<int>(rule.antecedents.size());
  s.whitelist_weight = rule.provenance == Provenance::whitelist ? rule.whitelist_weight : 0.0;
  s.priority = priority(s, weights);
  return s;
}

/// Indices of `scores` ordered by descending priority; ties keep input order.
inline std::vector<std::size_t> rank_by_priority(const std::vector<RuleScores>& scores) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].priority > scores[b].priority; });
  return order;
}

}  // namespace rulelens
