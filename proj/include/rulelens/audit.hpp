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
#include <cmath>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "rulelens/dataset.hpp"
#include "rulelens/error.hpp"
#include "rulelens/fitting.hpp"
#include "rulelens/inference.hpp"
#include "rulelens/rule.hpp"

namespace rulelens {

/// Relative contribution of each model term to the output on each record.
struct RhoMatrix {
  Eigen::MatrixXd values;                 // n x columns of the design
  std::vector<std::size_t> degenerate;    // rows where no term contributes
  bool includes_intercept = true;
};

/// rho(i, j) = |beta_j f_j(x_i)| / sum_k |beta_k f_k(x_i)|. Column 0 of
/// `design` is the intercept; with include_intercept = false it is left out of
/// both the sum and the output (its column is then all zeros).
inline RhoMatrix rho_matrix(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta,
                            bool include_intercept = true) {
  if (beta.size() != design.cols()) throw ValidationError("coefficient vector does not match the design");
  RhoMatrix out;
  out.includes_intercept = include_intercept;
  out.values = (design.array().rowwise() * beta.transpose().array()).abs();
  if (!include_intercept && out.values.cols() > 0) out.values.col(0).setZero();
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    const double total = out.values.row(i).sum();
    if (total > 0.0) {
      out.values.row(i) /= total;
    } else {
      out.values.row(i).setZero();
      out.degenerate.push_back(static_cast<std::size_t>(i));
    }
  }
  return out;
}

struct TraceEntry {
  std::size_t record_index = 0;
  double rho = 0.0;
  std::vector<std::string> record;  // raw cell values
};

/// Records ordered by rho descending, ties by ascending index, cut to top_k.
inline std::vector<std::size_t> top_records(const Eigen::Ref<const Eigen::VectorXd>& rho, std::size_t top_k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(rho.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::size_t k = std::min(top_k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ra = rho(static_cast<Eigen::Index>(a));
                      const double rb = rho(static_cast<Eigen::Index>(b));
                      return ra != rb ? ra > rb : a < b;
                    });
  idx.resize(k);
  return idx;
}

/// The fitted model's surviving terms re-evaluated on `data`.
struct FittedModel {
  Eigen::MatrixXd design;  // intercept + one column per surviving rule
  Eigen::VectorXd beta;
  std::vector<const RuleResult*> rules;
};

inline FittedModel fitted_model(const FitReport& report, const Dataset& data) {
  const Dataset typed = data.typed() ? data : infer_kinds(data);
  FittedModel m;
  m.rules = report.surviving();
  std::vector<Rule> rules;
  for (const auto* r : m.rules) rules.push_back(r->rule);
  m.design = build_design_matrix(rules, typed, report.vocabulary).values;
  m.beta.resize(static_cast<Eigen::Index>(rules.size()) + 1);
  m.beta(0) = report.intercept;
  for (std::size_t j = 0; j < rules.size(); ++j) m.beta(static_cast<Eigen::Index>(j) + 1) = m.rules[j]->beta;
  return m;
}

/// The top_k records that most depend on the surviving rule `rule_text`.
inline std::vector<TraceEntry> trace_rule(const FitReport& report, const std::string& rule_text,
                                          const Dataset& data, std::size_t top_k = 10,
                                          bool include_intercept = true) {
  const FittedModel m = fitted_model(report, data);
  std::size_t column = 0;
  for (std::size_t j = 0; j < m.rules.size(); ++j) {
    if (m.rules[j]->text == rule_text) column = j + 1;
  }
  if (column == 0) {
    const RuleResult* r = report.find(rule_text);
    if (r != nullptr) throw ValidationError("rule '" + rule_text + "' did not survive the fit");
    throw ValidationError("unknown rule '" + rule_text + "'");
  }
  const RhoMatrix rho = rho_matrix(m.design, m.beta, include_intercept);
  std::vector<TraceEntry> out;
  for (std::size_t i : top_records(rho.values.col(static_cast<Eigen::Index>(column)), top_k)) {
    out.push_back({i, rho.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(column)), data.record(i)});
  }
  return out;
}

enum class InconsistencyKind { conflicting, specializing };

inline const char* to_string(InconsistencyKind k) {
  return k == InconsistencyKind::conflicting ? "conflicting" : "specializing";
}

/// For specializing pairs rule_a is the general rule and rule_b the specific one.
struct Inconsistency {
  InconsistencyKind kind;
  std::string rule_a;
  std::string rule_b;
  std::string detail;
};

struct AuditRule {
  Rule rule;
  std::string text;
  double beta = 0.0;
  double p = 1.0;
};

struct ConsistencyFilter {
  double beta_threshold = 0.0;
  double alpha = 0.05;
  bool require_significant = false;
};

namespace detail {

inline bool strict_subset(const std::vector<Clause>& a, const std::vector<Clause>& b) {
  if (a.size() >= b.size()) return false;
  std::vector<Clause> sa = a;
  std::vector<Clause> sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return std::includes(sb.begin(), sb.end(), sa.begin(), sa.end());
}

inline bool same_antecedents(const std::vector<Clause>& a, const std::vector<Clause>& b) {
  if (a.size() != b.size()) return false;
  std::vector<Clause> sa = a;
  std::vector<Clause> sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

}  // namespace detail

inline std::vector<Inconsistency> find_inconsistencies(const std::vector<AuditRule>& rules,
                                                       const ConsistencyFilter& filter = {}) {
  std::vector<const AuditRule*> considered;
  for (const auto& r : rules) {
    if (!(std::abs(r.beta) > filter.beta_threshold)) continue;
    if (filter.require_significant && !(r.p < filter.alpha)) continue;
    considered.push_back(&r);
  }
  std::sort(considered.begin(), considered.end(),
            [](const AuditRule* a, const AuditRule* b) { return a->text < b->text; });

  std::vector<Inconsistency> out;
  for (std::size_t i = 0; i < considered.size(); ++i) {
    for (std::size_t j = i + 1; j < considered.size(); ++j) {
      const AuditRule& a = *considered[i];
      const AuditRule& b = *considered[j];
      if (a.rule.consequent == b.rule.consequent) continue;
      const std::string consequents = a.rule.consequent.term + " vs " + b.rule.consequent.term;
      if (detail::same_antecedents(a.rule.antecedents, b.rule.antecedents)) {
        out.push_back({InconsistencyKind::conflicting, a.text, b.text,
                       "identical antecedents, consequents " + consequents});
      } else if (detail::strict_subset(a.rule.antecedents, b.rule.antecedents)) {
        out.push_back({InconsistencyKind::specializing, a.text, b.text,
                       "more specific rule changes the consequent: " + consequents});
      } else if (detail::strict_subset(b.rule.antecedents, a.rule.antecedents)) {
        out.push_back({InconsistencyKind::specializing, b.text, a.text,
                       "more specific rule changes the consequent: " + b.rule.consequent.term + " vs " +
                           a.rule.consequent.term});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Inconsistency& x, const Inconsistency& y) {
    return std::tie(x.rule_a, x.rule_b, x.kind) < std::tie(y.rule_a, y.rule_b, y.kind);
  });
  return out;
}

/// Surviving rules of a fit, as input for find_inconsistencies.
inline std::vector<AuditRule> audit_rules(const FitReport& report) {
  std::vector<AuditRule> out;
  for (const auto* r : report.surviving()) out.push_back({r->rule, r->text, r->beta, r->p});
  return out;
}

}  // namespace rulelens
