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
#include <numeric>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rulelens/dataset.hpp"
#include "rulelens/linguistics.hpp"
#include "rulelens/rule.hpp"

namespace rulelens {

enum class RemovalReason { low_priority, duplicate, zero_variance, near_zero_lasso };

inline const char* to_string(RemovalReason r) {
  switch (r) {
    case RemovalReason::low_priority: return "low-priority";
    case RemovalReason::duplicate: return "duplicate";
    case RemovalReason::zero_variance: return "zero-variance";
    case RemovalReason::near_zero_lasso: return "near-zero-lasso";
  }
  return "unknown";
}

struct Removal {
  Rule rule;
  RemovalReason reason;
  std::string detail;
};

/// A compiled rule: f(x) = min over antecedent memberships, times the
/// consequent term's Middle-of-Maxima value.
class BasisFunction {
 public:
  BasisFunction(Rule rule, const Vocabulary& vocab) : rule_(std::move(rule)) {
    for (const auto& c : rule_.antecedents) {
      const auto& lv = vocab.variable(c.variable);
      if (vocab.index(c.variable) == vocab.target_index()) {
        throw ValidationError("rule uses the target '" + c.variable + "' as an antecedent");
      }
      Antecedent a;
      a.column = lv.name;
      a.continuous = lv.continuous();
      a.min = lv.min;
      a.max = lv.max;
      const auto t = lv.term_index(c.term);
      a.mf = lv.terms[t].mf;
      a.label = lv.terms[t].label;
      antecedents_.push_back(std::move(a));
    }
    if (rule_.consequent.variable != vocab.target()) {
      throw ValidationError("rule consequent is not on the target '" + vocab.target() + "'");
    }
    peak_ = vocab.mom_peak(rule_.consequent.variable, rule_.consequent.term);
  }

  const Rule& rule() const { return rule_; }
  double consequent_peak() const { return peak_; }

  /// Antecedent firing degree in [0, 1] for one record.
  double activation(const Dataset& data, std::size_t row) const {
    double act = 1.0;
    for (const auto& a : antecedents_) {
      const Column& col = data.column(a.column);
      double mu;
      if (a.continuous) {
        mu = a.mf(std::clamp(col.numbers[row], a.min, a.max));
      } else {
        mu = col.raw[row] == a.label ? 1.0 : 0.0;
      }
      act = std::min(act, mu);
      if (act == 0.0) break;
    }
    return act;
  }

  double operator()(const Dataset& data, std::size_t row) const { return activation(data, row) * peak_; }

 private:
  struct Antecedent {
    std::string column;
    bool continuous = true;
    double min = 0.0;
    double max = 0.0;
    TriangularMF mf;
    std::string label;
  };

  Rule rule_;
  std::vector<Antecedent> antecedents_;
  double peak_ = 0.0;
};

inline BasisFunction compile(const Rule& rule, const Vocabulary& vocab) { return BasisFunction(rule, vocab); }

/// Regression design matrix: column 0 is the intercept, column j >= 1 holds
/// the basis function of rules[j - 1].
struct DesignMatrix {
  Eigen::MatrixXd values;
  std::vector<Rule> rules;
  std::vector<Removal> removed;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

inline DesignMatrix build_design_matrix(const std::vector<Rule>& rules, const Dataset& data,
                                        const Vocabulary& vocab) {
  const auto n = static_cast<Eigen::Index>(data.n());
  DesignMatrix dm;
  dm.values.resize(n, static_cast<Eigen::Index>(rules.size()) + 1);
  dm.values.col(0).setOnes();
  for (std::size_t j = 0; j < rules.size(); ++j) {
    const BasisFunction f(rules[j], vocab);
    auto col = dm.values.col(static_cast<Eigen::Index>(j) + 1);
    for (Eigen::Index i = 0; i < n; ++i) col(i) = f(data, static_cast<std::size_t>(i));
  }
  dm.rules = rules;
  return dm;
}

/// Keeps a copy of `dm` restricted to the given rule columns (0-based rule
/// indices, intercept always kept).
inline DesignMatrix select_rule_columns(const DesignMatrix& dm, const std::vector<std::size_t>& keep) {
  DesignMatrix out;
  out.values.resize(dm.values.rows(), static_cast<Eigen::Index>(keep.size()) + 1);
  out.values.col(0) = dm.values.col(0);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.values.col(static_cast<Eigen::Index>(k) + 1) = dm.values.col(static_cast<Eigen::Index>(keep[k]) + 1);
    out.rules.push_back(dm.rules[keep[k]]);
  }
  out.removed = dm.removed;
  return out;
}

/// Which rule columns survive deduplication, and the survivor each removed
/// column duplicates. Indices are 0-based rule indices.
struct DedupePlan {
  std::vector<std::size_t> kept;                               // ascending
  std::vector<std::pair<std::size_t, std::size_t>> duplicates;  // (removed, survivor), priority order
};

/// Rule columns equal to a higher-priority column to within `tol` (max
/// absolute difference) are removed. Ties in priority go to the earlier column.
inline DedupePlan plan_dedupe(const Eigen::MatrixXd& values, const std::vector<double>& priorities,
                              double tol = 1e-9) {
  const std::size_t m = static_cast<std::size_t>(values.cols()) - 1;
  if (priorities.size() != m) throw ValidationError("dedupe: one priority per rule column required");
  if (!(tol > 0.0)) throw ValidationError("dedupe tolerance must be > 0");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return priorities[a] > priorities[b]; });

  // Columns equal within tol have sums within n * tol, so only a window of
  // survivors sorted by sum needs comparing.
  const double n = static_cast<double>(values.rows());
  std::vector<double> sums(m);
  for (std::size_t j = 0; j < m; ++j) sums[j] = values.col(static_cast<Eigen::Index>(j) + 1).sum();
  const double slack = n * tol + 1e-12;

  DedupePlan plan;
  std::vector<std::size_t> survivors;  // sorted by column sum
  std::vector<bool> keep(m, true);
  for (std::size_t j : order) {
    const double s = sums[j];
    auto lo = std::lower_bound(survivors.begin(), survivors.end(), s - slack,
                               [&](std::size_t idx, double v) { return sums[idx] < v; });
    std::optional<std::size_t> twin;
    for (auto it = lo; it != survivors.end() && sums[*it] <= s + slack; ++it) {
      const auto a = values.col(static_cast<Eigen::Index>(j) + 1);
      const auto b = values.col(static_cast<Eigen::Index>(*it) + 1);
      if ((a - b).cwiseAbs().maxCoeff() <= tol) {
        twin = *it;
        break;
      }
    }
    if (twin) {
      keep[j] = false;
      plan.duplicates.emplace_back(j, *twin);
    } else {
      auto pos = std::upper_bound(survivors.begin(), survivors.end(), s,
                                  [&](double v, std::size_t idx) { return v < sums[idx]; });
      survivors.insert(pos, j);
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (keep[j]) plan.kept.push_back(j);
  }
  return plan;
}

/// Applies plan_dedupe, recording removed rules as "duplicate-of <survivor>".
inline DesignMatrix dedupe_columns(const DesignMatrix& dm, const std::vector<double>& priorities,
                                   double tol = 1e-9) {
  if (priorities.size() != dm.rules.size()) {
    throw ValidationError("dedupe: one priority per rule column required");
  }
  const DedupePlan plan = plan_dedupe(dm.values, priorities, tol);
  DesignMatrix out = select_rule_columns(dm, plan.kept);
  for (const auto& [removed, survivor] : plan.duplicates) {
    out.removed.push_back({dm.rules[removed], RemovalReason::duplicate,
                           "duplicate-of " + format_rule(dm.rules[survivor])});
  }
  return out;
}

}  // namespace rulelens
