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

#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rulelens/dataset.hpp"
#include "rulelens/debias.hpp"
#include "rulelens/error.hpp"
#include "rulelens/inference.hpp"
#include "rulelens/lasso.hpp"
#include "rulelens/linguistics.hpp"
#include "rulelens/rule.hpp"
#include "rulelens/rulegen.hpp"

namespace rulelens {

struct Metrics {
  std::optional<double> mape;  // percent; undefined when some y_i == 0
  double rmse = 0.0;
  std::optional<double> r2;    // undefined for a constant response
};

/// Goodness of fit of r(x) = M beta against y.
inline Metrics metrics(const Eigen::MatrixXd& design, const Eigen::VectorXd& beta, const Eigen::VectorXd& y) {
  const Eigen::VectorXd pred = design * beta;
  const Eigen::VectorXd err = pred - y;
  const double n = static_cast<double>(y.size());
  Metrics m;
  m.rmse = std::sqrt(err.squaredNorm() / n);
  if ((y.array() != 0.0).all()) m.mape = 100.0 / n * (err.array().abs() / y.array().abs()).sum();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (ss_tot > 0.0) m.r2 = 1.0 - err.squaredNorm() / ss_tot;
  return m;
}

struct PipelineConfig {
  std::string target;
  int k_continuous = 3;
  int k_target = 3;
  int max_antecedents = 2;
  double lambda = 0.1;
  int max_iter = 1000;
  double lasso_tol = 1e-7;
  bool standardize = true;
  double alpha = 0.05;
  Correction correction = Correction::bonferroni;
  PriorityWeights weights;
  std::optional<double> priority_threshold;  // unset: no priority-based dropping
  double dedupe_tol = 1e-9;
  double near_zero = 1e-8;
  std::vector<std::string> whitelist;
  std::vector<std::string> blacklist;
  bool hide_insignificant = false;

  void validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    if (target.empty()) fail("target is required");
    if (k_continuous < kMinTerms || k_continuous > kMaxTerms) fail("k_continuous must be between 3 and 7");
    if (k_target < kMinTerms || k_target > kMaxTerms) fail("k_target must be between 3 and 7");
    if (max_antecedents < 1) fail("max_antecedents must be >= 1");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be ≥ 0");
    if (max_iter < 1) fail("max_iter must be >= 1");
    if (!(lasso_tol > 0.0)) fail("lasso tolerance must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must be in (0, 1)");
    for (double w : {weights.support, weights.leverage, weights.antecedents, weights.whitelist}) {
      if (!(w >= 0.0) || !std::isfinite(w)) fail("priority weights must be finite and ≥ 0");
    }
    if (priority_threshold && !std::isfinite(*priority_threshold)) fail("priority threshold must be finite");
    if (!(dedupe_tol > 0.0)) fail("dedupe_tol must be > 0");
    if (!(near_zero > 0.0)) fail("near_zero must be > 0");
  }
};

enum class RuleStatus { significant, not_significant, removed };

inline const char* to_string(RuleStatus s) {
  switch (s) {
    case RuleStatus::significant: return "significant";
    case RuleStatus::not_significant: return "not_significant";
    case RuleStatus::removed: return "removed";
  }
  return "unknown";
}

struct RuleResult {
  Rule rule;
  std::string text;
  RuleScores scores;
  int consequent_ordinal = 0;  // index of the consequent term on the target scale
  RuleStatus status = RuleStatus::removed;
  std::optional<RemovalReason> removal_reason;
  std::string removal_detail;
  // Only meaningful for surviving rules.
  double beta = 0.0;
  double beta_debiased = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p = 1.0;

  bool surviving() const { return status != RuleStatus::removed; }
};

struct FitReport {
  PipelineConfig config;
  Vocabulary vocabulary;
  std::size_t n = 0;
  double intercept = 0.0;
  std::vector<RuleResult> rules;  // every generated rule, in priority order
  Metrics fit_metrics;
  double adjusted_alpha = 0.0;
  std::size_t tested = 0;
  double sigma = 0.0;
  double nodewise_lambda = 0.0;
  int lasso_iterations = 0;
  bool lasso_converged = false;
  std::vector<std::string> warnings;

  std::vector<const RuleResult*> surviving() const {
    std::vector<const RuleResult*> out;
    for (const auto& r : rules) {
      if (r.surviving()) out.push_back(&r);
    }
    return out;
  }

  const RuleResult* find(const std::string& text) const {
    for (const auto& r : rules) {
      if (r.text == text) return &r;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(name, ErrorKind::internal, e.what());
  }
}

}  // namespace detail

/// Runs vocabulary -> rule generation -> scoring -> design matrix ->
/// deduplication -> LASSO -> near-zero filter -> debiased tests -> metrics.
inline FitReport fit_pipeline(const Dataset& input, const PipelineConfig& config) {
  detail::stage("config", [&] {
    config.validate();
    return 0;
  });

  const Dataset data = detail::stage("dataset", [&] {
    const Dataset typed = input.typed() ? input : infer_kinds(input);
    return typed.with_target(config.target);
  });
  const std::size_t n = data.n();
  if (n < 2) throw StageError("dataset", ErrorKind::validation, "need at least 2 records");

  FitReport report;
  report.config = config;
  report.n = n;
  report.vocabulary = detail::stage("vocabulary", [&] {
    return build_vocabulary(data, config.k_continuous, config.k_target);
  });
  const Vocabulary& vocab = report.vocabulary;

  auto generated = detail::stage("rules", [&] {
    std::vector<Rule> white;
    std::vector<Rule> black;
    for (const auto& text : config.whitelist) white.push_back(parse_rule(text, vocab));
    for (const auto& text : config.blacklist) black.push_back(parse_rule(text, vocab));
    return generate_rules(vocab, config.max_antecedents, black, white);
  });
  report.warnings = generated.warnings;

  // Score and sort by priority; optionally drop low-priority rules.
  const auto& target_var = vocab.variable(vocab.target_index());
  std::vector<RuleResult> results;
  detail::stage("scoring", [&] {
    const DiscretizedData discrete(data, vocab);
    std::vector<RuleScores> scores;
    scores.reserve(generated.rules.size());
    for (const auto& rule : generated.rules) scores.push_back(score_rule(rule, discrete, vocab, config.weights));
    for (std::size_t idx : rank_by_priority(scores)) {
      RuleResult r;
      r.rule = generated.rules[idx];
      r.text = format_rule(r.rule, &vocab);
      r.scores = scores[idx];
      r.consequent_ordinal = static_cast<int>(target_var.term_index(r.rule.consequent.term));
      results.push_back(std::move(r));
    }
    return 0;
  });

  std::vector<std::size_t> candidates;  // indices into results
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (config.priority_threshold && results[i].scores.priority < *config.priority_threshold) {
      results[i].removal_reason = RemovalReason::low_priority;
      results[i].removal_detail = "priority below threshold";
    } else {
      candidates.push_back(i);
    }
  }

  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.column(config.target).numbers.data(),
                                                              static_cast<Eigen::Index>(n));

  // Design matrix and duplicate-column removal.
  std::vector<std::size_t> columns;  // results index of each design column >= 1
  Eigen::MatrixXd design = detail::stage("design", [&] {
    std::vector<Rule> rules;
    std::vector<double> priorities;
    for (std::size_t i : candidates) {
      rules.push_back(results[i].rule);
      priorities.push_back(results[i].scores.priority);
    }
    const DesignMatrix full = build_design_matrix(rules, data, vocab);
    const DedupePlan plan = plan_dedupe(full.values, priorities, config.dedupe_tol);
    for (std::size_t c : plan.kept) columns.push_back(candidates[c]);
    for (const auto& [removed, survivor] : plan.duplicates) {
      auto& r = results[candidates[removed]];
      r.removal_reason = RemovalReason::duplicate;
      r.removal_detail = "duplicate-of " + results[candidates[survivor]].text;
    }
    return select_rule_columns(full, plan.kept).values;
  });

  // LASSO.
  const LassoFit lasso = detail::stage("lasso", [&] {
    LassoConfig lc;
    lc.lambda = config.lambda;
    lc.max_iter = config.max_iter;
    lc.tol = config.lasso_tol;
    lc.near_zero = config.near_zero;
    lc.standardize = config.standardize;
    return lasso_fit(design, y, lc);
  });
  report.lasso_iterations = lasso.iterations;
  report.lasso_converged = lasso.converged;
  if (!lasso.converged) {
    report.warnings.push_back("LASSO stopped after " + std::to_string(lasso.iterations) +
                              " sweeps without reaching tolerance");
  }
  std::vector<bool> constant(design.cols(), false);
  for (std::size_t j : lasso.zero_variance) {
    constant[j] = true;
    auto& r = results[columns[j - 1]];
    r.removal_reason = RemovalReason::zero_variance;
    r.removal_detail = "basis function is constant over all records";
  }

  // Near-zero filter.
  std::vector<std::size_t> keep;  // design columns >= 1
  for (std::size_t j : near_zero_survivors(lasso.beta, config.near_zero)) {
    if (!constant[j]) keep.push_back(j);
  }
  {
    std::vector<bool> kept(design.cols(), false);
    for (std::size_t j : keep) kept[j] = true;
    for (Eigen::Index j = 1; j < design.cols(); ++j) {
      if (!kept[j] && !constant[j]) {
        auto& r = results[columns[j - 1]];
        r.removal_reason = RemovalReason::near_zero_lasso;
        r.removal_detail = "|beta| below " + detail::format_g(config.near_zero);
      }
    }
  }

  Eigen::MatrixXd reduced(n, static_cast<Eigen::Index>(keep.size()) + 1);
  Eigen::VectorXd beta(static_cast<Eigen::Index>(keep.size()) + 1);
  reduced.col(0) = design.col(0);
  beta(0) = lasso.beta(0);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    reduced.col(static_cast<Eigen::Index>(k) + 1) = design.col(static_cast<Eigen::Index>(keep[k]));
    beta(static_cast<Eigen::Index>(k) + 1) = lasso.beta(static_cast<Eigen::Index>(keep[k]));
  }
  report.intercept = beta(0);

  // Significance of the surviving rules.
  if (!keep.empty()) {
    const SignificanceResult sig = detail::stage("significance", [&] {
      DebiasConfig dc;
      dc.alpha = config.alpha;
      dc.correction = config.correction;
      return debias_and_test(reduced, y, beta, dc);
    });
    report.adjusted_alpha = sig.adjusted_alpha;
    report.tested = keep.size();
    report.sigma = sig.sigma;
    report.nodewise_lambda = sig.nodewise_lambda;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      auto& r = results[columns[keep[k] - 1]];
      const auto& t = sig.tests[k];
      r.beta = beta(static_cast<Eigen::Index>(k) + 1);
      r.beta_debiased = t.beta_debiased;
      r.std_error = t.std_error;
      r.z = t.z;
      r.p = t.p;
      r.status = t.significant ? RuleStatus::significant : RuleStatus::not_significant;
    }
  } else {
    report.adjusted_alpha = config.alpha;
  }

  report.fit_metrics = detail::stage("metrics", [&] { return metrics(reduced, beta, y); });
  if (!report.fit_metrics.mape) report.warnings.push_back("MAPE undefined: the target contains zeros");

  for (const auto& r : results) {
    if (r.removal_reason) {
      report.warnings.push_back("removed '" + r.text + "' (" + to_string(*r.removal_reason) +
                                (r.removal_detail.empty() ? "" : ": " + r.removal_detail) + ")");
    }
  }
  report.rules = std::move(results);
  return report;
}

}  // namespace rulelens
