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

// Desparsified LASSO: per-coefficient Gaussian tests built from an
// approximate inverse of the Gram matrix obtained by nodewise LASSO.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rulelens/error.hpp"
#include "rulelens/lasso.hpp"

namespace rulelens {

enum class Correction { none, bonferroni };

inline const char* to_string(Correction c) { return c == Correction::none ? "none" : "bonferroni"; }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Two-sided p-value of a standard-normal statistic.
inline double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

struct DebiasConfig {
  double alpha = 0.05;
  Correction correction = Correction::bonferroni;
  double nodewise_c = 0.5;  // nodewise penalty = c * sqrt(log p / n)
  int max_iter = 1000;
  double tol = 1e-7;
};

struct CoefficientTest {
  double beta_debiased = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p = 1.0;
  bool significant = false;
};

struct SignificanceResult {
  std::vector<CoefficientTest> tests;  // one per rule column, design column j + 1
  double alpha = 0.05;
  Correction correction = Correction::bonferroni;
  double adjusted_alpha = 0.05;
  double sigma = 0.0;
  double nodewise_lambda = 0.0;
};

namespace detail {

/// Row j of the relaxed inverse, stored sparsely, plus (Theta Sigma Theta')_jj.
struct NodewiseRow {
  std::vector<std::pair<Eigen::Index, double>> theta;
  double omega = 0.0;
};

/// Lasso of column j on the others, solved on the Gram matrix with
/// active-set cycling.
inline NodewiseRow nodewise_row(const Eigen::MatrixXd& gram, Eigen::Index j, double lambda, int max_iter,
                                double tol) {
  const Eigen::Index p = gram.rows();
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd c = gram.col(j);  // c = Sigma (e_j - gamma)
  std::vector<Eigen::Index> active;

  auto update = [&](Eigen::Index k) {
    const double old = gamma(k);
    const double z = c(k) + gram(k, k) * old;
    const double updated = soft_threshold(z, lambda) / gram(k, k);
    const double delta = updated - old;
    if (delta != 0.0) {
      c.noalias() -= delta * gram.col(k);
      gamma(k) = updated;
    }
    return std::abs(delta);
  };

  int sweeps = 0;
  while (sweeps < max_iter) {
    double max_delta = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (k != j) max_delta = std::max(max_delta, update(k));
    }
    ++sweeps;
    if (max_delta < tol) break;
    active.clear();
    for (Eigen::Index k = 0; k < p; ++k) {
      if (gamma(k) != 0.0) active.push_back(k);
    }
    while (sweeps < max_iter) {
      double inner = 0.0;
      for (Eigen::Index k : active) inner = std::max(inner, update(k));
      ++sweeps;
      if (inner < tol) break;
    }
  }

  double penalty = 0.0;
  double cross = 0.0;
  for (Eigen::Index k = 0; k < p; ++k) {
    if (k != j && gamma(k) != 0.0) {
      penalty += std::abs(gamma(k));
      cross += gamma(k) * c(k);
    }
  }
  // ||x_j - X_{-j} gamma||^2 / n = (e_j - gamma)' Sigma (e_j - gamma)
  const double resid = c(j) - cross;
  const double tau2 = resid + lambda * penalty;

  NodewiseRow row;
  row.theta.emplace_back(j, 1.0 / tau2);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (k != j && gamma(k) != 0.0) row.theta.emplace_back(k, -gamma(k) / tau2);
  }
  // Sigma theta_j = c / tau2, so theta' Sigma theta = theta . c / tau2.
  double omega = 0.0;
  for (const auto& [k, v] : row.theta) omega += v * c(k);
  row.omega = omega / tau2;
  return row;
}

}  // namespace detail

/// Tests every non-intercept column of `design` given a LASSO fit `beta`.
inline SignificanceResult debias_and_test(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& beta, const DebiasConfig& config = {}) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols() - 1;
  if (p < 1) throw ValidationError("significance test needs at least one rule column");
  if (beta.size() != design.cols()) throw ValidationError("coefficient vector does not match the design");
  if (y.size() != n) throw ValidationError("response length does not match the design matrix");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ValidationError("alpha must be in (0, 1)");
  detail::require_finite(design, y);
  const double dn = static_cast<double>(n);

  Eigen::MatrixXd x(n, p);
  std::vector<double> sd(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = design.col(j + 1);
    const double mean = col.mean();
    const double s = std::sqrt((col.array() - mean).square().sum() / dn);
    if (detail::constant_column(col, mean, s)) {
      throw ValidationError("design column " + std::to_string(j + 1) + " has zero variance");
    }
    sd[static_cast<std::size_t>(j)] = s;
    x.col(j) = (col.array() - mean) / s;
  }

  const Eigen::VectorXd resid = y - design * beta;
  Eigen::Index nonzero = 0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) nonzero += beta(j) != 0.0;
  const double df = std::max<double>(1.0, static_cast<double>(n - nonzero));
  const double sigma = std::sqrt(resid.squaredNorm() / df);

  const Eigen::VectorXd centered_resid = resid.array() - resid.mean();
  const Eigen::VectorXd score = x.transpose() * centered_resid / dn;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose(), 1.0 / dn);
  gram.triangularView<Eigen::Upper>() = gram.transpose();

  const double lambda = p > 1 ? config.nodewise_c * std::sqrt(std::log(static_cast<double>(p)) / dn) : 0.0;

  std::vector<detail::NodewiseRow> rows(static_cast<std::size_t>(p));
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(p)));
  auto work = [&](unsigned w) {
    for (Eigen::Index j = w; j < p; j += workers) {
      rows[static_cast<std::size_t>(j)] = detail::nodewise_row(gram, j, lambda, config.max_iter, config.tol);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  SignificanceResult result;
  result.alpha = config.alpha;
  result.correction = config.correction;
  result.adjusted_alpha = config.correction == Correction::bonferroni ? config.alpha / static_cast<double>(p)
                                                                      : config.alpha;
  result.sigma = sigma;
  result.nodewise_lambda = lambda;
  result.tests.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto& row = rows[static_cast<std::size_t>(j)];
    const double s = sd[static_cast<std::size_t>(j)];
    double correction = 0.0;
    for (const auto& [k, v] : row.theta) correction += v * score(k);
    const double b_std = beta(j + 1) * s + correction;
    auto& t = result.tests[static_cast<std::size_t>(j)];
    const double se_std = sigma * std::sqrt(std::max(row.omega, 0.0) / dn);
    t.beta_debiased = beta(j + 1) + correction / s;
    t.std_error = se_std / s;
    if (se_std > 0.0) {
      t.z = b_std / se_std;
      t.p = two_sided_p(t.z);
    } else {
      t.z = b_std == 0.0 ? 0.0 : std::copysign(INFINITY, b_std);
      t.p = b_std == 0.0 ? 1.0 : 0.0;
    }
    t.significant = t.p < result.adjusted_alpha;
  }
  return result;
}

}  // namespace rulelens
