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

// Cyclic coordinate descent for
//
//   minimize (1/(2n)) * ||y - b0 - X b||^2 + lambda * ||b||_1
//
// with an unpenalized intercept. Column 0 of the design matrix must be the
// all-ones intercept column.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rulelens/error.hpp"

namespace rulelens {

struct LassoConfig {
  double lambda = 0.1;
  int max_iter = 1000;
  double tol = 1e-7;
  double near_zero = 1e-8;
  bool standardize = true;
};

struct LassoFit {
  Eigen::VectorXd beta;                  // original scale, beta(0) is the intercept
  int iterations = 0;                    // completed sweeps
  bool converged = false;
  std::vector<double> objective;         // entry 0 before the first sweep, then one per sweep
  std::vector<std::size_t> zero_variance;  // design columns (>= 1) dropped as constant
};

inline double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

namespace detail {

/// Centered (and optionally scaled) copy of the non-intercept columns.
struct CenteredDesign {
  Eigen::MatrixXd x;               // n x p, only columns with variance
  std::vector<std::size_t> source;  // design column index of each x column
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<std::size_t> constant;
};

inline bool constant_column(const Eigen::Ref<const Eigen::VectorXd>& col, double mean, double sd) {
  const double magnitude = col.cwiseAbs().maxCoeff();
  return magnitude == 0.0 || sd <= 1e-12 * std::max(magnitude, std::abs(mean));
}

inline CenteredDesign center_design(const Eigen::MatrixXd& m, bool standardize) {
  CenteredDesign d;
  const auto n = m.rows();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 1; j < m.cols(); ++j) {
    const double mean = m.col(j).mean();
    const double sd = std::sqrt((m.col(j).array() - mean).square().sum() / static_cast<double>(n));
    if (constant_column(m.col(j), mean, sd)) {
      d.constant.push_back(static_cast<std::size_t>(j));
      continue;
    }
    keep.push_back(j);
    d.source.push_back(static_cast<std::size_t>(j));
    d.mean.push_back(mean);
    d.scale.push_back(standardize ? sd : 1.0);
  }
  d.x.resize(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    d.x.col(static_cast<Eigen::Index>(k)) = (m.col(keep[k]).array() - d.mean[k]) / d.scale[k];
  }
  return d;
}

inline void require_finite(const Eigen::MatrixXd& m, const Eigen::VectorXd& y) {
  if (!m.allFinite()) throw ValidationError("design matrix contains non-finite values");
  if (!y.allFinite()) throw ValidationError("response contains non-finite values");
}

}  // namespace detail

inline LassoFit lasso_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const LassoConfig& config) {
  const auto n = design.rows();
  const auto m = design.cols();
  if (m < 1) throw ValidationError("design matrix needs an intercept column");
  if (n < 2) throw ValidationError("lasso needs at least 2 records");
  if (y.size() != n) throw ValidationError("response length does not match the design matrix");
  if (!(config.lambda >= 0.0)) throw ValidationError("lambda must be ≥ 0");
  if (config.max_iter < 0) throw ValidationError("max_iter must be >= 0");
  if (!(config.tol > 0.0)) throw ValidationError("tol must be > 0");
  detail::require_finite(design, y);

  const double dn = static_cast<double>(n);
  auto cd = detail::center_design(design, config.standardize);
  const auto p = cd.x.cols();
  const double ybar = y.mean();
  Eigen::VectorXd r = y.array() - ybar;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd norm2(p);
  for (Eigen::Index j = 0; j < p; ++j) norm2(j) = cd.x.col(j).squaredNorm() / dn;

  auto objective = [&] { return 0.5 * r.squaredNorm() / dn + config.lambda * b.lpNorm<1>(); };

  LassoFit fit;
  fit.zero_variance = cd.constant;
  fit.objective.push_back(objective());
  if (p == 0) fit.converged = true;
  for (int sweep = 0; sweep < config.max_iter && p > 0; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double old = b(j);
      const double rho = cd.x.col(j).dot(r) / dn + norm2(j) * old;
      const double updated = soft_threshold(rho, config.lambda) / norm2(j);
      const double delta = updated - old;
      if (delta != 0.0) {
        r.noalias() -= delta * cd.x.col(j);
        b(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    fit.iterations = sweep + 1;
    fit.objective.push_back(objective());
    if (max_delta < config.tol) {
      fit.converged = true;
      break;
    }
  }

  fit.beta = Eigen::VectorXd::Zero(m);
  double intercept = ybar;
  for (Eigen::Index k = 0; k < p; ++k) {
    const double coef = b(k) / cd.scale[static_cast<std::size_t>(k)];
    fit.beta(static_cast<Eigen::Index>(cd.source[static_cast<std::size_t>(k)])) = coef;
    intercept -= coef * cd.mean[static_cast<std::size_t>(k)];
  }
  fit.beta(0) = intercept;
  return fit;
}

/// Indices j >= 1 with |beta_j| >= threshold. The intercept is never filtered.
inline std::vector<std::size_t> near_zero_survivors(const Eigen::VectorXd& beta, double threshold) {
  if (!(threshold >= 0.0)) throw ValidationError("near-zero threshold must be >= 0");
  std::vector<std::size_t> keep;
  for (Eigen::Index j = 1; j < beta.size(); ++j) {
    if (!(std::abs(beta(j)) < threshold)) keep.push_back(static_cast<std::size_t>(j));
  }
  return keep;
}

}  // namespace rulelens
