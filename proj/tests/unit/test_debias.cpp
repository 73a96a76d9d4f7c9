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

#include <cmath>

#include <gtest/gtest.h>

#include "rulelens/debias.hpp"
#include "rulelens/lasso.hpp"
#include "rulelens/random.hpp"

using namespace rulelens;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

Problem make(Philox& rng, int n, int p, const Eigen::VectorXd& truth) {
  Problem pr;
  pr.x.resize(n, p + 1);
  pr.x.col(0).setOnes();
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= p; ++j) pr.x(i, j) = sample_normal(rng);
  }
  pr.y = pr.x * truth;
  for (int i = 0; i < n; ++i) pr.y(i) += sample_normal(rng);
  return pr;
}

SignificanceResult fit_and_test(const Problem& pr, double lambda, DebiasConfig dc = {}) {
  LassoConfig lc;
  lc.lambda = lambda;
  const LassoFit fit = lasso_fit(pr.x, pr.y, lc);
  return debias_and_test(pr.x, pr.y, fit.beta, dc);
}

}  // namespace

TEST(Debias, PValueHelpers) {
  EXPECT_NEAR(two_sided_p(1.959963984540054), 0.05, 1e-12);
  EXPECT_EQ(two_sided_p(0.0), 1.0);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_cdf(-1.2815515655446004), 0.1, 1e-12);
}

TEST(Debias, NullCoefficientsAreCalibrated) {
  // All coefficients zero: each test should reject at about the nominal rate.
  Philox rng(11);
  int rejections = 0;
  int total = 0;
  DebiasConfig dc;
  dc.correction = Correction::none;
  for (int rep = 0; rep < 500; ++rep) {
    const Problem pr = make(rng, 200, 10, Eigen::VectorXd::Zero(11));
    const SignificanceResult r = fit_and_test(pr, 0.05, dc);
    for (const auto& t : r.tests) {
      rejections += t.significant;
      ++total;
    }
  }
  const double rate = static_cast<double>(rejections) / total;
  EXPECT_GE(rate, 0.02);
  EXPECT_LE(rate, 0.09);
}

TEST(Debias, StrongSignalIsDetected) {
  Philox rng(12);
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(11);
  truth(3) = 1.5;
  const Problem pr = make(rng, 200, 10, truth);
  const SignificanceResult r = fit_and_test(pr, 0.1);
  EXPECT_LT(r.tests[2].p, 1e-6);
  EXPECT_TRUE(r.tests[2].significant);
  EXPECT_NEAR(r.tests[2].beta_debiased, 1.5, 0.3);
}

TEST(Debias, BonferroniDividesAlpha) {
  Philox rng(13);
  const Problem pr = make(rng, 100, 8, Eigen::VectorXd::Zero(9));
  DebiasConfig dc;
  dc.alpha = 0.05;
  const SignificanceResult r = fit_and_test(pr, 0.1, dc);
  EXPECT_DOUBLE_EQ(r.adjusted_alpha, 0.05 / 8);
  dc.correction = Correction::none;
  EXPECT_DOUBLE_EQ(fit_and_test(pr, 0.1, dc).adjusted_alpha, 0.05);
  for (const auto& t : r.tests) EXPECT_EQ(t.significant, t.p < 0.05 / 8);
}

TEST(Debias, ZeroResidualsLeaveBetaUnchanged) {
  // Exact fit: the score is zero, so the debiased value equals beta.
  Philox rng(14);
  Problem pr = make(rng, 50, 3, Eigen::VectorXd::Zero(4));
  Eigen::VectorXd beta(4);
  beta << 1.0, 2.0, -1.0, 0.5;
  pr.y = pr.x * beta;
  const SignificanceResult r = debias_and_test(pr.x, pr.y, beta);
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(r.tests[static_cast<std::size_t>(j)].beta_debiased, beta(j + 1), 1e-12);
  }
  EXPECT_NEAR(r.sigma, 0.0, 1e-12);
}

TEST(Debias, RejectsConstantColumns) {
  Philox rng(15);
  Problem pr = make(rng, 20, 3, Eigen::VectorXd::Zero(4));
  pr.x.col(2).setConstant(2.0);
  EXPECT_THROW(debias_and_test(pr.x, pr.y, Eigen::VectorXd::Zero(4)), ValidationError);
  EXPECT_THROW(debias_and_test(pr.x.leftCols(1), pr.y, Eigen::VectorXd::Zero(1)), ValidationError);
}
