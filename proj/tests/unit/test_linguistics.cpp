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
#include <string>

#include <gtest/gtest.h>

#include "rulelens/linguistics.hpp"
#include "rulelens/random.hpp"

using namespace rulelens;

namespace {

Vocabulary salary_vocab(int k, int kt) {
  const Dataset d = infer_kinds(load_csv("x,g,y\n0,male,0\n10,female,100\n5,other,50\n")).with_target("y");
  return build_vocabulary(d, k, kt);
}

}  // namespace

TEST(Linguistics, CanonicalLabels) {
  EXPECT_EQ(canonical_labels(3), (std::vector<std::string>{"low", "medium", "high"}));
  EXPECT_EQ(canonical_labels(7).front(), "very low");
  EXPECT_EQ(canonical_labels(7).back(), "very high");
  for (int k = 3; k <= 7; ++k) EXPECT_EQ(canonical_labels(k).size(), static_cast<std::size_t>(k));
  EXPECT_THROW(canonical_labels(2), ValidationError);
  EXPECT_THROW(canonical_labels(8), ValidationError);
}

TEST(Linguistics, EquidistantPeaks) {
  const auto v3 = make_continuous_variable("x", 0, 10, 3);
  EXPECT_EQ(v3.terms[0].mf.peak, 0.0);
  EXPECT_EQ(v3.terms[1].mf.peak, 5.0);
  EXPECT_EQ(v3.terms[2].mf.peak, 10.0);
  const auto v5 = make_continuous_variable("x", 0, 100, 5);
  for (int i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(v5.terms[static_cast<std::size_t>(i)].mf.peak, 25.0 * i);
}

TEST(Linguistics, MembershipExamples) {
  const auto v = make_continuous_variable("x", 0, 10, 3);
  EXPECT_EQ(v.membership(1, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(v.membership(0, 2.5), 0.5);
  EXPECT_DOUBLE_EQ(v.membership(1, 2.5), 0.5);
  EXPECT_EQ(v.membership(2, 2.5), 0.0);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(v.membership(t, 12.0), v.membership(t, 10.0));
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(v.membership(t, -4.0), v.membership(t, 0.0));
}

TEST(Linguistics, Discretize) {
  const auto v = make_continuous_variable("x", 0, 10, 3);
  EXPECT_EQ(v.terms[v.discretize(9.0)].label, "high");
  EXPECT_EQ(v.terms[v.discretize(2.5)].label, "low");
  EXPECT_EQ(v.terms[v.discretize(7.5)].label, "medium");
}

TEST(Linguistics, DiscretizeMatchesBruteForceArgmax) {
  Philox rng(7);
  for (int k = 3; k <= 7; ++k) {
    const auto v = make_continuous_variable("x", -3, 17, k);
    for (int i = 0; i < 1000; ++i) {
      const double x = rng.uniform(-5, 20);
      std::size_t best = 0;
      for (std::size_t t = 1; t < v.terms.size(); ++t) {
        if (v.membership(t, x) > v.membership(best, x)) best = t;
      }
      ASSERT_EQ(v.discretize(x), best) << "k=" << k << " x=" << x;
    }
  }
}

TEST(Linguistics, UnitSumAtMostTwoActiveAndSlopes) {
  Philox rng(11);
  for (int k = 3; k <= 7; ++k) {
    const double lo = -2.0;
    const double hi = 3.5;
    const auto v = make_continuous_variable("x", lo, hi, k);
    const double step = (hi - lo) / (k - 1);
    for (int i = 0; i < 2000; ++i) {
      const double x = rng.uniform(lo, hi);
      double sum = 0.0;
      int active = 0;
      for (std::size_t t = 0; t < v.terms.size(); ++t) {
        const double mu = v.membership(t, x);
        EXPECT_GE(mu, 0.0);
        EXPECT_LE(mu, 1.0);
        sum += mu;
        active += mu > 0.0;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_LE(active, 2);
    }
    // Finite differences inside one linear piece match slope 1/step.
    for (std::size_t t = 1; t + 1 < v.terms.size(); ++t) {
      const double p = v.terms[t].mf.peak;
      const double h = step * 1e-3;
      const double rising = (v.membership(t, p - h) - v.membership(t, p - 2 * h)) / h;
      const double falling = (v.membership(t, p + 2 * h) - v.membership(t, p + h)) / h;
      EXPECT_NEAR(rising, 1.0 / step, 1e-9 / step * 1e3);
      EXPECT_NEAR(falling, -1.0 / step, 1e-9 / step * 1e3);
    }
  }
}

TEST(Linguistics, MomPeak) {
  const auto v3 = make_continuous_variable("x", 0, 10, 3);
  EXPECT_EQ(v3.mom_peak(1), 5.0);
  EXPECT_EQ(v3.mom_peak(2), 10.0);
  EXPECT_EQ(v3.mom_peak(0), 0.0);
  const auto v5 = make_continuous_variable("x", 0, 100, 5);
  EXPECT_EQ(v5.mom_peak(2), 50.0);
  const auto g = make_categorical_variable("g", {"female", "male"});
  EXPECT_THROW(g.mom_peak(0), ValidationError);
}

TEST(Linguistics, Categorical) {
  const auto g = make_categorical_variable("g", {"female", "male", "other"});
  ASSERT_EQ(g.terms.size(), 3u);
  EXPECT_EQ(g.membership(1, std::string_view("male")), 1.0);
  EXPECT_EQ(g.membership(1, std::string_view("female")), 0.0);
}

TEST(Linguistics, BuildVocabulary) {
  const Vocabulary v = salary_vocab(3, 5);
  EXPECT_EQ(v.target(), "y");
  EXPECT_EQ(v.variable("x").terms.size(), 3u);
  EXPECT_EQ(v.variable("y").terms.size(), 5u);
  EXPECT_EQ(v.variable("g").terms.size(), 3u);
  EXPECT_EQ(v.discretize("x", 9.0), "high");
  EXPECT_DOUBLE_EQ(v.mom_peak("y", "medium"), 50.0);
  EXPECT_THROW(v.membership("x", "nope", 1.0), ValidationError);
  EXPECT_THROW(v.membership("nope", "low", 1.0), ValidationError);
}

TEST(Linguistics, BuildVocabularyErrors) {
  const Dataset flat = infer_kinds(load_csv("x,y\n1,0\n1,5\n")).with_target("y");
  EXPECT_THROW(build_vocabulary(flat, 3, 3), ValidationError);
  const Dataset ok = infer_kinds(load_csv("x,y\n0,0\n1,5\n")).with_target("y");
  EXPECT_THROW(build_vocabulary(ok, 2, 3), ValidationError);
  EXPECT_THROW(build_vocabulary(ok, 3, 8), ValidationError);
  EXPECT_NO_THROW(build_vocabulary(ok, 7, 7));
}
