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

#include <string>

#include <gtest/gtest.h>

#include "rulelens/random.hpp"
#include "rulelens/rule.hpp"

using namespace rulelens;

namespace {

Vocabulary salaries(int k = 5) {
  const Dataset d = infer_kinds(load_csv("Gender,GPA,Experience,Salary\nmale,1,0,20000\nfemale,4,30,90000\n"
                                         "other,2.5,10,50000\n"))
                        .with_target("Salary");
  return build_vocabulary(d, k, 3);
}

std::size_t error_column(const std::string& text, const Vocabulary& v) {
  try {
    parse_rule(text, v);
  } catch (const RuleParseError& e) {
    return e.column();
  }
  return 0;
}

}  // namespace

TEST(Rule, ParsesPaperRules) {
  const Vocabulary v = salaries();
  const Rule r = parse_rule("IF Gender IS female THEN Salary IS low", v);
  ASSERT_EQ(r.antecedents.size(), 1u);
  EXPECT_EQ(r.antecedents[0], (Clause{"Gender", "female"}));
  EXPECT_EQ(r.consequent, (Clause{"Salary", "low"}));

  const Rule r2 = parse_rule("IF GPA IS very_high AND Gender IS male THEN Salary IS high", v);
  ASSERT_EQ(r2.antecedents.size(), 2u);
  // Canonical order follows the vocabulary, so Gender comes first.
  EXPECT_EQ(r2.antecedents[0], (Clause{"Gender", "male"}));
  EXPECT_EQ(r2.antecedents[1], (Clause{"GPA", "very high"}));
  EXPECT_EQ(format_rule(r2, &v), "IF Gender IS male AND GPA IS very_high THEN Salary IS high");
}

TEST(Rule, KeywordsAreCaseInsensitiveAndQuotesWork) {
  const Vocabulary v = salaries();
  const Rule a = parse_rule("if Gender is female and GPA is \"very high\" then Salary is low", v);
  const Rule b = parse_rule("IF GPA IS very_high AND Gender IS female THEN Salary IS low", v);
  EXPECT_EQ(a, b);
}

TEST(Rule, Errors) {
  const Vocabulary v = salaries();
  EXPECT_EQ(error_column("IF Bogus IS low THEN Salary IS low", v), 4u);
  EXPECT_EQ(error_column("IF Gender IS tall THEN Salary IS low", v), 14u);
  EXPECT_GT(error_column("IF Gender IS male AND Gender IS female THEN Salary IS low", v), 0u);
  EXPECT_GT(error_column("IF Gender IS male THEN GPA IS low", v), 0u);
  EXPECT_GT(error_column("IF Salary IS low THEN Salary IS low", v), 0u);
  EXPECT_EQ(error_column("IF Gender IS male Salary IS low", v), 19u);
  EXPECT_GT(error_column("IF Gender IS male THEN Salary IS low extra", v), 0u);
  EXPECT_GT(error_column("IF Gender IS \"male THEN Salary IS low", v), 0u);
  EXPECT_EQ(error_column("", v), 1u);
  try {
    parse_rule("IF Bogus IS low THEN Salary IS low", v);
  } catch (const RuleParseError& e) {
    EXPECT_EQ(std::string(e.what()), "rule: at column 4: unknown column 'Bogus'");
  }
}

TEST(Rule, RoundTripOnGeneratedRules) {
  const Vocabulary v = salaries(7);
  Philox rng(3);
  const std::vector<std::string> features = {"Gender", "GPA", "Experience"};
  for (int i = 0; i < 200; ++i) {
    Rule r;
    for (std::size_t f = 0; f < features.size(); ++f) {
      if (rng.next_u32() % 2 == 0 && !(f == 2 && r.antecedents.empty())) continue;
      const auto& lv = v.variable(features[f]);
      r.antecedents.push_back({lv.name, lv.terms[rng.next_u32() % lv.terms.size()].label});
    }
    if (r.antecedents.empty()) r.antecedents.push_back({"Gender", "male"});
    const auto& tv = v.variable("Salary");
    r.consequent = {"Salary", tv.terms[rng.next_u32() % tv.terms.size()].label};
    const std::string text = format_rule(r, &v);
    EXPECT_EQ(parse_rule(text, v), r) << text;
    EXPECT_EQ(format_rule(parse_rule(text, v), &v), text);
  }
}

TEST(Rule, QuotesUnusualIdentifiers) {
  const Dataset d = infer_kinds(load_csv("\"my col\",kind,y\n1,a b,0\n2,if,5\n3,\"x\"\"y\",9\n")).with_target("y");
  const Vocabulary v = build_vocabulary(d, 3, 3);
  for (const char* term : {"a b", "if", "x\"y"}) {
    Rule r;
    r.antecedents = {{"kind", term}};
    r.consequent = {"y", "high"};
    const std::string text = format_rule(r, &v);
    EXPECT_EQ(parse_rule(text, v), r) << text;
  }
  Rule r;
  r.antecedents = {{"my col", "low"}};
  r.consequent = {"y", "low"};
  EXPECT_EQ(format_rule(r, &v), "IF \"my col\" IS low THEN y IS low");
  EXPECT_EQ(parse_rule(format_rule(r, &v), v), r);
}

TEST(Rule, RuleList) {
  const Vocabulary v = salaries();
  const auto rules = parse_rule_list("# comment\n\nIF Gender IS male THEN Salary IS high\r\n"
                                     "IF GPA IS low THEN Salary IS low\n",
                                     v);
  EXPECT_EQ(rules.size(), 2u);
  try {
    parse_rule_list("IF Gender IS male THEN Salary IS high\nIF nope IS low THEN Salary IS low\n", v);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 2: ", 0), 0u) << e.what();
  }
}
