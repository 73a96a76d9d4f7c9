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

// Seeded generators for the validation datasets. Every value is formatted
// with a fixed number of decimals, so the CSV bytes depend only on
// (kind, n, seed, parameters).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulelens/dataset.hpp"
#include "rulelens/error.hpp"
#include "rulelens/random.hpp"

namespace rulelens {

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw InternalError("number formatting failed");
  std::string s(buf, ptr);
  if (s.find_first_not_of("-0.") == std::string::npos) s = decimals > 0 ? "0." + std::string(decimals, '0') : "0";
  return s;
}

struct ColumnBuilder {
  std::vector<Column> columns;

  explicit ColumnBuilder(const std::vector<std::string>& names) {
    for (const auto& name : names) {
      Column col;
      col.name = name;
      columns.push_back(std::move(col));
    }
  }
  void add(std::size_t c, std::string value) { columns[c].raw.push_back(std::move(value)); }
  Dataset build() { return infer_kinds(Dataset(std::move(columns), false)); }
};

}  // namespace detail

/// rand1..rand3 and data are iid U(0,1); y equals data.
inline Dataset gen_sanity(std::size_t n, std::uint64_t seed) {
  if (n < 30) throw ValidationError("sanity dataset needs n >= 30");
  Philox rng(seed);
  detail::ColumnBuilder b({"rand1", "rand2", "rand3", "data", "y"});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) b.add(c, detail::fixed(rng.uniform(), 6));
    const std::string data = detail::fixed(rng.uniform(), 6);
    b.add(3, data);
    b.add(4, data);
  }
  return b.build();
}

/// Parameters of the biased-salaries generator. Salary is
///   base + gpa * GPA + reputation * UniversityReputation + per_year * Experience
///   + U(-noise, noise)
/// and, for gender "other", an extra `other_bonus` fraction with probability
/// `other_bonus_rate`. Female experience is drawn from U(0, female_experience_max)
/// instead of U(0, 30).
struct SalaryParams {
  double p_male = 0.45;
  double p_female = 0.45;
  double base = 25000.0;
  double gpa = 3000.0;
  double reputation = 1000.0;
  double per_year = 1500.0;
  double noise = 2000.0;
  double female_experience_max = 15.0;
  double other_bonus = 0.15;
  double other_bonus_rate = 0.3;
};

namespace detail {

struct Person {
  std::string gender;
  double gpa;
  double reputation;
  double experience;
};

inline Person draw_person(Philox& rng, const SalaryParams& p) {
  Person person;
  const double g = rng.uniform();
  person.gender = g < p.p_male ? "male" : (g < p.p_male + p.p_female ? "female" : "other");
  person.gpa = rng.uniform(1.0, 4.0);
  person.reputation = rng.uniform(0.0, 10.0);
  const double max_years = person.gender == "female" ? p.female_experience_max : 30.0;
  person.experience = rng.uniform(0.0, max_years);
  return person;
}

inline void add_person(ColumnBuilder& b, const Person& p) {
  b.add(0, p.gender);
  b.add(1, fixed(p.gpa, 2));
  b.add(2, fixed(p.reputation, 2));
  b.add(3, fixed(p.experience, 1));
}

}  // namespace detail

inline Dataset gen_biased_salaries(std::size_t n, std::uint64_t seed, const SalaryParams& params = {}) {
  if (n < 100) throw ValidationError("salaries dataset needs n >= 100");
  Philox rng(seed);
  detail::ColumnBuilder b({"Gender", "GPA", "UniversityReputation", "Experience", "Salary"});
  for (std::size_t i = 0; i < n; ++i) {
    const detail::Person person = detail::draw_person(rng, params);
    double salary = params.base + params.gpa * person.gpa + params.reputation * person.reputation +
                    params.per_year * person.experience + rng.uniform(-params.noise, params.noise);
    // Always consume the bonus draw so one record's gender does not shift the stream.
    const bool bonus = rng.uniform() < params.other_bonus_rate;
    if (person.gender == "other" && bonus) salary *= 1.0 + params.other_bonus;
    detail::add_person(b, person);
    b.add(4, detail::fixed(salary, 2));
  }
  return b.build();
}

struct MomentMatch {
  double gamma_shape = 0.0;
  double gamma_scale = 0.0;
  double weibull_shape = 0.0;
  double weibull_scale = 0.0;
};

/// Squared coefficient of variation of a Weibull with shape k.
inline double weibull_cv2(double k) {
  return std::exp(std::lgamma(1.0 + 2.0 / k) - 2.0 * std::lgamma(1.0 + 1.0 / k)) - 1.0;
}

/// Gamma and Weibull parameters with mean `mu` and variance `var`.
inline MomentMatch match_moments(double mu, double var) {
  if (!(mu > 0.0) || !(var > 0.0) || !std::isfinite(mu) || !std::isfinite(var)) {
    throw ValidationError("match_moments needs mu > 0 and var > 0");
  }
  MomentMatch m;
  m.gamma_shape = mu * mu / var;
  m.gamma_scale = var / mu;

  const double target = var / (mu * mu);
  double lo = 0.1;
  double hi = 50.0;
  if (target > weibull_cv2(lo) || target < weibull_cv2(hi)) {
    throw ValidationError("coefficient of variation outside the solvable Weibull range");
  }
  // cv2 decreases in k.
  double k = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    k = 0.5 * (lo + hi);
    const double value = weibull_cv2(k);
    if (std::abs(value - target) < 1e-12 * target || hi - lo < 1e-15 * k) break;
    if (value > target) {
      lo = k;
    } else {
      hi = k;
    }
  }
  if (!(std::abs(weibull_cv2(k) - target) < 1e-10 * target)) {
    throw InternalError("Weibull shape bisection did not converge");
  }
  m.weibull_shape = k;
  m.weibull_scale = mu / std::tgamma(1.0 + 1.0 / k);
  return m;
}

struct SkewParams {
  double mean = 50000.0;
  double sd = 10000.0;
  double p_male = 0.45;
  double p_female = 0.45;
};

/// Independent columns as in gen_biased_salaries, but Salary ignores them:
/// male ~ Weibull, everyone else ~ Gamma, with equal mean and variance.
inline Dataset gen_skewed_salaries(std::size_t n, std::uint64_t seed, const SkewParams& params = {}) {
  if (n < 500) throw ValidationError("skewed salaries dataset needs n >= 500");
  const MomentMatch mm = match_moments(params.mean, params.sd * params.sd);
  SalaryParams people;
  people.p_male = params.p_male;
  people.p_female = params.p_female;
  Philox rng(seed);
  detail::ColumnBuilder b({"Gender", "GPA", "UniversityReputation", "Experience", "Salary"});
  for (std::size_t i = 0; i < n; ++i) {
    const detail::Person person = detail::draw_person(rng, people);
    const double salary = person.gender == "male" ? sample_weibull(rng, mm.weibull_shape, mm.weibull_scale)
                                                  : sample_gamma(rng, mm.gamma_shape, mm.gamma_scale);
    detail::add_person(b, person);
    b.add(4, detail::fixed(salary, 2));
  }
  return b.build();
}

enum class GenKind { sanity, salaries, salaries_skew };

inline std::optional<GenKind> parse_gen_kind(std::string_view s) {
  if (s == "sanity") return GenKind::sanity;
  if (s == "salaries") return GenKind::salaries;
  if (s == "salaries-skew" || s == "salaries_skew") return GenKind::salaries_skew;
  return std::nullopt;
}

inline Dataset generate(GenKind kind, std::size_t n, std::uint64_t seed) {
  switch (kind) {
    case GenKind::sanity: return gen_sanity(n, seed);
    case GenKind::salaries: return gen_biased_salaries(n, seed);
    case GenKind::salaries_skew: return gen_skewed_salaries(n, seed);
  }
  throw InternalError("unknown generator kind");
}

}  // namespace rulelens
