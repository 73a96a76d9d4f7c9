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
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulelens/dataset.hpp"
#include "rulelens/error.hpp"

namespace rulelens {

inline constexpr int kMinTerms = 3;
inline constexpr int kMaxTerms = 7;

/// Canonical ordered labels for a K-term partition.
inline std::vector<std::string> canonical_labels(int k) {
  switch (k) {
    case 3: return {"low", "medium", "high"};
    case 4: return {"low", "medium low", "medium high", "high"};
    case 5: return {"very low", "low", "medium", "high", "very high"};
    case 6: return {"very low", "low", "medium low", "medium high", "high", "very high"};
    case 7: return {"very low", "low", "medium low", "medium", "medium high", "high", "very high"};
    default:
      throw ValidationError("term count must be between 3 and 7, got " + std::to_string(k));
  }
}

/// Triangle with optional shoulders. A shouldered side holds membership at 1
/// from the peak out to the range end.
struct TriangularMF {
  double left = 0.0;
  double peak = 0.0;
  double right = 0.0;
  bool left_shoulder = false;
  bool right_shoulder = false;

  double operator()(double v) const {
    if (v <= peak) {
      if (left_shoulder || v == peak) return 1.0;
      if (v <= left) return 0.0;
      return (v - left) / (peak - left);
    }
    if (right_shoulder) return 1.0;
    if (v >= right) return 0.0;
    return (right - v) / (right - peak);
  }
};

struct Term {
  std::string label;
  TriangularMF mf;  // unused for categorical terms
};

/// A column together with its ordered linguistic terms.
struct LinguisticVariable {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  double min = 0.0;
  double max = 0.0;
  std::vector<Term> terms;

  bool continuous() const { return kind == ColumnKind::continuous; }

  std::optional<std::size_t> find_term(std::string_view label) const {
    for (std::size_t t = 0; t < terms.size(); ++t) {
      if (terms[t].label == label) return t;
    }
    return std::nullopt;
  }

  std::size_t term_index(std::string_view label) const {
    auto t = find_term(label);
    if (!t) {
      throw ValidationError("unknown term '" + std::string(label) + "' for variable '" + name + "'");
    }
    return *t;
  }

  double clamp(double v) const { return std::clamp(v, min, max); }

  /// Membership of a crisp value; out-of-range values are clamped first.
  double membership(std::size_t term, double value) const {
    require_continuous();
    return terms.at(term).mf(clamp(value));
  }

  /// Equality indicator for categorical variables.
  double membership(std::size_t term, std::string_view category) const {
    if (continuous()) {
      auto v = parse_real(category);
      if (!v) throw ValidationError("value '" + std::string(category) + "' is not numeric for '" + name + "'");
      return membership(term, *v);
    }
    return terms.at(term).label == category ? 1.0 : 0.0;
  }

  /// Highest-membership term; ties go to the lower-ordered term.
  std::size_t discretize(double value) const {
    require_continuous();
    const double v = clamp(value);
    std::size_t best = 0;
    double best_mu = terms[0].mf(v);
    for (std::size_t t = 1; t < terms.size(); ++t) {
      const double mu = terms[t].mf(v);
      if (mu > best_mu) {
        best = t;
        best_mu = mu;
      }
    }
    return best;
  }

  /// Middle of the maxima plateau, clipped to the variable range.
  double mom_peak(std::size_t term) const {
    if (!continuous()) {
      throw ValidationError("variable '" + name + "' is categorical and has no crisp representative");
    }
    const TriangularMF& mf = terms.at(term).mf;
    const double lo = mf.left_shoulder ? min : mf.peak;
    const double hi = mf.right_shoulder ? max : mf.peak;
    return 0.5 * (std::clamp(lo, min, max) + std::clamp(hi, min, max));
  }

 private:
  void require_continuous() const {
    if (!continuous()) throw ValidationError("variable '" + name + "' is categorical");
  }
};

/// Equidistant unit-sum triangular partition of [min, max] into k terms.
inline LinguisticVariable make_continuous_variable(std::string name, double min, double max, int k) {
  auto labels = canonical_labels(k);
  if (!(max > min)) {
    throw ValidationError("column '" + name + "' has a degenerate range (min = max = " +
                          std::to_string(min) + ")");
  }
  LinguisticVariable var;
  var.name = std::move(name);
  var.kind = ColumnKind::continuous;
  var.min = min;
  var.max = max;
  const double step = (max - min) / (k - 1);
  auto peak_at = [&](int i) { return i == k - 1 ? max : min + i * step; };
  for (int i = 0; i < k; ++i) {
    Term term;
    term.label = labels[i];
    term.mf.peak = peak_at(i);
    term.mf.left = i == 0 ? min : peak_at(i - 1);
    term.mf.right = i == k - 1 ? max : peak_at(i + 1);
    term.mf.left_shoulder = i == 0;
    term.mf.right_shoulder = i == k - 1;
    var.terms.push_back(std::move(term));
  }
  return var;
}

inline LinguisticVariable make_categorical_variable(std::string name, const std::vector<std::string>& values) {
  LinguisticVariable var;
  var.name = std::move(name);
  var.kind = ColumnKind::categorical;
  for (const auto& v : values) var.terms.push_back(Term{v, {}});
  return var;
}

/// One linguistic variable per dataset column, in column order.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<LinguisticVariable> variables, std::string target)
      : variables_(std::move(variables)), target_(std::move(target)) {
    if (!find(target_)) throw ValidationError("vocabulary has no target variable '" + target_ + "'");
    if (!variable(target_).continuous()) {
      throw ValidationError("target variable '" + target_ + "' must be continuous");
    }
  }

  const std::vector<LinguisticVariable>& variables() const { return variables_; }
  const std::string& target() const { return target_; }
  std::size_t target_index() const { return *find(target_); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t v = 0; v < variables_.size(); ++v) {
      if (variables_[v].name == name) return v;
    }
    return std::nullopt;
  }

  std::size_t index(std::string_view name) const {
    auto v = find(name);
    if (!v) throw ValidationError("unknown variable '" + std::string(name) + "'");
    return *v;
  }

  const LinguisticVariable& variable(std::string_view name) const { return variables_[index(name)]; }
  const LinguisticVariable& variable(std::size_t index) const { return variables_.at(index); }

  double membership(std::string_view var, std::string_view term, double value) const {
    const auto& lv = variable(var);
    return lv.membership(lv.term_index(term), value);
  }

  double membership(std::string_view var, std::string_view term, std::string_view category) const {
    const auto& lv = variable(var);
    return lv.membership(lv.term_index(term), category);
  }

  const std::string& discretize(std::string_view var, double value) const {
    const auto& lv = variable(var);
    return lv.terms[lv.discretize(value)].label;
  }

  double mom_peak(std::string_view var, std::string_view term) const {
    const auto& lv = variable(var);
    return lv.mom_peak(lv.term_index(term));
  }

 private:
  std::vector<LinguisticVariable> variables_;
  std::string target_;
};

/// Builds terms for every column of a typed dataset with a designated target.
inline Vocabulary build_vocabulary(const Dataset& data, int k_continuous, int k_target) {
  if (!data.typed()) throw ValidationError("dataset must be typed before building a vocabulary");
  if (!data.target()) throw ValidationError("dataset has no target column");
  canonical_labels(k_continuous);
  canonical_labels(k_target);
  std::vector<LinguisticVariable> vars;
  vars.reserve(data.width());
  for (const auto& col : data.columns()) {
    if (col.continuous()) {
      const int k = col.name == *data.target() ? k_target : k_continuous;
      vars.push_back(make_continuous_variable(col.name, col.min, col.max, k));
    } else {
      vars.push_back(make_categorical_variable(col.name, col.categories));
    }
  }
  return Vocabulary(std::move(vars), *data.target());
}

}  // namespace rulelens
