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

// JSON encoding of pipeline configs and fit reports (schema_version 1). Keys
// are emitted in a fixed order and numbers in shortest round-trip form, so
// equal reports always serialize to equal bytes.

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rulelens/audit.hpp"
#include "rulelens/error.hpp"
#include "rulelens/fitting.hpp"
#include "rulelens/linguistics.hpp"

namespace rulelens {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? Json(*v) : Json(nullptr);
}

template <typename T>
T get_field(const Json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("field '") + key + "' has the wrong type");
  }
}

inline double get_real_or(const Json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline Correction parse_correction(const std::string& s) {
  if (s == "none") return Correction::none;
  if (s == "bonferroni") return Correction::bonferroni;
  throw ValidationError("correction must be 'none' or 'bonferroni'");
}

inline ColumnKind parse_kind(const std::string& s) {
  if (s == "continuous") return ColumnKind::continuous;
  if (s == "categorical") return ColumnKind::categorical;
  throw ValidationError("unknown column kind '" + s + "'");
}

inline RuleStatus parse_status(const std::string& s) {
  if (s == "significant") return RuleStatus::significant;
  if (s == "not_significant") return RuleStatus::not_significant;
  if (s == "removed") return RuleStatus::removed;
  throw ValidationError("unknown rule status '" + s + "'");
}

inline RemovalReason parse_removal(const std::string& s) {
  for (auto r : {RemovalReason::low_priority, RemovalReason::duplicate, RemovalReason::zero_variance,
                 RemovalReason::near_zero_lasso}) {
    if (s == to_string(r)) return r;
  }
  throw ValidationError("unknown removal reason '" + s + "'");
}

}  // namespace detail

inline Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["target"] = c.target;
  j["k_continuous"] = c.k_continuous;
  j["k_target"] = c.k_target;
  j["max_antecedents"] = c.max_antecedents;
  j["lambda"] = c.lambda;
  j["max_iter"] = c.max_iter;
  j["lasso_tol"] = c.lasso_tol;
  j["standardize"] = c.standardize;
  j["alpha"] = c.alpha;
  j["correction"] = to_string(c.correction);
  j["priority_weights"] = {{"support", c.weights.support},
                           {"leverage", c.weights.leverage},
                           {"antecedents", c.weights.antecedents},
                           {"whitelist", c.weights.whitelist}};
  j["priority_threshold"] = detail::optional_number(c.priority_threshold);
  j["dedupe_tol"] = c.dedupe_tol;
  j["near_zero"] = c.near_zero;
  j["whitelist"] = c.whitelist;
  j["blacklist"] = c.blacklist;
  j["hide_insignificant"] = c.hide_insignificant;
  return j;
}

/// Reads a config; absent keys keep their defaults, unknown keys are rejected.
inline PipelineConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> known = {
      "target",    "k_continuous", "k_target",   "max_antecedents", "lambda",    "max_iter",
      "lasso_tol", "standardize",  "alpha",      "correction",      "priority_weights",
      "priority_threshold", "dedupe_tol", "near_zero", "whitelist", "blacklist", "hide_insignificant"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown config field '" + key + "'");
  }
  PipelineConfig c;
  auto opt = [&](const char* key, auto& out) {
    using T = std::decay_t<decltype(out)>;
    if (j.contains(key) && !j.at(key).is_null()) out = detail::get_field<T>(j, key);
  };
  opt("target", c.target);
  opt("k_continuous", c.k_continuous);
  opt("k_target", c.k_target);
  opt("max_antecedents", c.max_antecedents);
  opt("lambda", c.lambda);
  opt("max_iter", c.max_iter);
  opt("lasso_tol", c.lasso_tol);
  opt("standardize", c.standardize);
  opt("alpha", c.alpha);
  if (j.contains("correction")) c.correction = detail::parse_correction(detail::get_field<std::string>(j, "correction"));
  if (j.contains("priority_weights")) {
    const Json& w = j.at("priority_weights");
    if (!w.is_object()) throw ValidationError("priority_weights must be an object");
    c.weights.support = detail::get_real_or(w, "support", c.weights.support);
    c.weights.leverage = detail::get_real_or(w, "leverage", c.weights.leverage);
    c.weights.antecedents = detail::get_real_or(w, "antecedents", c.weights.antecedents);
    c.weights.whitelist = detail::get_real_or(w, "whitelist", c.weights.whitelist);
  }
  if (j.contains("priority_threshold") && !j.at("priority_threshold").is_null()) {
    c.priority_threshold = detail::get_field<double>(j, "priority_threshold");
  }
  opt("dedupe_tol", c.dedupe_tol);
  opt("near_zero", c.near_zero);
  opt("whitelist", c.whitelist);
  opt("blacklist", c.blacklist);
  opt("hide_insignificant", c.hide_insignificant);
  return c;
}

inline Json vocabulary_to_json(const Vocabulary& vocab) {
  Json vars = Json::array();
  for (const auto& lv : vocab.variables()) {
    Json v;
    v["name"] = lv.name;
    v["kind"] = to_string(lv.kind);
    if (lv.continuous()) {
      v["min"] = lv.min;
      v["max"] = lv.max;
    }
    Json terms = Json::array();
    for (std::size_t t = 0; t < lv.terms.size(); ++t) {
      const auto& term = lv.terms[t];
      Json tj;
      tj["label"] = term.label;
      if (lv.continuous()) {
        tj["left"] = term.mf.left;
        tj["peak"] = term.mf.peak;
        tj["right"] = term.mf.right;
        tj["left_shoulder"] = term.mf.left_shoulder;
        tj["right_shoulder"] = term.mf.right_shoulder;
        tj["mom"] = lv.mom_peak(t);
      }
      terms.push_back(std::move(tj));
    }
    v["terms"] = std::move(terms);
    vars.push_back(std::move(v));
  }
  return Json{{"target", vocab.target()}, {"variables", std::move(vars)}};
}

inline Vocabulary vocabulary_from_json(const Json& j) {
  std::vector<LinguisticVariable> vars;
  for (const auto& v : detail::get_field<Json>(j, "variables")) {
    LinguisticVariable lv;
    lv.name = detail::get_field<std::string>(v, "name");
    lv.kind = detail::parse_kind(detail::get_field<std::string>(v, "kind"));
    if (lv.continuous()) {
      lv.min = detail::get_field<double>(v, "min");
      lv.max = detail::get_field<double>(v, "max");
    }
    for (const auto& t : detail::get_field<Json>(v, "terms")) {
      Term term;
      term.label = detail::get_field<std::string>(t, "label");
      if (lv.continuous()) {
        term.mf.left = detail::get_field<double>(t, "left");
        term.mf.peak = detail::get_field<double>(t, "peak");
        term.mf.right = detail::get_field<double>(t, "right");
        term.mf.left_shoulder = detail::get_field<bool>(t, "left_shoulder");
        term.mf.right_shoulder = detail::get_field<bool>(t, "right_shoulder");
      }
      lv.terms.push_back(std::move(term));
    }
    vars.push_back(std::move(lv));
  }
  return Vocabulary(std::move(vars), detail::get_field<std::string>(j, "target"));
}

inline Json rule_result_to_json(const RuleResult& r) {
  Json j;
  j["text"] = r.text;
  Json ants = Json::array();
  for (const auto& c : r.rule.antecedents) ants.push_back({{"variable", c.variable}, {"term", c.term}});
  j["antecedents"] = std::move(ants);
  j["consequent"] = {{"variable", r.rule.consequent.variable}, {"term", r.rule.consequent.term}};
  j["consequent_ordinal"] = r.consequent_ordinal;
  j["provenance"] = to_string(r.rule.provenance);
  j["whitelist_weight"] = r.rule.whitelist_weight;
  j["support"] = r.scores.support;
  j["leverage"] = r.scores.leverage;
  j["priority"] = r.scores.priority;
  j["status"] = to_string(r.status);
  const bool tested = r.surviving();
  j["beta"] = r.beta;
  j["beta_debiased"] = tested ? detail::number_or_null(r.beta_debiased) : Json(nullptr);
  j["std_error"] = tested ? detail::number_or_null(r.std_error) : Json(nullptr);
  j["z"] = tested ? detail::number_or_null(r.z) : Json(nullptr);
  j["p"] = tested ? detail::number_or_null(r.p) : Json(nullptr);
  if (r.removal_reason) {
    j["removal_reason"] = to_string(*r.removal_reason);
    j["removal_detail"] = r.removal_detail;
  }
  return j;
}

inline Json report_to_json(const FitReport& report) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = config_to_json(report.config);
  j["n"] = report.n;
  j["vocabulary"] = vocabulary_to_json(report.vocabulary);
  j["intercept"] = report.intercept;
  Json rules = Json::array();
  for (const auto& r : report.rules) rules.push_back(rule_result_to_json(r));
  j["rules"] = std::move(rules);
  j["significance"] = {{"alpha", report.config.alpha},
                       {"correction", to_string(report.config.correction)},
                       {"adjusted_alpha", report.adjusted_alpha},
                       {"tested", report.tested},
                       {"sigma", report.sigma},
                       {"nodewise_lambda", report.nodewise_lambda}};
  j["lasso"] = {{"iterations", report.lasso_iterations}, {"converged", report.lasso_converged}};
  j["metrics"] = {{"mape", detail::optional_number(report.fit_metrics.mape)},
                  {"rmse", report.fit_metrics.rmse},
                  {"r2", detail::optional_number(report.fit_metrics.r2)}};
  j["warnings"] = report.warnings;
  return j;
}

/// The canonical report bytes.
inline std::string dump_report(const FitReport& report) { return report_to_json(report).dump(2) + "\n"; }

inline FitReport report_from_json(const Json& j) {
  if (!j.is_object()) throw ValidationError("report must be a JSON object");
  const int version = detail::get_field<int>(j, "schema_version");
  if (version != kSchemaVersion) {
    throw ValidationError("unsupported report schema_version " + std::to_string(version));
  }
  FitReport report;
  report.config = config_from_json(detail::get_field<Json>(j, "config"));
  report.n = detail::get_field<std::size_t>(j, "n");
  report.vocabulary = vocabulary_from_json(detail::get_field<Json>(j, "vocabulary"));
  report.intercept = detail::get_field<double>(j, "intercept");
  for (const auto& rj : detail::get_field<Json>(j, "rules")) {
    RuleResult r;
    r.text = detail::get_field<std::string>(rj, "text");
    for (const auto& c : detail::get_field<Json>(rj, "antecedents")) {
      r.rule.antecedents.push_back(
          {detail::get_field<std::string>(c, "variable"), detail::get_field<std::string>(c, "term")});
    }
    const Json& cons = detail::get_field<Json>(rj, "consequent");
    r.rule.consequent = {detail::get_field<std::string>(cons, "variable"),
                         detail::get_field<std::string>(cons, "term")};
    r.rule.provenance = detail::get_field<std::string>(rj, "provenance") == "whitelist" ? Provenance::whitelist
                                                                                         : Provenance::automatic;
    r.rule.whitelist_weight = detail::get_real_or(rj, "whitelist_weight", 0.0);
    r.consequent_ordinal = detail::get_field<int>(rj, "consequent_ordinal");
    r.scores.support = detail::get_field<double>(rj, "support");
    r.scores.leverage = detail::get_field<double>(rj, "leverage");
    r.scores.priority = detail::get_field<double>(rj, "priority");
    r.scores.antecedent_count = static_cast<int>(r.rule.antecedents.size());
    r.scores.whitelist_weight = r.rule.provenance == Provenance::whitelist ? r.rule.whitelist_weight : 0.0;
    r.status = detail::parse_status(detail::get_field<std::string>(rj, "status"));
    r.beta = detail::get_field<double>(rj, "beta");
    r.beta_debiased = detail::get_real_or(rj, "beta_debiased", 0.0);
    r.std_error = detail::get_real_or(rj, "std_error", 0.0);
    r.z = detail::get_real_or(rj, "z", 0.0);
    r.p = detail::get_real_or(rj, "p", 1.0);
    if (rj.contains("removal_reason")) {
      r.removal_reason = detail::parse_removal(detail::get_field<std::string>(rj, "removal_reason"));
      r.removal_detail = detail::get_field<std::string>(rj, "removal_detail");
    }
    report.rules.push_back(std::move(r));
  }
  const Json& sig = detail::get_field<Json>(j, "significance");
  report.adjusted_alpha = detail::get_field<double>(sig, "adjusted_alpha");
  report.tested = detail::get_field<std::size_t>(sig, "tested");
  report.sigma = detail::get_field<double>(sig, "sigma");
  report.nodewise_lambda = detail::get_field<double>(sig, "nodewise_lambda");
  const Json& lasso = detail::get_field<Json>(j, "lasso");
  report.lasso_iterations = detail::get_field<int>(lasso, "iterations");
  report.lasso_converged = detail::get_field<bool>(lasso, "converged");
  const Json& m = detail::get_field<Json>(j, "metrics");
  if (!m.at("mape").is_null()) report.fit_metrics.mape = m.at("mape").get<double>();
  report.fit_metrics.rmse = detail::get_field<double>(m, "rmse");
  if (!m.at("r2").is_null()) report.fit_metrics.r2 = m.at("r2").get<double>();
  report.warnings = detail::get_field<std::vector<std::string>>(j, "warnings");
  return report;
}

inline FitReport parse_report(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(j);
}

inline Json trace_to_json(const std::vector<TraceEntry>& entries, const std::vector<std::string>& header) {
  Json out = Json::array();
  for (const auto& e : entries) {
    Json record;
    for (std::size_t c = 0; c < header.size() && c < e.record.size(); ++c) record[header[c]] = e.record[c];
    out.push_back({{"record_index", e.record_index}, {"rho", e.rho}, {"record", std::move(record)}});
  }
  return out;
}

inline Json inconsistencies_to_json(const std::vector<Inconsistency>& items) {
  Json out = Json::array();
  for (const auto& x : items) {
    out.push_back({{"kind", to_string(x.kind)}, {"rule_a", x.rule_a}, {"rule_b", x.rule_b}, {"detail", x.detail}});
  }
  return out;
}

}  // namespace rulelens
