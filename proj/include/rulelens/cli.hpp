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

// The `rulelens` command line: fit, trace, check, gen and serve.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input or usage,
// 3 `check` found inconsistencies.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulelens/audit.hpp"
#include "rulelens/dataset.hpp"
#include "rulelens/error.hpp"
#include "rulelens/fitting.hpp"
#include "rulelens/report.hpp"
#include "rulelens/rule.hpp"
#include "rulelens/service.hpp"
#include "rulelens/synthgen.hpp"

namespace rulelens {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInconsistent = 3;

namespace detail {

inline void write_text_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

/// Rule list file: one rule per line, '#' comments and blank lines ignored.
inline std::vector<std::string> read_rule_lines(const std::string& path) {
  std::vector<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(line.substr(first));
  }
  return out;
}

inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::vector<std::string> near_matches(const FitReport& report, const std::string& text, std::size_t count) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& r : report.rules) scored.emplace_back(edit_distance(text, r.text), r.text);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < count; ++i) out.push_back(scored[i].second);
  return out;
}

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

inline void print_rule_table(const FitReport& report, std::ostream& out) {
  std::size_t width = 4;
  std::vector<const RuleResult*> rows;
  for (const auto* r : report.surviving()) {
    if (report.config.hide_insignificant && r->status != RuleStatus::significant) continue;
    rows.push_back(r);
    width = std::max(width, r->text.size());
  }
  out << std::left << std::setw(static_cast<int>(width)) << "rule" << "  " << std::right << std::setw(12)
      << "coefficient" << std::setw(10) << "support" << std::setw(11) << "leverage" << std::setw(12) << "p"
      << "  sig\n";
  for (const auto* r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r->text << "  " << std::right << std::setw(12)
        << fmt(r->beta) << std::setw(10) << fmt(r->scores.support, 4) << std::setw(11)
        << fmt(r->scores.leverage, 4) << std::setw(12) << fmt(r->p, 4) << "  "
        << (r->status == RuleStatus::significant ? "*" : "") << "\n";
  }
  out << "intercept " << fmt(report.intercept) << "\n";
  out << "MAPE " << (report.fit_metrics.mape ? fmt(*report.fit_metrics.mape, 4) + "%" : "undefined") << "  RMSE "
      << fmt(report.fit_metrics.rmse, 4) << "  R2 "
      << (report.fit_metrics.r2 ? fmt(*report.fit_metrics.r2, 4) : "undefined") << "\n";
  out << report.surviving().size() << " of " << report.rules.size() << " rules kept, adjusted alpha "
      << fmt(report.adjusted_alpha, 4) << "\n";
}

}  // namespace detail

/// Runs one CLI invocation. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explain tabular data with significant fuzzy if-then rules", "rulelens"};
  app.require_subcommand(1);

  // fit
  PipelineConfig config;
  std::string fit_input;
  std::string fit_report;
  std::string fit_format = "json";
  std::string fit_config_file;
  std::string correction = "bonferroni";
  std::vector<double> weights;
  double priority_threshold = 0.0;
  std::string whitelist_file;
  std::string blacklist_file;
  auto* fit = app.add_subcommand("fit", "Fit the rule model to a CSV file and write a JSON report");
  fit->add_option("--input,-i", fit_input, "CSV file with a header row")->required();
  auto* target_opt = fit->add_option("--target,-t", config.target, "continuous column to explain");
  fit->add_option("--config", fit_config_file, "JSON config file; command-line flags override it");
  auto* k_opt = fit->add_option("--k-continuous", config.k_continuous, "terms per continuous column (3-7)");
  auto* kt_opt = fit->add_option("--k-target", config.k_target, "terms for the target (3-7)");
  auto* ma_opt = fit->add_option("--max-antecedents", config.max_antecedents, "clauses per rule");
  auto* lambda_opt = fit->add_option("--lambda", config.lambda, "LASSO penalty");
  auto* iter_opt = fit->add_option("--max-iter", config.max_iter, "LASSO coordinate-descent sweeps");
  auto* tol_opt = fit->add_option("--tol", config.lasso_tol, "LASSO convergence tolerance");
  auto* std_opt = fit->add_flag("--no-standardize{false},--standardize{true}", config.standardize,
                                "standardize rule columns inside the LASSO");
  auto* alpha_opt = fit->add_option("--alpha", config.alpha, "significance level");
  auto* corr_opt = fit->add_option("--correction", correction, "none or bonferroni");
  auto* w_opt = fit->add_option("--priority-weights", weights, "support leverage antecedents whitelist")
                    ->expected(4);
  auto* pt_opt = fit->add_option("--priority-threshold", priority_threshold, "drop rules with lower priority");
  auto* dt_opt = fit->add_option("--dedupe-tol", config.dedupe_tol, "duplicate-column tolerance");
  auto* nz_opt = fit->add_option("--near-zero", config.near_zero, "drop rules with |beta| below this");
  auto* wl_opt = fit->add_option("--whitelist", whitelist_file, "file of rules to force in");
  auto* bl_opt = fit->add_option("--blacklist", blacklist_file, "file of rules to exclude");
  auto* hide_opt = fit->add_flag("--hide-insignificant", config.hide_insignificant,
                                 "omit insignificant rules from the table");
  fit->add_option("--report,-o", fit_report, "report path (default: standard output)");
  fit->add_option("--format", fit_format, "json or table")->check(CLI::IsMember({"json", "table"}));

  // trace
  std::string trace_report;
  std::string trace_input;
  std::string trace_rule_text;
  std::size_t trace_top = 10;
  bool trace_no_intercept = false;
  std::string trace_format = "table";
  auto* trace = app.add_subcommand("trace", "List the records a rule depends on most");
  trace->add_option("--report,-r", trace_report, "report from `rulelens fit`")->required();
  trace->add_option("--input,-i", trace_input, "the CSV the report was fitted on")->required();
  trace->add_option("--rule", trace_rule_text, "rule text as printed in the report")->required();
  trace->add_option("--top,-k", trace_top, "number of records")->check(CLI::PositiveNumber);
  trace->add_flag("--exclude-intercept", trace_no_intercept, "leave the intercept out of the rho denominator");
  trace->add_option("--format", trace_format, "table or json")->check(CLI::IsMember({"json", "table"}));

  // check
  std::string check_report;
  ConsistencyFilter filter;
  std::string check_format = "table";
  auto* check = app.add_subcommand("check", "Find conflicting and specializing rule pairs");
  check->add_option("--report,-r", check_report, "report from `rulelens fit`")->required();
  check->add_option("--beta-threshold", filter.beta_threshold, "ignore rules with |beta| at or below this")
      ->check(CLI::NonNegativeNumber);
  check->add_flag("--only-significant", filter.require_significant, "consider significant rules only");
  check->add_option("--alpha", filter.alpha, "significance level for --only-significant");
  check->add_option("--format", check_format, "table or json")->check(CLI::IsMember({"json", "table"}));

  // gen
  std::string gen_kind;
  std::size_t gen_n = 1000;
  std::uint64_t gen_seed = 42;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a synthetic validation dataset as CSV");
  gen->add_option("kind", gen_kind, "sanity, salaries or salaries-skew")->required();
  gen->add_option("--n", gen_n, "number of records");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out,-o", gen_out, "output path (default: standard output)");

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = default_data_dir().string();
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API and web UI");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port,-p", port, "TCP port")->check(CLI::Range(1, 65535));
  serve->add_option("--data-dir", data_dir, "dataset and report store (env RULELENS_DATA_DIR)");
  serve->add_option("--static-dir", static_dir, "directory with the built web UI");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*fit) {
      if (!fit_config_file.empty()) {
        const PipelineConfig base = config_from_json(Json::parse(read_file(fit_config_file)));
        PipelineConfig merged = base;
        if (*target_opt) merged.target = config.target;
        if (*k_opt) merged.k_continuous = config.k_continuous;
        if (*kt_opt) merged.k_target = config.k_target;
        if (*ma_opt) merged.max_antecedents = config.max_antecedents;
        if (*lambda_opt) merged.lambda = config.lambda;
        if (*iter_opt) merged.max_iter = config.max_iter;
        if (*tol_opt) merged.lasso_tol = config.lasso_tol;
        if (*std_opt) merged.standardize = config.standardize;
        if (*alpha_opt) merged.alpha = config.alpha;
        if (*dt_opt) merged.dedupe_tol = config.dedupe_tol;
        if (*nz_opt) merged.near_zero = config.near_zero;
        if (*hide_opt) merged.hide_insignificant = true;
        if (!*corr_opt) correction = to_string(base.correction);
        if (!*w_opt) {
          weights = {base.weights.support, base.weights.leverage, base.weights.antecedents, base.weights.whitelist};
        }
        if (!*pt_opt && base.priority_threshold) {
          priority_threshold = *base.priority_threshold;
          merged.priority_threshold = priority_threshold;
        }
        config = merged;
      }
      if (config.target.empty()) {
        err << "error: --target is required\n\n" << fit->help();
        return kExitValidation;
      }
      config.correction = detail::parse_correction(correction);
      if (!weights.empty()) config.weights = {weights[0], weights[1], weights[2], weights[3]};
      if (*pt_opt) config.priority_threshold = priority_threshold;
      if (*wl_opt) config.whitelist = detail::read_rule_lines(whitelist_file);
      if (*bl_opt) config.blacklist = detail::read_rule_lines(blacklist_file);
      config.validate();

      const FitReport report = fit_pipeline(load_csv_file(fit_input), config);
      const std::string bytes = dump_report(report);
      if (!fit_report.empty()) detail::write_text_file(fit_report, bytes);
      if (fit_format == "table") {
        detail::print_rule_table(report, out);
      } else if (fit_report.empty()) {
        out << bytes;
      }
      for (const auto& w : report.warnings) {
        if (w.rfind("removed '", 0) != 0) err << "warning: " << w << "\n";
      }
      return kExitOk;
    }

    if (*trace) {
      const FitReport report = parse_report(read_file(trace_report));
      const Dataset data = load_csv_file(trace_input);
      if (report.find(trace_rule_text) == nullptr) {
        err << "error: rule not found in the report: " << trace_rule_text << "\nclosest rules:\n";
        for (const auto& m : detail::near_matches(report, trace_rule_text, 5)) err << "  " << m << "\n";
        return kExitValidation;
      }
      const auto entries = trace_rule(report, trace_rule_text, data, trace_top, !trace_no_intercept);
      std::vector<std::string> header;
      for (const auto& c : data.columns()) header.push_back(c.name);
      if (trace_format == "json") {
        out << trace_to_json(entries, header).dump(2) << "\n";
      } else {
        out << "record  rho";
        for (const auto& h : header) out << "  " << h;
        out << "\n";
        for (const auto& e : entries) {
          out << e.record_index << "  " << detail::fmt(e.rho, 6);
          for (const auto& cell : e.record) out << "  " << cell;
          out << "\n";
        }
      }
      return kExitOk;
    }

    if (*check) {
      const FitReport report = parse_report(read_file(check_report));
      const auto found = find_inconsistencies(audit_rules(report), filter);
      if (check_format == "json") {
        out << inconsistencies_to_json(found).dump(2) << "\n";
      } else {
        for (const auto& x : found) {
          out << to_string(x.kind) << ": " << x.rule_a << " | " << x.rule_b << " (" << x.detail << ")\n";
        }
        out << found.size() << " inconsistencies\n";
      }
      return found.empty() ? kExitOk : kExitInconsistent;
    }

    if (*gen) {
      const auto kind = parse_gen_kind(gen_kind);
      if (!kind) {
        err << "error: unknown dataset kind '" << gen_kind << "' (expected sanity, salaries or salaries-skew)\n";
        return kExitValidation;
      }
      const std::string csv = to_csv(generate(*kind, gen_n, gen_seed));
      if (gen_out.empty()) {
        out << csv;
      } else {
        detail::write_text_file(gen_out, csv);
      }
      return kExitOk;
    }

    if (*serve) {
      ServiceOptions options;
      options.data_dir = data_dir;
      if (!static_dir.empty()) options.static_dir = static_dir;
      Service service(options);
      out << "serving on http://" << host << ":" << port << "/ (data in " << options.data_dir.string() << ")"
          << std::endl;
      if (!service.listen(host, port)) {
        err << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitInternal;
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::validation ? kExitValidation : kExitInternal;
  } catch (const nlohmann::json::exception& e) {
    err << "error: bad JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace rulelens
