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
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rulelens/csv.hpp"
#include "rulelens/error.hpp"

namespace rulelens {

enum class ColumnKind { continuous, categorical };

inline const char* to_string(ColumnKind kind) {
  return kind == ColumnKind::continuous ? "continuous" : "categorical";
}

/// One column of the data matrix. `raw` is always populated; the typed views
/// are filled by infer_kinds.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::vector<std::string> raw;

  // Continuous view.
  std::vector<double> numbers;
  double min = 0.0;
  double max = 0.0;

  // Categorical view: codes index into the sorted distinct value set.
  std::vector<std::string> categories;
  std::vector<std::size_t> codes;

  bool continuous() const { return kind == ColumnKind::continuous; }
};

/// Parses a decimal or scientific-notation real. Rejects locale separators,
/// hex floats, inf and nan.
inline std::optional<double> parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') {
    text.remove_prefix(1);
    if (text.empty() || text.front() == '-' || text.front() == '+') return std::nullopt;
  }
  for (char c : text) {
    const bool ok = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E';
    if (!ok) return std::nullopt;
  }
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

/// The data matrix: n records over named columns, optionally with a
/// designated continuous target. Immutable once built.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Column> columns, bool typed) : columns_(std::move(columns)), typed_(typed) {
    validate_shape();
  }

  std::size_t n() const { return columns_.empty() ? 0 : columns_.front().raw.size(); }
  std::size_t width() const { return columns_.size(); }
  bool typed() const { return typed_; }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t index) const { return columns_.at(index); }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (columns_[c].name == name) return c;
    }
    return std::nullopt;
  }

  const Column& column(std::string_view name) const {
    auto idx = find(name);
    if (!idx) throw ValidationError("unknown column '" + std::string(name) + "'");
    return columns_[*idx];
  }

  const std::optional<std::string>& target() const { return target_; }

  /// Returns a copy with `name` designated as the response column.
  Dataset with_target(const std::string& name) const {
    if (!typed_) throw ValidationError("dataset must be typed before choosing a target");
    const Column& col = column(name);
    if (!col.continuous()) {
      throw ValidationError("target column '" + name +
                            "' is categorical; only continuous targets are supported");
    }
    Dataset copy = *this;
    copy.target_ = name;
    return copy;
  }

  /// Raw cell values of one record, in column order.
  std::vector<std::string> record(std::size_t row) const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& col : columns_) out.push_back(col.raw.at(row));
    return out;
  }

 private:
  void validate_shape() const {
    for (std::size_t a = 0; a < columns_.size(); ++a) {
      if (columns_[a].name.empty()) throw ValidationError("column names must be non-empty");
      if (columns_[a].raw.size() != n()) {
        throw ValidationError("column '" + columns_[a].name + "' has " +
                              std::to_string(columns_[a].raw.size()) + " values, expected " +
                              std::to_string(n()));
      }
      for (std::size_t b = a + 1; b < columns_.size(); ++b) {
        if (columns_[a].name == columns_[b].name) {
          throw ValidationError("duplicate column name '" + columns_[a].name + "'");
        }
      }
    }
  }

  std::vector<Column> columns_;
  bool typed_ = false;
  std::optional<std::string> target_;
};

/// Reads CSV text into an untyped dataset (all cells raw strings).
inline Dataset load_csv(std::string_view source, const csv::Options& options = {}) {
  csv::Table table = csv::parse(source, options);
  std::vector<Column> columns(table.header.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    columns[c].name = table.header[c];
    columns[c].raw.reserve(table.rows.size());
  }
  for (auto& row : table.rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) columns[c].raw.push_back(std::move(row[c]));
  }
  return Dataset(std::move(columns), false);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Dataset load_csv_file(const std::string& path, const csv::Options& options = {}) {
  return load_csv(read_file(path), options);
}

/// Writes the raw cells back out as CSV.
inline std::string to_csv(const Dataset& data, char delimiter = ',') {
  csv::Table table;
  for (const auto& col : data.columns()) table.header.push_back(col.name);
  table.rows.reserve(data.n());
  for (std::size_t r = 0; r < data.n(); ++r) table.rows.push_back(data.record(r));
  return csv::write(table, delimiter);
}

/// Types every column: continuous iff every cell parses as a finite real.
/// Empty cells are an error; there is no imputation.
inline Dataset infer_kinds(const Dataset& raw) {
  std::string missing;
  std::size_t missing_count = 0;
  for (const auto& col : raw.columns()) {
    for (std::size_t r = 0; r < col.raw.size(); ++r) {
      if (col.raw[r].find_first_not_of(" \t") == std::string::npos) {
        if (missing_count < 20) {
          missing += (missing.empty() ? "" : ", ") + col.name + "[row " + std::to_string(r) + "]";
        }
        ++missing_count;
      }
    }
  }
  if (missing_count > 0) {
    throw ValidationError("missing values (" + std::to_string(missing_count) + "): " + missing +
                          (missing_count > 20 ? ", ..." : ""));
  }

  std::vector<Column> typed = raw.columns();
  for (auto& col : typed) {
    col.numbers.clear();
    col.categories.clear();
    col.codes.clear();
    bool numeric = true;
    std::vector<double> values;
    values.reserve(col.raw.size());
    for (const auto& cell : col.raw) {
      auto v = parse_real(cell);
      if (!v) {
        numeric = false;
        break;
      }
      values.push_back(*v);
    }
    if (numeric && !values.empty()) {
      col.kind = ColumnKind::continuous;
      col.numbers = std::move(values);
      auto [lo, hi] = std::minmax_element(col.numbers.begin(), col.numbers.end());
      col.min = *lo;
      col.max = *hi;
    } else {
      col.kind = ColumnKind::categorical;
      col.categories = col.raw;
      std::sort(col.categories.begin(), col.categories.end());
      col.categories.erase(std::unique(col.categories.begin(), col.categories.end()),
                           col.categories.end());
      col.codes.reserve(col.raw.size());
      for (const auto& cell : col.raw) {
        auto it = std::lower_bound(col.categories.begin(), col.categories.end(), cell);
        col.codes.push_back(static_cast<std::size_t>(it - col.categories.begin()));
      }
    }
  }
  return Dataset(std::move(typed), true);
}

struct TargetSplit {
  std::vector<std::size_t> features;  // column indices, target excluded
  std::vector<double> y;
};

inline TargetSplit split_target(const Dataset& data, const std::string& target) {
  auto idx = data.find(target);
  if (!idx) throw ValidationError("unknown target column '" + target + "'");
  const Column& col = data.column(*idx);
  if (!data.typed()) throw ValidationError("dataset must be typed before splitting");
  if (!col.continuous()) {
    throw ValidationError("target column '" + target +
                          "' is categorical; only continuous targets are supported");
  }
  TargetSplit split;
  for (std::size_t c = 0; c < data.width(); ++c) {
    if (c != *idx) split.features.push_back(c);
  }
  split.y = col.numbers;
  return split;
}

}  // namespace rulelens
