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

// RFC 4180 reader and writer. Cells stay as raw strings; typing happens in
// dataset.hpp.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rulelens/error.hpp"

namespace rulelens::csv {

struct Options {
  char delimiter = ',';
  bool has_header = true;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

struct RawRecord {
  std::vector<std::string> cells;
  std::size_t line = 0;  // 1-based line where the record starts
};

inline std::vector<RawRecord> split_records(std::string_view text, char delim) {
  std::vector<RawRecord> records;
  RawRecord current;
  std::string cell;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_cell = [&] {
    current.cells.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_record = [&] {
    end_cell();
    // A physically empty line carries no record.
    if (record_has_content || current.cells.size() > 1) {
      records.push_back(std::move(current));
    }
    current = RawRecord{};
    current.line = line;
    record_has_content = false;
  };

  // Skip a UTF-8 byte order mark.
  std::size_t i = 0;
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB &&
      static_cast<unsigned char>(text[2]) == 0xBF) {
    i = 3;
  }

  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (!cell.empty() || cell_was_quoted) {
        throw ValidationError("csv: unexpected quote inside unquoted cell at line " +
                              std::to_string(line));
      }
      in_quotes = true;
      cell_was_quoted = true;
      record_has_content = true;
    } else if (c == delim) {
      end_cell();
      record_has_content = true;
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++line;
      end_record();
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      if (cell_was_quoted) {
        throw ValidationError("csv: characters after closing quote at line " +
                              std::to_string(line));
      }
      cell.push_back(c);
      record_has_content = true;
    }
  }
  if (in_quotes) {
    throw ValidationError("csv: unterminated quoted cell starting before line " +
                          std::to_string(line));
  }
  if (record_has_content || !cell.empty() || current.cells.size() > 0) {
    end_record();
  }
  return records;
}

}  // namespace detail

/// Parses CSV text. Ragged rows, empty input and duplicate header names are
/// structural errors.
inline Table parse(std::string_view text, const Options& options = {}) {
  auto records = detail::split_records(text, options.delimiter);
  if (records.empty()) throw ValidationError("csv: empty input");

  Table table;
  std::size_t first = 0;
  const std::size_t width = records.front().cells.size();
  if (options.has_header) {
    table.header = std::move(records.front().cells);
    first = 1;
    for (std::size_t a = 0; a < table.header.size(); ++a) {
      if (table.header[a].empty()) {
        throw ValidationError("csv: empty header name in column " + std::to_string(a));
      }
      for (std::size_t b = a + 1; b < table.header.size(); ++b) {
        if (table.header[a] == table.header[b]) {
          throw ValidationError("csv: duplicate header name '" + table.header[a] + "'");
        }
      }
    }
  } else {
    for (std::size_t c = 0; c < width; ++c) table.header.push_back("col" + std::to_string(c + 1));
  }

  table.rows.reserve(records.size() - first);
  for (std::size_t r = first; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.cells.size() != width) {
      throw ValidationError("csv: ragged row " + std::to_string(r - first) + " (line " +
                            std::to_string(rec.line) + ") has " +
                            std::to_string(rec.cells.size()) + " cells, expected " +
                            std::to_string(width));
    }
    table.rows.push_back(std::move(rec.cells));
  }
  return table;
}

inline std::string quote_cell(const std::string& cell, char delimiter) {
  const bool needs = cell.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string::npos;
  if (!needs) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string write(const Table& table, char delimiter = ',') {
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(delimiter);
      out += quote_cell(row[c], delimiter);
    }
    out.push_back('\n');
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
  return out;
}

}  // namespace rulelens::csv
