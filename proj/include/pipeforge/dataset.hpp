/*
 * Copyright 2026 The PipeForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIPEFORGE_DATASET_HPP_
#define PIPEFORGE_DATASET_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pipeforge/errors.hpp"
#include "pipeforge/matrix.hpp"
#include "pipeforge/random.hpp"

namespace pipeforge {

enum class TaskType { classification, regression, ts_forecasting };

inline std::string task_to_string(TaskType t) {
  switch (t) {
    case TaskType::classification: return "classification";
    case TaskType::regression: return "regression";
    case TaskType::ts_forecasting: return "ts_forecasting";
  }
  return "?";
}

inline std::optional<TaskType> task_from_string(const std::string& s) {
  if (s == "classification") return TaskType::classification;
  if (s == "regression") return TaskType::regression;
  if (s == "ts_forecasting" || s == "ts") return TaskType::ts_forecasting;
  return std::nullopt;
}

/// Feature matrix + target + task descriptor. For time-series forecasting
/// the target vector holds the ordered series and the feature matrix has
/// zero columns until a lagging operation runs inside a pipeline.
struct Dataset {
  Matrix features;
  std::vector<double> target;
  std::vector<std::string> feature_names;
  TaskType task = TaskType::regression;
  int forecast_horizon = 0;  // ts only, elements
  int num_classes = 0;       // classification only
  /// Per-column label encodings captured by load_csv (column name ->
  /// category string -> code). Entry "" is the target column's encoding.
  std::map<std::string, std::map<std::string, std::int64_t>> encodings;

  std::size_t rows() const {
    return task == TaskType::ts_forecasting ? target.size() : features.rows();
  }

  void check_consistent() const {
    if (task != TaskType::ts_forecasting &&
        features.rows() != target.size())
      throw DataShapeError("feature rows (" + std::to_string(features.rows()) +
                           ") != target length (" +
                           std::to_string(target.size()) + ")");
  }
};

namespace detail {

// RFC-4180 style line splitting: quoted fields, "" escapes. The physical
// line is assumed complete (no embedded newlines in fields).
inline std::vector<std::string> split_csv_line(const std::string& line,
                                               std::size_t row_for_errors) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  if (in_quotes)
    throw ParseError("unterminated quoted field", row_for_errors, fields.size());
  fields.push_back(cur);
  return fields;
}

inline bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    *out = std::stod(s, &pos);
  } catch (...) {
    return false;
  }
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  return pos == s.size();
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Loads an RFC-4180 style CSV (header row required, UTF-8). Numeric columns
/// parse as-is; non-numeric columns are label-encoded with the mapping kept
/// on the dataset; blank cells become NaN so imputation operations can find
/// them. For ts_forecasting only the target column is read, in file order.
inline Dataset load_csv(const std::string& path, TaskType task,
                        const std::string& target_column, int horizon = 0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string header_line;
  if (!std::getline(in, header_line))
    throw ParseError("empty file", 0, 0);
  const auto header = detail::split_csv_line(header_line, 0);

  std::size_t target_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (detail::trim(header[i]) == target_column) target_idx = i;
  if (target_idx == header.size()) throw MissingTargetError(target_column);

  std::vector<std::vector<std::string>> cells;  // row-major raw strings
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line, row_no);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       row_no, fields.size());
    cells.push_back(std::move(fields));
  }
  const std::size_t n = cells.size();

  Dataset ds;
  ds.task = task;
  ds.forecast_horizon = horizon;

  // Decide per column: numeric if every non-empty cell parses as a number.
  std::vector<bool> numeric(header.size(), true);
  for (std::size_t c = 0; c < header.size(); ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      const std::string v = detail::trim(cells[r][c]);
      double tmp;
      if (!v.empty() && !detail::parse_double(v, &tmp)) {
        numeric[c] = false;
        break;
      }
    }
  }

  auto encode_column = [&](std::size_t c) {
    std::map<std::string, std::int64_t> mapping;
    std::vector<std::string> values;
    values.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      auto v = detail::trim(cells[r][c]);
      values.push_back(v);
      if (!v.empty()) mapping.emplace(v, 0);
    }
    std::int64_t code = 0;
    for (auto& [key, val] : mapping) val = code++;  // sorted-string order
    return std::pair(mapping, values);
  };

  auto column_values = [&](std::size_t c) {
    std::vector<double> out(n);
    if (numeric[c]) {
      for (std::size_t r = 0; r < n; ++r) {
        const std::string v = detail::trim(cells[r][c]);
        if (v.empty()) {
          out[r] = std::numeric_limits<double>::quiet_NaN();
        } else {
          double parsed;
          detail::parse_double(v, &parsed);
          out[r] = parsed;
        }
      }
    } else {
      auto [mapping, values] = encode_column(c);
      for (std::size_t r = 0; r < n; ++r)
        out[r] = values[r].empty()
                     ? std::numeric_limits<double>::quiet_NaN()
                     : static_cast<double>(mapping.at(values[r]));
      ds.encodings[detail::trim(header[c])] = std::move(mapping);
    }
    return out;
  };

  // Target first.
  ds.target = column_values(target_idx);
  for (std::size_t r = 0; r < n; ++r)
    if (std::isnan(ds.target[r]))
      throw ParseError("missing target value", r + 1, target_idx);

  if (task == TaskType::ts_forecasting) {
    ds.features = Matrix(n, 0);
    return ds;
  }

  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != target_idx) feature_cols.push_back(c);

  ds.features = Matrix(n, feature_cols.size());
  for (std::size_t j = 0; j < feature_cols.size(); ++j) {
    ds.feature_names.push_back(detail::trim(header[feature_cols[j]]));
    auto col = column_values(feature_cols[j]);
    for (std::size_t r = 0; r < n; ++r) ds.features.at(r, j) = col[r];
  }

  if (task == TaskType::classification) {
    int max_label = 0;
    for (double v : ds.target) {
      if (v < 0 || v != std::floor(v))
        throw ParseError("classification target must be integer labels >= 0",
                         0, target_idx);
      max_label = std::max(max_label, static_cast<int>(v));
    }
    ds.num_classes = max_label + 1;
  }
  ds.check_consistent();
  return ds;
}

/// Train/test split. Tabular tasks shuffle by seed then split; ts splits
/// chronologically with the last `forecast_horizon` elements (or the ratio
/// tail when no horizon is set) as the test side, never shuffled.
inline std::pair<Dataset, Dataset> split(const Dataset& data, double ratio,
                                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw TooFewRowsError("split ratio must lie in (0, 1)");
  const std::size_t n = data.rows();

  if (data.task == TaskType::ts_forecasting) {
    std::size_t test_n = data.forecast_horizon > 0
                             ? static_cast<std::size_t>(data.forecast_horizon)
                             : n - static_cast<std::size_t>(ratio * n);
    if (test_n == 0 || test_n >= n)
      throw TooFewRowsError("time series too short for horizon " +
                            std::to_string(test_n));
    Dataset train = data, test = data;
    train.target.assign(data.target.begin(), data.target.end() - test_n);
    test.target.assign(data.target.end() - test_n, data.target.end());
    train.features = Matrix(train.target.size(), 0);
    test.features = Matrix(test.target.size(), 0);
    return {train, test};
  }

  std::size_t train_n = static_cast<std::size_t>(ratio * n);
  if (train_n == 0 || train_n >= n)
    throw TooFewRowsError("split of " + std::to_string(n) +
                          " rows at ratio " + std::to_string(ratio) +
                          " leaves an empty side");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(mix64(seed, 0x73706c6974ULL));  // "split"
  rng.shuffle(idx);

  auto take = [&](std::size_t begin, std::size_t end) {
    Dataset out = data;
    std::vector<std::size_t> rows(idx.begin() + begin, idx.begin() + end);
    out.features = data.features.take_rows(rows);
    out.target.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.target[i] = data.target[rows[i]];
    return out;
  };
  return {take(0, train_n), take(train_n, n)};
}

}  // namespace pipeforge

#endif  // PIPEFORGE_DATASET_HPP_
