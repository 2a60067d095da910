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

#ifndef PIPEFORGE_MATRIX_HPP_
#define PIPEFORGE_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "pipeforge/errors.hpp"

namespace pipeforge {

/// Dense row-major matrix of doubles. Deliberately minimal: the framework
/// only needs gathers, column concatenation and small linear solves.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      std::size_t c = 0;
      for (double v : row) m.at(r, c++) = v;
      ++r;
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  std::vector<double> row(std::size_t r) const {
    return std::vector<double>(data_.begin() + r * cols_,
                               data_.begin() + (r + 1) * cols_);
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
    return out;
  }

  /// New matrix keeping only the given rows, in the given order.
  Matrix take_rows(const std::vector<std::size_t>& indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i)
      for (std::size_t c = 0; c < cols_; ++c) out.at(i, c) = at(indices[i], c);
    return out;
  }

  /// Horizontal concatenation. Row counts must agree; a 0x0 matrix acts as
  /// the identity element.
  static Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.empty() && a.rows_ == 0) return b;
    if (b.empty() && b.rows_ == 0) return a;
    if (a.rows_ != b.rows_)
      throw DataShapeError("cannot concatenate matrices with " +
                           std::to_string(a.rows_) + " and " +
                           std::to_string(b.rows_) + " rows");
    Matrix out(a.rows_, a.cols_ + b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r) {
      for (std::size_t c = 0; c < a.cols_; ++c) out.at(r, c) = a.at(r, c);
      for (std::size_t c = 0; c < b.cols_; ++c)
        out.at(r, a.cols_ + c) = b.at(r, c);
    }
    return out;
  }

  static Matrix from_column(const std::vector<double>& col) {
    Matrix m(col.size(), 1);
    for (std::size_t r = 0; r < col.size(); ++r) m.at(r, 0) = col[r];
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace linalg {

/// Solves A x = b in place via Gaussian elimination with partial pivoting.
/// A is n x n row-major. Throws SingularFitError when a pivot underflows.
inline std::vector<double> solve(std::vector<double> a, std::vector<double> b,
                                 std::size_t n) {
  constexpr double kPivotTol = 1e-12;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::fabs(a[perm[col] * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double v = std::fabs(a[perm[r] * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < kPivotTol)
      throw SingularFitError("singular linear system (pivot " +
                             std::to_string(best) + ")");
    std::swap(perm[col], perm[pivot]);
    const double diag = a[perm[col] * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[perm[r] * n + col] / diag;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c)
        a[perm[r] * n + c] -= factor * a[perm[col] * n + c];
      b[perm[r]] -= factor * b[perm[col]];
    }
  }

  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[perm[i]];
    for (std::size_t c = i + 1; c < n; ++c) acc -= a[perm[i] * n + c] * x[c];
    x[i] = acc / a[perm[i] * n + i];
  }
  return x;
}

/// Least squares for X beta = y with an intercept column appended last.
/// ridge_lambda penalizes every coefficient except the intercept; with
/// lambda = 0 this is plain OLS and may throw SingularFitError.
inline std::vector<double> solve_least_squares(const Matrix& x,
                                               const std::vector<double>& y,
                                               double ridge_lambda) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols() + 1;  // + intercept
  std::vector<double> xtx(d * d, 0.0);
  std::vector<double> xty(d, 0.0);
  auto feat = [&](std::size_t r, std::size_t c) -> double {
    return c < x.cols() ? x.at(r, c) : 1.0;
  };
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double fi = feat(r, i);
      xty[i] += fi * y[r];
      for (std::size_t j = i; j < d; ++j) xtx[i * d + j] += fi * feat(r, j);
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j) xtx[i * d + j] = xtx[j * d + i];
  for (std::size_t i = 0; i + 1 < d; ++i) xtx[i * d + i] += ridge_lambda;
  return solve(std::move(xtx), std::move(xty), d);
}

}  // namespace linalg
}  // namespace pipeforge

#endif  // PIPEFORGE_MATRIX_HPP_
