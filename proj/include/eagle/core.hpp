// Copyright 2026 The EAGLE Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EAGLE_CORE_HPP_
#define EAGLE_CORE_HPP_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "eagle/errors.hpp"

namespace eagle {

/// Norms at or below this are treated as zero by proj() and friends.
inline constexpr double kNormFloor = 1e-12;

/// Tolerance used when checking that stored embeddings are unit-norm.
inline constexpr double kUnitTolerance = 1e-9;

using DenseVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Dense kernels. All reductions run in ascending index order.

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

/// v / ||v||, or `fallback` when ||v|| <= kNormFloor (including underflow to zero).
inline DenseVector proj(std::span<const double> v, std::span<const double> fallback) {
  if (v.size() != fallback.size()) throw InvalidInput("proj: fallback dimension mismatch");
  if (!all_finite(v) || !all_finite(fallback)) throw InvalidInput("proj: non-finite entry");
  const double nv = norm(v);
  if (!(nv > kNormFloor)) return DenseVector(fallback.begin(), fallback.end());
  DenseVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / nv;
  return out;
}

/// Cosine similarity clamped to [-1, 1]. Throws on a zero-norm argument.
inline double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InvalidInput("cosine: dimension mismatch");
  const double nu = norm(u), nv = norm(v);
  if (!(nu > 0.0) || !(nv > 0.0)) throw InvalidInput("cosine: zero-norm argument");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline DenseVector basis_vector(std::size_t dim, std::size_t axis) {
  DenseVector e(dim, 0.0);
  if (axis < dim) e[axis] = 1.0;
  return e;
}

// ---------------------------------------------------------------------------

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------

/// Compressed sparse row matrix. Within each row the column indices are
/// strictly increasing and no stored value is an exact zero.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  struct RowView {
    std::span<const std::size_t> indices;
    std::span<const double> values;
    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }
  };

  SparseMatrix() : row_offsets_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

  /// Duplicate (row, col) entries are summed; entries that end up exactly zero are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
      if (t.row >= rows || t.col >= cols) throw BoundsError("from_triplets: index out of range");
      if (!std::isfinite(t.value)) throw InvalidInput("from_triplets: non-finite value");
    }
    // Stable so that duplicates are summed in insertion order.
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    m.col_indices_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    std::size_t p = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      while (p < triplets.size() && triplets[p].row == r) {
        const std::size_t c = triplets[p].col;
        double v = 0.0;
        while (p < triplets.size() && triplets[p].row == r && triplets[p].col == c) v += triplets[p++].value;
        if (v != 0.0) {
          m.col_indices_.push_back(c);
          m.values_.push_back(v);
        }
      }
      m.row_offsets_[r + 1] = m.col_indices_.size();
    }
    return m;
  }

  /// Adopts CSR arrays after validating every structural invariant.
  static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                               std::vector<std::size_t> col_indices, std::vector<double> values) {
    if (row_offsets.size() != rows + 1 || row_offsets.front() != 0 || row_offsets.back() != col_indices.size() ||
        col_indices.size() != values.size())
      throw InvalidInput("from_csr: inconsistent array lengths");
    for (std::size_t r = 0; r < rows; ++r) {
      if (row_offsets[r] > row_offsets[r + 1]) throw InvalidInput("from_csr: row offsets decrease");
      for (std::size_t p = row_offsets[r]; p < row_offsets[r + 1]; ++p) {
        if (col_indices[p] >= cols) throw BoundsError("from_csr: column index out of range");
        if (p > row_offsets[r] && col_indices[p] <= col_indices[p - 1])
          throw InvalidInput("from_csr: column indices not strictly increasing");
        if (values[p] == 0.0 || !std::isfinite(values[p])) throw InvalidInput("from_csr: zero or non-finite value");
      }
    }
    SparseMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.row_offsets_ = std::move(row_offsets);
    m.col_indices_ = std::move(col_indices);
    m.values_ = std::move(values);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return col_indices_.size(); }

  RowView row(std::size_t i) const {
    if (i >= rows_) throw BoundsError("SparseMatrix::row: index out of range");
    const std::size_t b = row_offsets_[i], e = row_offsets_[i + 1];
    return {std::span<const std::size_t>(col_indices_).subspan(b, e - b),
            std::span<const double>(values_).subspan(b, e - b)};
  }

  double at(std::size_t i, std::size_t j) const {
    if (j >= cols_) throw BoundsError("SparseMatrix::at: column out of range");
    const RowView r = row(i);
    auto it = std::lower_bound(r.indices.begin(), r.indices.end(), j);
    if (it == r.indices.end() || *it != j) return 0.0;
    return r.values[static_cast<std::size_t>(it - r.indices.begin())];
  }

  SparseMatrix transpose() const {
    std::vector<std::size_t> counts(cols_ + 1, 0);
    for (std::size_t c : col_indices_) ++counts[c + 1];
    for (std::size_t c = 0; c < cols_; ++c) counts[c + 1] += counts[c];
    std::vector<std::size_t> idx(nnz());
    std::vector<double> val(nnz());
    std::vector<std::size_t> next(counts.begin(), counts.end() - 1);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
        const std::size_t q = next[col_indices_[p]]++;
        idx[q] = r;
        val[q] = values_[p];
      }
    SparseMatrix t;
    t.rows_ = cols_;
    t.cols_ = rows_;
    t.row_offsets_ = std::move(counts);
    t.col_indices_ = std::move(idx);
    t.values_ = std::move(val);
    return t;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) d(r, col_indices_[p]) = values_[p];
    return d;
  }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// <m[row], v>, accumulated in ascending column order.
inline double sparse_row_dot(const SparseMatrix& m, std::size_t row, std::span<const double> v) {
  if (row >= m.rows()) throw BoundsError("sparse_row_dot: row out of range");
  if (v.size() != m.cols()) throw InvalidInput("sparse_row_dot: dimension mismatch");
  const auto r = m.row(row);
  double s = 0.0;
  for (std::size_t p = 0; p < r.size(); ++p) s += r.values[p] * v[r.indices[p]];
  return s;
}

/// out += scale * m[row]
inline void sparse_row_axpy(const SparseMatrix& m, std::size_t row, double scale, std::span<double> out) {
  if (out.size() != m.cols()) throw InvalidInput("sparse_row_axpy: dimension mismatch");
  const auto r = m.row(row);
  for (std::size_t p = 0; p < r.size(); ++p) out[r.indices[p]] += scale * r.values[p];
}

inline double sparse_row_norm(const SparseMatrix& m, std::size_t row) { return norm(m.row(row).values); }

/// Copy of `m` with each nonzero row scaled to unit L2 norm.
inline SparseMatrix normalize_rows(const SparseMatrix& m) {
  std::vector<double> values = m.values();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double nr = sparse_row_norm(m, r);
    if (!(nr > 0.0)) continue;
    for (std::size_t p = m.row_offsets()[r]; p < m.row_offsets()[r + 1]; ++p) values[p] /= nr;
  }
  // Division by a positive norm cannot produce an exact zero from a nonzero
  // unless it underflows; drop any such entry through the triplet path.
  bool underflow = std::any_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
  if (!underflow) return SparseMatrix::from_csr(m.rows(), m.cols(), m.row_offsets(), m.col_indices(), std::move(values));
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t p = m.row_offsets()[r]; p < m.row_offsets()[r + 1]; ++p) t.push_back({r, m.col_indices()[p], values[p]});
  return SparseMatrix::from_triplets(m.rows(), m.cols(), std::move(t));
}

// ---------------------------------------------------------------------------

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace eagle

#endif  // EAGLE_CORE_HPP_
