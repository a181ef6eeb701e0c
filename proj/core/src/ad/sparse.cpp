/*
 * Copyright 2026 The SGRNN Authors.
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

#include "sgrnn/ad/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "sgrnn/errors.hpp"

namespace sgrnn::ad {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<std::size_t> row_offsets,
                           std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  validate();
}

void SparseMatrix::validate() const {
  if (row_offsets_.size() != rows_ + 1) throw ContractError("CSR: row_offsets size != rows+1");
  if (row_offsets_.front() != 0) throw ContractError("CSR: row_offsets[0] != 0");
  if (row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
    throw ContractError("CSR: last offset does not equal entry count");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    if (row_offsets_[r] > row_offsets_[r + 1]) throw ContractError("CSR: offsets decrease");
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (col_indices_[k] >= cols_) throw ContractError("CSR: column index out of range");
      if (k > row_offsets_[r] && col_indices_[k] <= col_indices_[k - 1]) {
        throw ContractError("CSR: column indices not strictly increasing in row " +
                            std::to_string(r));
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::size_t> offsets(rows + 1, 0);
  std::vector<std::size_t> cols_idx;
  std::vector<double> values;
  cols_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto& t = triplets[i];
    if (t.row >= rows || t.col >= cols) {
      throw ShapeError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                       ") outside " + Shape{rows, cols}.str());
    }
    if (i > 0 && triplets[i - 1].row == t.row && triplets[i - 1].col == t.col) {
      throw ContractError("duplicate triplet (" + std::to_string(t.row) + "," +
                          std::to_string(t.col) + ")");
    }
    ++offsets[t.row + 1];
    cols_idx.push_back(t.col);
    values.push_back(t.value);
  }
  for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] += offsets[r];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(cols_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> offsets(n + 1), cols(n);
  for (std::size_t i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    cols[i] = i;
  }
  return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const Tensor& dense, std::size_t cols) {
  if (cols == 0) cols = dense.cols();
  if (cols < dense.cols()) throw ShapeError("from_dense: cols smaller than dense width");
  std::vector<std::size_t> offsets(dense.rows() + 1, 0);
  std::vector<std::size_t> idx;
  std::vector<double> values;
  for (std::size_t r = 0; r < dense.rows(); ++r) {
    for (std::size_t c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0) {
        idx.push_back(c);
        values.push_back(dense(r, c));
      }
    }
    offsets[r + 1] = values.size();
  }
  return SparseMatrix(dense.rows(), cols, std::move(offsets), std::move(idx), std::move(values));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
  const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
  const auto it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

bool SparseMatrix::contains(std::size_t r, std::size_t c) const {
  const auto begin = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
  const auto end = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
  return std::binary_search(begin, end, c);
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      const std::size_t c = col_indices_[k];
      if (!contains(c, r)) return false;
      if (std::abs(at(c, r) - values_[k]) > tol) return false;
    }
  }
  return true;
}

Tensor SparseMatrix::to_dense() const {
  Tensor out(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      out(r, col_indices_[k]) = values_[k];
  return out;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k)
      t.push_back({col_indices_[k], r, values_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::with_cols(std::size_t cols) const {
  if (cols < cols_) throw ShapeError("with_cols cannot shrink a sparse matrix");
  SparseMatrix out = *this;
  out.cols_ = cols;
  return out;
}

Tensor spmm(const SparseMatrix& s, const Tensor& d) {
  if (s.cols() != d.rows()) {
    throw ShapeError("sparse_dense_matmul " + Shape{s.rows(), s.cols()}.str() + " x " +
                     d.shape().str());
  }
  const std::size_t m = d.cols();
  Tensor out(s.rows(), m);
  const auto& off = s.row_offsets();
  const auto& idx = s.col_indices();
  const auto& val = s.values();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    double* orow = &out(r, 0);
    for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
      const double v = val[k];
      const double* drow = &d.values()[idx[k] * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += v * drow[j];
    }
  }
  return out;
}

Tensor spmm_t(const SparseMatrix& s, const Tensor& d) {
  if (s.rows() != d.rows()) {
    throw ShapeError("sparse_dense_matmul^T " + Shape{s.rows(), s.cols()}.str() + " x " +
                     d.shape().str());
  }
  const std::size_t m = d.cols();
  Tensor out(s.cols(), m);
  const auto& off = s.row_offsets();
  const auto& idx = s.col_indices();
  const auto& val = s.values();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const double* drow = &d.values()[r * m];
    for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
      const double v = val[k];
      double* orow = &out(idx[k], 0);
      for (std::size_t j = 0; j < m; ++j) orow[j] += v * drow[j];
    }
  }
  return out;
}

}  // namespace sgrnn::ad
