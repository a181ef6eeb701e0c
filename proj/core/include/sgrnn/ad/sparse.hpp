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

#ifndef SGRNN_AD_SPARSE_HPP_
#define SGRNN_AD_SPARSE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sgrnn/ad/tensor.hpp"

namespace sgrnn::ad {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// a row; construction enforces this.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values);

  // Duplicate (row, col) pairs are rejected.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  // Drops exact zeros. `cols` may exceed dense.cols() to pad with empty columns.
  static SparseMatrix from_dense(const Tensor& dense, std::size_t cols = 0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const noexcept { return col_indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }

  double at(std::size_t r, std::size_t c) const;
  bool contains(std::size_t r, std::size_t c) const;
  bool is_symmetric(double tol = 0.0) const;

  Tensor to_dense() const;
  SparseMatrix transposed() const;
  SparseMatrix with_cols(std::size_t cols) const;

  // Throws ContractError if any CSR invariant is broken.
  void validate() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

// Untaped s * d.
Tensor spmm(const SparseMatrix& s, const Tensor& d);
// Untaped s^T * d.
Tensor spmm_t(const SparseMatrix& s, const Tensor& d);

}  // namespace sgrnn::ad

#endif  // SGRNN_AD_SPARSE_HPP_
