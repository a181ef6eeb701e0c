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

#ifndef SGRNN_AD_OPS_HPP_
#define SGRNN_AD_OPS_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sgrnn/ad/sparse.hpp"
#include "sgrnn/ad/tape.hpp"
#include "sgrnn/ad/tensor.hpp"

// Differentiable operations. Every op appends exactly one node to the tape of
// its operands. Sparse operands are held by reference and must outlive the
// backward pass.
namespace sgrnn::ad {

Var matmul(Var a, Var b);
// z * z^T
Var gram(Var z);
Var sparse_dense_matmul(const SparseMatrix& s, Var d);
// Same product, but the stored entries of `pattern` are replaced by `values`
// (nnz x 1), which then receive gradient.
Var sparse_dense_matmul(const SparseMatrix& pattern, Var values, Var d);

// Elementwise; `b` may also be a 1 x cols row vector broadcast over rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double factor);
// s (1x1) times every entry of a.
Var scalar_mul(Var s, Var a);
Var add_scalar(Var a, double c);

Var log(Var a);
Var square(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
// ln(1 + e^x), switching to x + ln(1 + e^-x) above 30.
Var softplus(Var a);

Var sum(Var a);
Var mean(Var a);

Var row_slice(Var a, std::size_t begin, std::size_t end);
// Keeps the first min(rows, n) rows and zero-fills the rest.
Var resize_rows(Var a, std::size_t n);
Var concat_cols(std::span<const Var> parts);

struct FixedBNConfig {
  double gamma = 0.8;
  double epsilon = 1e-5;

  // Throws ContractError unless gamma > 0 and epsilon > 0.
  void validate() const;
};

/// Batch normalization with a frozen scale.
///
/// Each column of `l` (b x d) is standardized with its biased batch statistics
/// and mapped to gamma * x_hat + beta, where the batch std is floored at
/// `epsilon` (so a constant column maps to beta). `gamma` must be a constant node: it is a
/// parent on the tape but never accumulates gradient. Requires b >= 2.
Var fixed_batch_norm(Var l, Var beta, Var gamma, double epsilon);
Var fixed_batch_norm(Var l, Var beta, const FixedBNConfig& cfg);

struct BceOptions {
  // Multiplier on the log-loss of positive pairs.
  double pos_weight = 1.0;
  // Overall multiplier applied after averaging.
  double norm = 1.0;
  bool exclude_diagonal = true;
};

/// Mean weighted binary cross-entropy of the inner-product decoder over every
/// ordered node pair, with targets read from the sparsity pattern of
/// `targets`. Returns a 1x1 loss (a negative log-likelihood).
Var inner_product_bce(Var z, const SparseMatrix& targets, const BceOptions& opts);

using NodePair = std::pair<std::size_t, std::size_t>;

// P x 1 column of z_i . z_j for each pair.
Var pair_logits(Var z, std::span<const NodePair> pairs);
// Mean of weighted BCE over a column of logits; targets are 0/1.
Var bce_with_logits(Var logits, const Tensor& targets, double pos_weight = 1.0);

// Plain elementwise helpers shared with evaluation code.
double softplus(double x);
double sigmoid(double x);

}  // namespace sgrnn::ad

#endif  // SGRNN_AD_OPS_HPP_
