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

#ifndef SGRNN_GNN_LAYERS_HPP_
#define SGRNN_GNN_LAYERS_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgrnn/ad/ops.hpp"
#include "sgrnn/ad/sparse.hpp"
#include "sgrnn/ad/tape.hpp"

namespace sgrnn::gnn {

enum class GnnType { kGcn, kSage, kGin };
enum class Activation { kLinear, kRelu, kSigmoid, kTanh, kSoftplus };

std::string_view to_string(GnnType type);
GnnType parse_gnn_type(std::string_view name);  // throws ContractError

ad::Var activate(ad::Var x, Activation act);

/// D^-1/2 (A + I) D^-1/2 with D the degree of A + I.
struct NormalizedAdjacency {
  ad::SparseMatrix matrix;
};

// Throws ContractError unless `a` is square and symmetric.
NormalizedAdjacency normalize_adjacency(const ad::SparseMatrix& a);

/// Everything the three layer types need from one snapshot's graph.
class GraphOperators {
 public:
  GraphOperators() = default;
  explicit GraphOperators(ad::SparseMatrix adjacency);

  std::size_t num_nodes() const noexcept { return raw_.rows(); }
  const ad::SparseMatrix& raw() const noexcept { return raw_; }
  const NormalizedAdjacency& normalized() const noexcept { return normalized_; }
  // D^-1 A; rows of isolated nodes are empty.
  const ad::SparseMatrix& mean() const noexcept { return mean_; }

 private:
  ad::SparseMatrix raw_;
  NormalizedAdjacency normalized_;
  ad::SparseMatrix mean_;
};

/// One column block of a layer input. A layer whose input is
/// concat(b_1, ..., b_k) owns a weight with sum(width_k) rows; block k
/// multiplies rows [offset_k, offset_k + cols(b_k)). A block may be narrower
/// than its declared width (identity features of a smaller snapshot).
struct InputBlock {
  ad::Var dense;
  const ad::SparseMatrix* sparse = nullptr;
  std::size_t width = 0;

  static InputBlock of(ad::Var v) { return {v, nullptr, v.cols()}; }
  static InputBlock of(ad::Var v, std::size_t width) { return {v, nullptr, width}; }
  static InputBlock of(const ad::SparseMatrix& s, std::size_t width) { return {{}, &s, width}; }

  std::size_t rows() const { return sparse ? sparse->rows() : dense.rows(); }
  std::size_t cols() const { return sparse ? sparse->cols() : dense.cols(); }
};

// concat(blocks) * w, computed block by block.
ad::Var project(std::span<const InputBlock> blocks, ad::Var w);

struct GcnLayerParams {
  ad::Var weight;
};

struct SageLayerParams {
  ad::Var w_self;
  ad::Var w_neigh;
};

// Two-layer perceptron relu(x W1) W2 plus the scalar eps (1x1).
struct GinLayerParams {
  ad::Var w1;
  ad::Var w2;
  ad::Var eps;
};

ad::Var gcn_forward(const NormalizedAdjacency& adj, std::span<const InputBlock> h,
                    const GcnLayerParams& p, Activation act);
ad::Var sage_forward(const GraphOperators& graph, std::span<const InputBlock> h,
                     const SageLayerParams& p, Activation act);
ad::Var gin_forward(const ad::SparseMatrix& adj, std::span<const InputBlock> h,
                    const GinLayerParams& p, Activation act = Activation::kLinear);
// Non-graph layer act(h W).
ad::Var fc_forward(std::span<const InputBlock> h, ad::Var w, Activation act);

// Single-block conveniences.
ad::Var gcn_forward(const NormalizedAdjacency& adj, ad::Var h, const GcnLayerParams& p,
                    Activation act);
ad::Var sage_forward(const GraphOperators& graph, ad::Var h, const SageLayerParams& p,
                     Activation act);
ad::Var gin_forward(const ad::SparseMatrix& adj, ad::Var h, const GinLayerParams& p,
                    Activation act = Activation::kLinear);

/// Type-erased parameters of one graph layer: GCN uses w0; SAGE uses
/// w0 (self) and w1 (neighbours); GIN uses w0, w1 and eps.
struct GraphLayerParams {
  GnnType type = GnnType::kGcn;
  ad::Var w0;
  ad::Var w1;
  ad::Var eps;
};

ad::Var graph_layer(const GraphOperators& graph, std::span<const InputBlock> h,
                    const GraphLayerParams& p, Activation act);

}  // namespace sgrnn::gnn

#endif  // SGRNN_GNN_LAYERS_HPP_
