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

#include "sgrnn/gnn/layers.hpp"

#include <cmath>

#include "sgrnn/errors.hpp"

namespace sgrnn::gnn {

std::string_view to_string(GnnType type) {
  switch (type) {
    case GnnType::kGcn: return "gcn";
    case GnnType::kSage: return "sage";
    case GnnType::kGin: return "gin";
  }
  return "?";
}

GnnType parse_gnn_type(std::string_view name) {
  if (name == "gcn") return GnnType::kGcn;
  if (name == "sage" || name == "graphsage") return GnnType::kSage;
  if (name == "gin") return GnnType::kGin;
  throw ContractError("unknown gnn type '" + std::string(name) + "'");
}

ad::Var activate(ad::Var x, Activation act) {
  switch (act) {
    case Activation::kLinear: return x;
    case Activation::kRelu: return ad::relu(x);
    case Activation::kSigmoid: return ad::sigmoid(x);
    case Activation::kTanh: return ad::tanh(x);
    case Activation::kSoftplus: return ad::softplus(x);
  }
  return x;
}

NormalizedAdjacency normalize_adjacency(const ad::SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw ContractError("normalize_adjacency: matrix is not square");
  }
  if (!a.is_symmetric(1e-12)) {
    throw ContractError("normalize_adjacency: matrix is not symmetric");
  }
  const std::size_t n = a.rows();
  const auto& off = a.row_offsets();
  const auto& col = a.col_indices();
  const auto& val = a.values();

  std::vector<double> degree(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = off[i]; k < off[i + 1]; ++k)
      if (col[k] != i) degree[i] += val[k];
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<std::size_t> out_off{0};
  std::vector<std::size_t> out_col;
  std::vector<double> out_val;
  out_off.reserve(n + 1);
  out_col.reserve(a.nnz() + n);
  out_val.reserve(a.nnz() + n);
  for (std::size_t i = 0; i < n; ++i) {
    bool diag_done = false;
    auto emit_diag = [&] {
      out_col.push_back(i);
      out_val.push_back(inv_sqrt[i] * inv_sqrt[i]);
      diag_done = true;
    };
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) {
      if (col[k] == i) continue;  // explicit self loops are replaced by the +I term
      if (!diag_done && col[k] > i) emit_diag();
      out_col.push_back(col[k]);
      out_val.push_back(val[k] * inv_sqrt[i] * inv_sqrt[col[k]]);
    }
    if (!diag_done) emit_diag();
    out_off.push_back(out_col.size());
  }
  return {ad::SparseMatrix(n, n, std::move(out_off), std::move(out_col), std::move(out_val))};
}

GraphOperators::GraphOperators(ad::SparseMatrix adjacency)
    : raw_(std::move(adjacency)), normalized_(normalize_adjacency(raw_)) {
  std::vector<double> values = raw_.values();
  const auto& off = raw_.row_offsets();
  for (std::size_t i = 0; i < raw_.rows(); ++i) {
    double deg = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) deg += values[k];
    if (deg != 0.0)
      for (std::size_t k = off[i]; k < off[i + 1]; ++k) values[k] /= deg;
  }
  mean_ = ad::SparseMatrix(raw_.rows(), raw_.cols(), raw_.row_offsets(), raw_.col_indices(),
                           std::move(values));
}

ad::Var project(std::span<const InputBlock> blocks, ad::Var w) {
  if (blocks.empty()) throw ShapeError("project: no input blocks");
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.width;
  if (total != w.rows()) {
    throw ShapeError("project: input width " + std::to_string(total) + " != weight rows " +
                     std::to_string(w.rows()));
  }
  const std::size_t n = blocks.front().rows();
  ad::Var out;
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    if (b.rows() != n) throw ShapeError("project: input blocks disagree on row count");
    if (b.cols() > b.width) {
      throw ShapeError("project: block has " + std::to_string(b.cols()) +
                       " columns but declared width " + std::to_string(b.width));
    }
    if (b.cols() > 0) {
      ad::Var slice = (offset == 0 && b.cols() == w.rows()) ? w
                                                             : ad::row_slice(w, offset, offset + b.cols());
      ad::Var part = b.sparse ? ad::sparse_dense_matmul(*b.sparse, slice) : ad::matmul(b.dense, slice);
      out = out.valid() ? ad::add(out, part) : part;
    }
    offset += b.width;
  }
  if (!out.valid()) {
    // Every block is zero-width; the product is all zeros.
    out = w.tape().constant(ad::Tensor(n, w.cols()));
  }
  return out;
}

namespace {

void check_rows(std::size_t graph_nodes, std::span<const InputBlock> h) {
  if (!h.empty() && h.front().rows() != graph_nodes) {
    throw ShapeError("layer input has " + std::to_string(h.front().rows()) +
                     " rows for a graph of " + std::to_string(graph_nodes) + " nodes");
  }
}

}  // namespace

ad::Var gcn_forward(const NormalizedAdjacency& adj, std::span<const InputBlock> h,
                    const GcnLayerParams& p, Activation act) {
  check_rows(adj.matrix.rows(), h);
  return activate(ad::sparse_dense_matmul(adj.matrix, project(h, p.weight)), act);
}

ad::Var sage_forward(const GraphOperators& graph, std::span<const InputBlock> h,
                     const SageLayerParams& p, Activation act) {
  check_rows(graph.num_nodes(), h);
  ad::Var self = project(h, p.w_self);
  ad::Var neigh = ad::sparse_dense_matmul(graph.mean(), project(h, p.w_neigh));
  return activate(ad::add(self, neigh), act);
}

ad::Var gin_forward(const ad::SparseMatrix& adj, std::span<const InputBlock> h,
                    const GinLayerParams& p, Activation act) {
  check_rows(adj.rows(), h);
  if (p.eps.rows() != 1 || p.eps.cols() != 1) throw ShapeError("gin: eps must be 1x1");
  // The first perceptron layer is linear, so it commutes with aggregation.
  ad::Var x = project(h, p.w1);
  ad::Var self = ad::scalar_mul(ad::add_scalar(p.eps, 1.0), x);
  ad::Var agg = ad::add(self, ad::sparse_dense_matmul(adj, x));
  return activate(ad::matmul(ad::relu(agg), p.w2), act);
}

ad::Var fc_forward(std::span<const InputBlock> h, ad::Var w, Activation act) {
  return activate(project(h, w), act);
}

ad::Var gcn_forward(const NormalizedAdjacency& adj, ad::Var h, const GcnLayerParams& p,
                    Activation act) {
  const InputBlock b = InputBlock::of(h);
  return gcn_forward(adj, std::span<const InputBlock>(&b, 1), p, act);
}

ad::Var sage_forward(const GraphOperators& graph, ad::Var h, const SageLayerParams& p,
                     Activation act) {
  const InputBlock b = InputBlock::of(h);
  return sage_forward(graph, std::span<const InputBlock>(&b, 1), p, act);
}

ad::Var gin_forward(const ad::SparseMatrix& adj, ad::Var h, const GinLayerParams& p,
                    Activation act) {
  const InputBlock b = InputBlock::of(h);
  return gin_forward(adj, std::span<const InputBlock>(&b, 1), p, act);
}

ad::Var graph_layer(const GraphOperators& graph, std::span<const InputBlock> h,
                    const GraphLayerParams& p, Activation act) {
  switch (p.type) {
    case GnnType::kGcn: return gcn_forward(graph.normalized(), h, {p.w0}, act);
    case GnnType::kSage: return sage_forward(graph, h, {p.w0, p.w1}, act);
    case GnnType::kGin: return gin_forward(graph.raw(), h, {p.w0, p.w1, p.eps}, act);
  }
  throw ContractError("graph_layer: unknown type");
}

}  // namespace sgrnn::gnn
