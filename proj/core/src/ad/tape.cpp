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

#include "sgrnn/ad/tape.hpp"

#include "sgrnn/errors.hpp"

namespace sgrnn::ad {

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kConstant: return "constant";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kGram: return "gram";
    case OpKind::kSpMM: return "spmm";
    case OpKind::kSpMMValues: return "spmm_values";
    case OpKind::kAdd: return "add";
    case OpKind::kAddRowBroadcast: return "add_row";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kScale: return "scale";
    case OpKind::kScalarMul: return "scalar_mul";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kLog: return "log";
    case OpKind::kSquare: return "square";
    case OpKind::kRelu: return "relu";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSoftplus: return "softplus";
    case OpKind::kSum: return "sum";
    case OpKind::kRowSlice: return "row_slice";
    case OpKind::kResizeRows: return "resize_rows";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kFixedBatchNorm: return "fixed_batch_norm";
    case OpKind::kInnerProductBce: return "inner_product_bce";
    case OpKind::kPairLogits: return "pair_logits";
    case OpKind::kBceWithLogits: return "bce_with_logits";
    case OpKind::kCustom: return "custom";
  }
  return "?";
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{OpKind::kLeaf, {}, std::move(value), {}, nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{OpKind::kConstant, {}, std::move(value), {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, std::vector<std::size_t> parents, Tensor value,
                 BackwardFn backward) {
  bool needs = false;
  for (std::size_t p : parents) {
    if (p >= nodes_.size()) throw ContractError("tape: parent handle from the future");
    needs = needs || nodes_[p].requires_grad;
  }
  needs = needs && record_;
  nodes_.push_back(Node{kind, std::move(parents), std::move(value), {},
                        needs ? std::move(backward) : nullptr, needs});
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor& Tape::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::zero_grad() {
  for (auto& n : nodes_) n.grad = Tensor();
}

void Tape::backward(Var loss) {
  if (loss.valid() && &loss.tape() != this) throw ContractError("backward: loss from another tape");
  const std::size_t root = loss.id();
  if (root >= nodes_.size()) throw ContractError("backward: invalid loss handle");
  if (nodes_[root].value.size() != 1) {
    throw ContractError("backward: loss must be scalar, got " + nodes_[root].value.shape().str());
  }
  zero_grad();
  grad_slot(root)[0] = 1.0;
  for (std::size_t i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, i);
  }
}

}  // namespace sgrnn::ad
