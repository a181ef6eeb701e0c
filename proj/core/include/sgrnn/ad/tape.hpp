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

#ifndef SGRNN_AD_TAPE_HPP_
#define SGRNN_AD_TAPE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "sgrnn/ad/tensor.hpp"

namespace sgrnn::ad {

enum class OpKind : std::uint8_t {
  kLeaf,
  kConstant,
  kMatMul,
  kGram,
  kSpMM,
  kSpMMValues,
  kAdd,
  kAddRowBroadcast,
  kSub,
  kMul,
  kDiv,
  kScale,
  kScalarMul,
  kAddScalar,
  kLog,
  kSquare,
  kRelu,
  kSigmoid,
  kTanh,
  kSoftplus,
  kSum,
  kRowSlice,
  kResizeRows,
  kConcatCols,
  kFixedBatchNorm,
  kInnerProductBce,
  kPairLogits,
  kBceWithLogits,
  kCustom,
};

const char* op_name(OpKind kind);

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }

  const Tensor& value() const;
  // Accumulated adjoint; a zero tensor when the node was not reached.
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Propagates the node's accumulated adjoint into its parents.
using BackwardFn = std::function<void(Tape& tape, std::size_t self)>;

/// Append-only record of a computation. Append order is a topological order,
/// so backward is a single reverse sweep.
///
/// A tape built with `record_gradients = false` stores forward values only;
/// it is what evaluation code uses.
class Tape {
 public:
  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value);
  Var constant(Tensor value);

  // Appends an op node. `backward` is dropped when no parent needs a gradient.
  Var record(OpKind kind, std::vector<std::size_t> parents, Tensor value, BackwardFn backward);

  void backward(Var loss);
  void zero_grad();

  std::size_t size() const noexcept { return nodes_.size(); }
  bool recording() const noexcept { return record_; }
  OpKind kind(std::size_t id) const { return nodes_[id].kind; }
  const std::vector<std::size_t>& parents(std::size_t id) const { return nodes_[id].parents; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Mutable adjoint slot, zero-initialized on first access. Backward functions
  // accumulate into their parents through this.
  Tensor& grad_slot(std::size_t id);

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> parents;
    Tensor value;
    mutable Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool record_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }
inline const Tensor& Var::grad() const { return tape_->grad(id_); }
inline bool Var::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace sgrnn::ad

#endif  // SGRNN_AD_TAPE_HPP_
