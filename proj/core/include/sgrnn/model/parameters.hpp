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

#ifndef SGRNN_MODEL_PARAMETERS_HPP_
#define SGRNN_MODEL_PARAMETERS_HPP_

#include <filesystem>
#include <map>
#include <string>

#include "sgrnn/ad/tape.hpp"
#include "sgrnn/ad/tensor.hpp"

namespace sgrnn::model {

/// Named learnable tensors, iterated in key order.
class ParameterStore {
 public:
  // Throws ContractError on a duplicate key.
  void add(const std::string& key, ad::Tensor value);
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const ad::Tensor& at(const std::string& key) const;
  ad::Tensor& at(const std::string& key);

  const std::map<std::string, ad::Tensor>& entries() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t scalar_count() const noexcept;
  bool all_finite() const noexcept;

  // Same keys, zero values.
  ParameterStore zeros_like() const;

  bool operator==(const ParameterStore& other) const = default;

  // JSON checkpoint: {"format": "sgrnn-params", "version": 1, "params": {...}}.
  std::string to_json() const;
  static ParameterStore from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static ParameterStore load(const std::filesystem::path& path);

 private:
  std::map<std::string, ad::Tensor> values_;
};

/// Exposes a ParameterStore on one tape. Leaves are created on first use.
class TapeBinding {
 public:
  TapeBinding(ad::Tape& tape, const ParameterStore& store) : tape_(tape), store_(store) {}

  ad::Var operator()(const std::string& key);
  // Routes `key` to an existing node instead of a fresh leaf.
  void bind(const std::string& key, ad::Var v);
  ad::Tape& tape() noexcept { return tape_; }
  const ParameterStore& store() const noexcept { return store_; }

  // Adjoints after Tape::backward, keyed like the store; unused keys are zero.
  ParameterStore gradients() const;

 private:
  ad::Tape& tape_;
  const ParameterStore& store_;
  std::map<std::string, ad::Var> bound_;
};

}  // namespace sgrnn::model

#endif  // SGRNN_MODEL_PARAMETERS_HPP_
