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

#ifndef SGRNN_TRAIN_OPTIM_HPP_
#define SGRNN_TRAIN_OPTIM_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "sgrnn/model/parameters.hpp"

namespace sgrnn::train {

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 1500;
  std::size_t patience = 100;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws ConfigError.
  void validate() const;
};

/// Adam moments keyed like the parameter store.
struct OptimizerState {
  std::map<std::string, ad::Tensor> m;
  std::map<std::string, ad::Tensor> v;
  std::size_t step = 0;

  bool operator==(const OptimizerState&) const = default;
};

/// One bias-corrected Adam update in place. Throws ContractError when the
/// gradient keys or shapes differ from the parameters.
void adam_step(model::ParameterStore& params, const model::ParameterStore& grads,
               OptimizerState& state, const TrainConfig& config);

struct StopDecision {
  bool stop = false;
  std::size_t best_epoch = 0;  // 1-based
};

/// Early stopping on a validation history (one value per epoch, higher is
/// better). Only strict improvements reset the counter; training stops once
/// max(patience, 1) epochs have passed since the best one.
StopDecision early_stopping_check(std::span<const double> history, std::size_t patience);

}  // namespace sgrnn::train

#endif  // SGRNN_TRAIN_OPTIM_HPP_
