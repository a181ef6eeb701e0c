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
#include "sgrnn/train/optim.hpp"

#include <cmath>

#include "sgrnn/errors.hpp"

namespace sgrnn::train {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

void adam_step(model::ParameterStore& params, const model::ParameterStore& grads,
               OptimizerState& state, const TrainConfig& config) {
  if (grads.size() != params.size()) {
    throw ContractError("adam_step: gradient keys differ from parameter keys");
  }
  for (const auto& [key, g] : grads.entries()) {
    if (!params.contains(key)) throw ContractError("adam_step: unknown gradient key '" + key + "'");
    if (g.shape() != params.at(key).shape()) {
      throw ContractError("adam_step: gradient for '" + key + "' has shape " + g.shape().str());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (const auto& [key, g] : grads.entries()) {
    ad::Tensor& w = params.at(key);
    auto [mit, m_new] = state.m.try_emplace(key, g.rows(), g.cols());
    auto [vit, v_new] = state.v.try_emplace(key, g.rows(), g.cols());
    ad::Tensor& m = mit->second;
    ad::Tensor& v = vit->second;
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

StopDecision early_stopping_check(std::span<const double> history, std::size_t patience) {
  StopDecision d;
  if (history.empty()) return d;
  std::size_t best = 0;
  for (std::size_t i = 1; i < history.size(); ++i)
    if (history[i] > history[best]) best = i;
  d.best_epoch = best + 1;
  d.stop = history.size() - d.best_epoch >= std::max<std::size_t>(patience, 1);
  return d;
}

}  // namespace sgrnn::train
