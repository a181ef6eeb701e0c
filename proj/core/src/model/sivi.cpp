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

#include "sgrnn/model/sivi.hpp"

#include <string>

#include "sgrnn/errors.hpp"

namespace sgrnn::model {
namespace {

void require_sivi(const SgrnnModel& model, const char* where) {
  if (!model.config().sivi.enabled) {
    throw ContractError(std::string(where) + ": model was built without semi-implicit layers");
  }
}

// Weight keys of one inference layer that multiply its input rows.
std::vector<std::string> input_weight_keys(const std::string& layer, const SgrnnConfig& c) {
  if (is_prediction(c.task)) return {layer + ".w"};
  switch (c.gnn_type) {
    case gnn::GnnType::kGcn:
      return {layer + ".w"};
    case gnn::GnnType::kSage:
      return {layer + ".w_self", layer + ".w_neigh"};
    case gnn::GnnType::kGin:
      return {layer + ".w1"};
  }
  return {};
}

}  // namespace

SiviState sivi_posterior_params(TapeBinding& p, const SgrnnModel& model, ad::Var z_prev, ad::Var a,
                                const GaussianParams& prior, const GraphSequence::Frame& f,
                                std::mt19937_64& rng) {
  require_sivi(model, "sivi_posterior_params");
  SiviState state;
  state.epsilon = standard_normal(rng, a.rows(), model.config().sivi.noise_dim);
  state.psi_params = model.posterior(p, z_prev, a, prior, f, &state.epsilon, &state.r).q;
  return state;
}

ElboTerms sivi_loss(TapeBinding& p, const SgrnnModel& model, const GraphSequence& g,
                    std::size_t end, RngStreams& rng) {
  require_sivi(model, "sivi_loss");
  return model.elbo_loss(p, g, end, rng);
}

void sever_noise_path(ParameterStore& params, const SgrnnConfig& config) {
  if (!config.sivi.enabled) return;
  for (std::size_t j = 1; j <= config.sivi.layers; ++j) {
    const std::string layer = j == 1 ? "q.trunk" : "q.trunk" + std::to_string(j);
    for (const auto& key : input_weight_keys(layer, config)) {
      ad::Tensor& w = params.at(key);
      // Inputs are [Z_prev, r, eps]; the noise block is the trailing rows.
      const std::size_t first = w.rows() - config.sivi.noise_dim;
      for (std::size_t r = first; r < w.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = 0.0;
    }
  }
}

}  // namespace sgrnn::model
