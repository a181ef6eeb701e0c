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


#ifndef SGRNN_MODEL_SIVI_HPP_
#define SGRNN_MODEL_SIVI_HPP_

#include <random>
#include <vector>

#include "sgrnn/model/sgrnn.hpp"

namespace sgrnn::model {

/// One semi-implicit posterior draw: trunk activations r^(0..L) (r^(0) = a_t),
/// the injected noise, and the resulting conditional Gaussian q(Z | psi).
struct SiviState {
  std::vector<ad::Var> r;
  ad::Tensor epsilon;
  GaussianParams psi_params;
};

/// Draws fresh noise from `rng` and evaluates the noise-injected posterior
/// layers. Requires a model built with `sivi.enabled`. The prior is consulted
/// only by prior-relative mean variants.
SiviState sivi_posterior_params(TapeBinding& p, const SgrnnModel& model, ad::Var z_prev, ad::Var a,
                                const GaussianParams& prior, const GraphSequence::Frame& f,
                                std::mt19937_64& rng);

/// Jensen lower bound of the ELBO over [0, end): per snapshot one noise draw,
/// the closed-form KL of q(Z | psi) against the Gaussian prior, and one
/// reparameterized reconstruction term.
ElboTerms sivi_loss(TapeBinding& p, const SgrnnModel& model, const GraphSequence& g,
                    std::size_t end, RngStreams& rng);

/// Zeroes every weight row that reads the injected noise, which disconnects
/// the noise path and reduces the posterior to a deterministic trunk.
void sever_noise_path(ParameterStore& params, const SgrnnConfig& config);

}  // namespace sgrnn::model

#endif  // SGRNN_MODEL_SIVI_HPP_
