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

#include "sgrnn/model/config.hpp"

#include <string>

#include "sgrnn/errors.hpp"

namespace sgrnn::model {

std::string_view to_string(PosteriorVariant v) {
  switch (v) {
    case PosteriorVariant::kPlain: return "plain";
    case PosteriorVariant::kFixedBn: return "fixed_bn";
    case PosteriorVariant::kRes: return "res";
    case PosteriorVariant::kNoStd: return "no_std";
  }
  return "?";
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::kDetection: return "detection";
    case Task::kPrediction: return "prediction";
    case Task::kNewPrediction: return "new_prediction";
  }
  return "?";
}

std::string_view to_string(CellType c) { return c == CellType::kGru ? "gru" : "mlp"; }

std::string_view to_string(PosWeightMode m) {
  return m == PosWeightMode::kBalanced ? "balanced" : "none";
}

PosteriorVariant parse_variant(std::string_view s) {
  for (auto v : {PosteriorVariant::kPlain, PosteriorVariant::kFixedBn, PosteriorVariant::kRes,
                 PosteriorVariant::kNoStd})
    if (s == to_string(v)) return v;
  throw ContractError("unknown posterior variant '" + std::string(s) + "'");
}

Task parse_task(std::string_view s) {
  for (auto t : {Task::kDetection, Task::kPrediction, Task::kNewPrediction})
    if (s == to_string(t)) return t;
  throw ContractError("unknown task '" + std::string(s) + "'");
}

CellType parse_cell(std::string_view s) {
  if (s == "gru") return CellType::kGru;
  if (s == "mlp") return CellType::kMlp;
  throw ContractError("unknown recurrent cell '" + std::string(s) + "'");
}

PosWeightMode parse_pos_weight_mode(std::string_view s) {
  if (s == "balanced") return PosWeightMode::kBalanced;
  if (s == "none") return PosWeightMode::kNone;
  throw ContractError("unknown pos_weight_mode '" + std::string(s) + "'");
}

void SgrnnConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || head_dim == 0 || latent_dim == 0) {
    throw ContractError("model dimensions must be positive");
  }
  if (is_prediction(task) && max_nodes == 0) {
    throw ContractError("prediction tasks need max_nodes");
  }
  if (!(gamma > 0.0)) throw ContractError("gamma must be positive");
  if (!(bn_epsilon > 0.0)) throw ContractError("bn_epsilon must be positive");
  if (sivi.enabled && (sivi.layers == 0 || sivi.noise_dim == 0 || sivi.width == 0)) {
    throw ContractError("sivi dimensions must be positive");
  }
}

}  // namespace sgrnn::model
