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

#ifndef SGRNN_MODEL_CONFIG_HPP_
#define SGRNN_MODEL_CONFIG_HPP_

#include <cstddef>
#include <string_view>

#include "sgrnn/gnn/layers.hpp"

namespace sgrnn::model {

enum class PosteriorVariant { kPlain, kFixedBn, kRes, kNoStd };
enum class Task { kDetection, kPrediction, kNewPrediction };
enum class CellType { kGru, kMlp };
enum class PosWeightMode { kBalanced, kNone };

std::string_view to_string(PosteriorVariant v);
std::string_view to_string(Task t);
std::string_view to_string(CellType c);
std::string_view to_string(PosWeightMode m);
PosteriorVariant parse_variant(std::string_view s);
Task parse_task(std::string_view s);
CellType parse_cell(std::string_view s);
PosWeightMode parse_pos_weight_mode(std::string_view s);

inline bool is_prediction(Task t) { return t != Task::kDetection; }

/// Semi-implicit posterior settings. When enabled, the posterior trunk becomes
/// `layers` noise-injected stochastic layers.
struct SiviConfig {
  bool enabled = false;
  std::size_t layers = 1;
  std::size_t noise_dim = 20;
  std::size_t width = 32;
};

struct SgrnnConfig {
  std::size_t input_dim = 0;  // feature width (max N_t for identity features)
  // Adjacency row width read by the non-graph inference layers of the
  // prediction tasks (max N_t).
  std::size_t max_nodes = 0;
  std::size_t hidden_dim = 32;
  std::size_t head_dim = 32;  // shared trunk width of the [32, 20] heads
  std::size_t latent_dim = 20;
  gnn::GnnType gnn_type = gnn::GnnType::kGcn;
  PosteriorVariant variant = PosteriorVariant::kFixedBn;
  double gamma = 0.8;
  double bn_epsilon = 1e-5;
  Task task = Task::kDetection;
  CellType cell = CellType::kGru;
  PosWeightMode pos_weight_mode = PosWeightMode::kBalanced;
  // Snapshots with more nodes use edge-plus-sampled-non-edge likelihood.
  std::size_t full_pair_limit = 1000;
  // Sampled non-edges per true edge above the limit.
  std::size_t negative_ratio = 5;
  SiviConfig sivi;

  // Throws ContractError on non-positive dims or gamma.
  void validate() const;
};

}  // namespace sgrnn::model

#endif  // SGRNN_MODEL_CONFIG_HPP_
