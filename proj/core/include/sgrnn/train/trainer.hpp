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

#ifndef SGRNN_TRAIN_TRAINER_HPP_
#define SGRNN_TRAIN_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sgrnn/data/snapshot.hpp"
#include "sgrnn/model/sgrnn.hpp"
#include "sgrnn/train/optim.hpp"

namespace sgrnn::train {

/// Everything one training run needs: the observed graph view, the training
/// window [0, train_end), and the validation and test pair sets.
struct TaskData {
  model::Task task = model::Task::kDetection;
  model::GraphSequence graphs;
  std::size_t train_end = 0;
  std::vector<model::EvalSet> validation;
  std::vector<model::EvalSet> test;
  std::vector<std::string> warnings;
};

/// Detection: per-snapshot 85/5/10 edge split; training sees every snapshot's
/// training edges, validation pools all snapshots, test covers the last
/// `test_snapshots`. Prediction modes: training uses snapshots
/// [0, T - test_snapshots), validation targets the last training snapshot,
/// and test targets are the final `test_snapshots` snapshots. Throws
/// SplitError when the sequence is too short.
TaskData prepare_task(const data::SnapshotSequence& seq, model::Task task,
                      std::size_t test_snapshots, std::uint64_t seed);

// Copies `base` with task, input width and node capacity fitted to `data`.
model::SgrnnConfig fit_config(model::SgrnnConfig base, const TaskData& data);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double recon = 0.0;       // sum of per-snapshot reconstruction log-likelihoods
  double kl = 0.0;          // sum of per-snapshot KL terms
  double shift_stat = 0.0;  // mean over snapshots
  double kl_floor = 0.0;    // sum_i (gamma^2 + beta_i^2) / 2 at the current beta
  double val_auc = 0.0;
  double val_ap = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct RunRecord {
  model::SgrnnConfig model;
  TrainConfig train;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_auc = 0.0;
  double best_val_ap = 0.0;
  double wall_seconds = 0.0;

  std::string to_json() const;
  // Throws ConfigError on malformed input.
  static RunRecord from_json(const std::string& text);
};

struct TrainResult {
  model::ParameterStore params;  // best-validation checkpoint
  RunRecord record;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full-sequence Adam training with early stopping on validation AUC. Throws
/// TrainingDiverged on a non-finite loss or parameter update.
TrainResult train(const model::SgrnnModel& model, const TaskData& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Serialization helpers shared with the experiment runner.
std::string config_to_json(const model::SgrnnConfig& config);
model::SgrnnConfig config_from_json(const std::string& text);

}  // namespace sgrnn::train

#endif  // SGRNN_TRAIN_TRAINER_HPP_
