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

// Experiment runner: configuration, the seed/sweep loop, and result files.

#ifndef SGRNN_TOOLS_EXPERIMENT_HPP_
#define SGRNN_TOOLS_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgrnn/data/synthetic.hpp"
#include "sgrnn/model/config.hpp"
#include "sgrnn/train/trainer.hpp"

namespace sgrnn::experiment {

enum class SweepMode { kNone, kGamma, kVariant };

std::string_view to_string(SweepMode m);
SweepMode parse_sweep(std::string_view s);  // throws ConfigError

/// One experiment: a dataset (file or synthetic generator), a task, the model
/// and optimizer settings, the seeds, and an optional sweep axis.
struct ExperimentConfig {
  std::string dataset_path;  // empty selects the synthetic generator
  std::string dataset_name;  // CSV label; derived from the source when empty
  std::optional<data::SyntheticSpec> synthetic;
  // Final snapshots held out for test (3; 10 suits long citation graphs).
  std::size_t test_snapshots = 3;

  model::Task task = model::Task::kDetection;
  model::SgrnnConfig model;
  train::TrainConfig train;
  std::vector<std::uint64_t> seeds = {1, 2, 3};

  SweepMode sweep = SweepMode::kNone;
  std::vector<double> sweep_gammas = {0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<model::PosteriorVariant> sweep_variants = {
      model::PosteriorVariant::kFixedBn, model::PosteriorVariant::kRes,
      model::PosteriorVariant::kNoStd};

  std::size_t nll_samples = 64;
  std::filesystem::path out_dir = "results";
  // When false, wall_seconds is written as 0 so result files are byte-identical
  // across reruns.
  bool record_wall_clock = true;

  // Throws ConfigError.
  void validate() const;
};

/// Reads a TOML experiment file. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig load_config_toml(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Applies SGRNN_OUT_DIR when set.
void apply_environment(ExperimentConfig& cfg);

struct Dataset {
  std::string name;
  data::SnapshotSequence sequence;
};

// Throws ConfigError when no source is configured.
Dataset load_dataset(const ExperimentConfig& cfg);

struct ResultRow {
  std::string dataset;
  model::Task task = model::Task::kDetection;
  model::PosteriorVariant variant = model::PosteriorVariant::kFixedBn;
  gnn::GnnType gnn_type = gnn::GnnType::kGcn;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  double auc = 0.0;  // mean over test snapshots, in [0, 1]
  double ap = 0.0;
  double nll = 0.0;  // sum over test snapshots
  std::size_t best_epoch = 0;
  double wall_seconds = 0.0;
  std::vector<double> test_auc;  // per test snapshot
  std::vector<double> test_ap;
  train::RunRecord run;
};

bool same_row(const ResultRow& a, const ResultRow& b);

struct Progress {
  std::size_t run_index = 0;
  std::size_t run_count = 0;
  const ResultRow* finished = nullptr;     // set once a run completes
  const train::EpochRecord* epoch = nullptr;  // set per epoch
};
using ProgressCallback = std::function<void(const Progress&)>;

/// Trains and evaluates every (sweep point, seed) pair in order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const Dataset& dataset,
                                      const ProgressCallback& progress = {});

// Column order is fixed.
inline constexpr const char* kCsvHeader =
    "dataset,task,variant,gnn_type,gamma,seed,auc,ap,nll,best_epoch,wall_seconds";

/// Per-seed rows followed by one aggregate row per sweep point with two or
/// more seeds. AUC and AP are
/// percentages; aggregates are `mean±std` (sample std) with 2 decimals.
std::string results_csv(const std::vector<ResultRow>& rows);
std::string results_json(const std::vector<ResultRow>& rows);
// Throws ConfigError on malformed input.
std::vector<ResultRow> parse_results_json(const std::string& text);

/// Writes results.csv and results.json into `dir`, creating it. Throws
/// std::runtime_error when the directory is not writable.
void emit_results(const std::vector<ResultRow>& rows, const std::filesystem::path& dir);

// "m±s" with 2 decimals.
std::string format_mean_std(const std::vector<double>& values);

}  // namespace sgrnn::experiment

#endif  // SGRNN_TOOLS_EXPERIMENT_HPP_
