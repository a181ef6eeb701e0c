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

#ifndef SGRNN_DATA_SPLIT_HPP_
#define SGRNN_DATA_SPLIT_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sgrnn/data/snapshot.hpp"

namespace sgrnn::data {

struct SnapshotSplit {
  std::vector<Edge> train;
  std::vector<Edge> val_pos;
  std::vector<Edge> val_neg;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
};

struct EdgeSplit {
  std::vector<SnapshotSplit> snapshots;
};

// floor(frac * num_edges), raised to 1 when num_edges >= 10.
std::size_t split_count(std::size_t num_edges, double frac);

/// Per-snapshot uniform split of true edges into train / validation / test,
/// with equal-count uniform non-edge negatives. Validation and test negatives
/// are disjoint.
EdgeSplit split_edges_detection(const SnapshotSequence& seq, double val_frac = 0.05,
                                double test_frac = 0.10, std::uint64_t seed = 0);

struct TransitionTargets {
  std::size_t source = 0;  // t
  std::size_t target = 0;  // t + 1
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
  // New-link mode with no new edges; excluded from metrics.
  bool skipped = false;
};

struct PredictionTargets {
  bool new_only = false;
  std::vector<TransitionTargets> transitions;  // transitions[t] is t -> t+1
  std::vector<std::string> warnings;
};

PredictionTargets build_prediction_targets(const SnapshotSequence& seq, bool new_only,
                                           std::uint64_t seed);

/// Uniform sample without replacement of `count` unordered pairs over
/// `num_nodes` nodes that are neither self loops nor in `edges` or `exclude`.
/// Throws SplitError if not enough such pairs exist.
std::vector<Edge> sample_non_edges(std::size_t num_nodes, const EdgeSet& edges,
                                   const EdgeSet& exclude, std::size_t count,
                                   std::mt19937_64& rng);

}  // namespace sgrnn::data

#endif  // SGRNN_DATA_SPLIT_HPP_
