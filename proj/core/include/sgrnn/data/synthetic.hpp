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

#ifndef SGRNN_DATA_SYNTHETIC_HPP_
#define SGRNN_DATA_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "sgrnn/data/snapshot.hpp"

namespace sgrnn::data {

struct SyntheticSpec {
  std::size_t n_nodes = 60;
  std::size_t n_snapshots = 8;
  std::size_t n_blocks = 4;
  double p_in = 0.3;
  double p_out = 0.02;
  double drift_prob = 0.1;
  std::uint64_t seed = 1;
};

struct SyntheticGraph {
  SnapshotSequence sequence;
  // blocks[t][i] is the block of node i at snapshot t.
  std::vector<std::vector<std::uint32_t>> blocks;
};

/// Stochastic block model per snapshot. Initial blocks are uniform; between
/// snapshots each node redraws its block with probability drift_prob.
SyntheticGraph generate_synthetic(const SyntheticSpec& spec);

SnapshotSequence synthetic_dynamic_graph(std::size_t n_nodes, std::size_t n_snapshots,
                                         std::size_t n_blocks, double p_in, double p_out,
                                         double drift_prob, std::uint64_t seed);

// Expected mean density of generate_synthetic under uniform block assignment.
double expected_sbm_density(std::size_t n_blocks, double p_in, double p_out);

/// Deterministic stand-in with the shape of the Enron email snapshots: 184
/// nodes, 11 snapshots, 115 to 266 edges per snapshot, 2378 edges in total.
/// Edges come from degree-heterogeneous communities with temporal persistence
/// and triadic closure.
SnapshotSequence enron_like_sequence(std::uint64_t seed = 2026);

}  // namespace sgrnn::data

#endif  // SGRNN_DATA_SYNTHETIC_HPP_
