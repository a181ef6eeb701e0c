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

#ifndef SGRNN_DATA_SNAPSHOT_HPP_
#define SGRNN_DATA_SNAPSHOT_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "sgrnn/ad/sparse.hpp"

namespace sgrnn::data {

using NodeId = std::uint32_t;

/// Undirected edge stored in canonical order (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  auto operator<=>(const Edge&) const = default;
};

// Hashable key for an undirected pair.
inline std::uint64_t pair_key(NodeId a, NodeId b) {
  const Edge e = Edge::canonical(a, b);
  return (static_cast<std::uint64_t>(e.u) << 32) | e.v;
}

using EdgeSet = std::unordered_set<std::uint64_t>;
EdgeSet make_edge_set(const std::vector<Edge>& edges);

struct Snapshot {
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
  // N_t x M node attributes, stored sparse.
  std::optional<ad::SparseMatrix> attributes;
};

enum class FeatureMode { kNone, kAttributes, kIdentity };

/// Ordered discrete-time observations of one dynamic graph.
///
/// Invariants (checked on construction): edge endpoints are < N_t, there are
/// no self loops or duplicate undirected edges, and either no snapshot has
/// attributes or all do. File-provided attributes share one width M; identity
/// features have width N_t, which may vary over time.
class SnapshotSequence {
 public:
  SnapshotSequence() = default;
  explicit SnapshotSequence(std::vector<Snapshot> snapshots,
                            FeatureMode mode = FeatureMode::kNone);

  std::size_t size() const noexcept { return snapshots_.size(); }
  bool empty() const noexcept { return snapshots_.empty(); }
  const Snapshot& operator[](std::size_t t) const { return snapshots_.at(t); }
  const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }

  FeatureMode feature_mode() const noexcept { return mode_; }
  bool has_attributes() const noexcept { return mode_ != FeatureMode::kNone; }
  // Widest attribute row over time (M, or max N_t for identity features).
  std::size_t attribute_dim() const noexcept;
  std::size_t attribute_width(std::size_t t) const;
  std::size_t max_nodes() const noexcept;

  bool operator==(const SnapshotSequence& other) const;

 private:
  void validate() const;

  std::vector<Snapshot> snapshots_;
  FeatureMode mode_ = FeatureMode::kNone;
};

struct DatasetMeta {
  std::string name;
  std::size_t num_snapshots = 0;
  std::vector<std::size_t> node_counts;
  std::vector<std::size_t> edge_counts;
  // Mean over snapshots of 2 E_t / (N_t (N_t - 1)).
  double density = 0.0;
};

DatasetMeta describe(const SnapshotSequence& seq, std::string name);

/// Replaces the (absent) attributes with X_t = I_{N_t}. Throws ContractError
/// if the sequence already carries attributes.
SnapshotSequence identity_features(const SnapshotSequence& seq);

// CSR adjacency (both directions, unit weights) of an edge list.
ad::SparseMatrix adjacency_matrix(std::size_t num_nodes, const std::vector<Edge>& edges);

}  // namespace sgrnn::data

#endif  // SGRNN_DATA_SNAPSHOT_HPP_
