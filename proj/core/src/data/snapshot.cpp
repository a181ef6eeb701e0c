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

#include "sgrnn/data/snapshot.hpp"

#include <algorithm>

#include "sgrnn/errors.hpp"

namespace sgrnn::data {

EdgeSet make_edge_set(const std::vector<Edge>& edges) {
  EdgeSet set;
  set.reserve(edges.size() * 2);
  for (const Edge& e : edges) set.insert(pair_key(e.u, e.v));
  return set;
}

SnapshotSequence::SnapshotSequence(std::vector<Snapshot> snapshots, FeatureMode mode)
    : snapshots_(std::move(snapshots)), mode_(mode) {
  for (auto& s : snapshots_)
    for (auto& e : s.edges) e = Edge::canonical(e.u, e.v);
  validate();
}

void SnapshotSequence::validate() const {
  std::size_t width = 0;
  for (std::size_t t = 0; t < snapshots_.size(); ++t) {
    const Snapshot& s = snapshots_[t];
    EdgeSet seen;
    seen.reserve(s.edges.size() * 2);
    for (const Edge& e : s.edges) {
      if (e.v >= s.num_nodes) {
        throw ValidationError(t, "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                                     ") references a node >= " + std::to_string(s.num_nodes));
      }
      if (e.u == e.v) throw ValidationError(t, "self loop on node " + std::to_string(e.u));
      if (!seen.insert(pair_key(e.u, e.v)).second) {
        throw ValidationError(t, "duplicate edge (" + std::to_string(e.u) + "," +
                                     std::to_string(e.v) + ")");
      }
    }
    const bool has = s.attributes.has_value();
    if (has != (mode_ != FeatureMode::kNone)) {
      throw ValidationError(t, "attributes must be present on every snapshot or on none");
    }
    if (!has) continue;
    if (s.attributes->rows() != s.num_nodes) {
      throw ValidationError(t, "attribute rows " + std::to_string(s.attributes->rows()) +
                                   " != node count " + std::to_string(s.num_nodes));
    }
    if (mode_ == FeatureMode::kAttributes) {
      if (t == 0) width = s.attributes->cols();
      if (s.attributes->cols() != width) {
        throw ValidationError(t, "attribute width " + std::to_string(s.attributes->cols()) +
                                     " differs from " + std::to_string(width));
      }
    }
  }
}

std::size_t SnapshotSequence::attribute_dim() const noexcept {
  std::size_t m = 0;
  for (const auto& s : snapshots_)
    if (s.attributes) m = std::max(m, s.attributes->cols());
  return m;
}

std::size_t SnapshotSequence::attribute_width(std::size_t t) const {
  const auto& s = snapshots_.at(t);
  return s.attributes ? s.attributes->cols() : 0;
}

std::size_t SnapshotSequence::max_nodes() const noexcept {
  std::size_t n = 0;
  for (const auto& s : snapshots_) n = std::max(n, s.num_nodes);
  return n;
}

bool SnapshotSequence::operator==(const SnapshotSequence& other) const {
  if (mode_ != other.mode_ || snapshots_.size() != other.snapshots_.size()) return false;
  for (std::size_t t = 0; t < snapshots_.size(); ++t) {
    const auto& a = snapshots_[t];
    const auto& b = other.snapshots_[t];
    if (a.num_nodes != b.num_nodes || a.edges != b.edges) return false;
    if (a.attributes.has_value() != b.attributes.has_value()) return false;
    if (a.attributes && !(a.attributes->to_dense() == b.attributes->to_dense())) return false;
  }
  return true;
}

DatasetMeta describe(const SnapshotSequence& seq, std::string name) {
  DatasetMeta meta;
  meta.name = std::move(name);
  meta.num_snapshots = seq.size();
  double density = 0.0;
  for (const auto& s : seq.snapshots()) {
    meta.node_counts.push_back(s.num_nodes);
    meta.edge_counts.push_back(s.edges.size());
    const double n = static_cast<double>(s.num_nodes);
    if (s.num_nodes > 1) density += 2.0 * static_cast<double>(s.edges.size()) / (n * (n - 1.0));
  }
  if (!seq.empty()) meta.density = density / static_cast<double>(seq.size());
  return meta;
}

SnapshotSequence identity_features(const SnapshotSequence& seq) {
  if (seq.has_attributes()) {
    throw ContractError("identity_features: sequence already has node attributes");
  }
  std::vector<Snapshot> out = seq.snapshots();
  for (auto& s : out) s.attributes = ad::SparseMatrix::identity(s.num_nodes);
  return SnapshotSequence(std::move(out), FeatureMode::kIdentity);
}

ad::SparseMatrix adjacency_matrix(std::size_t num_nodes, const std::vector<Edge>& edges) {
  std::vector<ad::Triplet> trips;
  trips.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    trips.push_back({e.u, e.v, 1.0});
    trips.push_back({e.v, e.u, 1.0});
  }
  return ad::SparseMatrix::from_triplets(num_nodes, num_nodes, std::move(trips));
}

}  // namespace sgrnn::data
