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

#include "sgrnn/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "sgrnn/errors.hpp"

namespace sgrnn::data {
namespace {

bool valid_prob(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

SyntheticGraph generate_synthetic(const SyntheticSpec& spec) {
  if (!valid_prob(spec.p_in) || !valid_prob(spec.p_out) || !valid_prob(spec.drift_prob)) {
    throw ContractError("synthetic graph probabilities must lie in [0,1]");
  }
  if (spec.n_blocks == 0 || spec.n_blocks > spec.n_nodes) {
    throw ContractError("n_blocks must be in [1, n_nodes]");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> block(0,
                                                     static_cast<std::uint32_t>(spec.n_blocks - 1));

  SyntheticGraph out;
  std::vector<std::uint32_t> current(spec.n_nodes);
  for (auto& b : current) b = block(rng);

  std::vector<Snapshot> snapshots;
  for (std::size_t t = 0; t < spec.n_snapshots; ++t) {
    if (t > 0) {
      for (auto& b : current)
        if (unif(rng) < spec.drift_prob) b = block(rng);
    }
    Snapshot s;
    s.num_nodes = spec.n_nodes;
    for (NodeId i = 0; i < spec.n_nodes; ++i)
      for (NodeId j = i + 1; j < spec.n_nodes; ++j) {
        const double p = current[i] == current[j] ? spec.p_in : spec.p_out;
        if (unif(rng) < p) s.edges.push_back({i, j});
      }
    snapshots.push_back(std::move(s));
    out.blocks.push_back(current);
  }
  out.sequence = SnapshotSequence(std::move(snapshots));
  return out;
}

SnapshotSequence synthetic_dynamic_graph(std::size_t n_nodes, std::size_t n_snapshots,
                                         std::size_t n_blocks, double p_in, double p_out,
                                         double drift_prob, std::uint64_t seed) {
  return generate_synthetic({n_nodes, n_snapshots, n_blocks, p_in, p_out, drift_prob, seed})
      .sequence;
}

double expected_sbm_density(std::size_t n_blocks, double p_in, double p_out) {
  const double same = 1.0 / static_cast<double>(n_blocks);
  return same * p_in + (1.0 - same) * p_out;
}

SnapshotSequence enron_like_sequence(std::uint64_t seed) {
  constexpr std::size_t kNodes = 184;
  constexpr std::size_t kCommunities = 9;
  constexpr std::array<std::size_t, 11> kEdges = {115, 160, 182, 204, 217, 233,
                                                  250, 262, 266, 260, 229};
  constexpr double kPersist = 0.65;
  constexpr double kWithin = 0.8;
  constexpr double kTriadic = 0.3;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::lognormal_distribution<double> activity_dist(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> community(0, kCommunities - 1);

  std::vector<double> activity(kNodes);
  std::vector<std::size_t> group(kNodes);
  std::vector<std::vector<NodeId>> members(kCommunities);
  std::vector<std::vector<double>> member_weight(kCommunities);
  for (NodeId i = 0; i < kNodes; ++i) {
    activity[i] = activity_dist(rng);
    group[i] = community(rng);
    members[group[i]].push_back(i);
    member_weight[group[i]].push_back(activity[i]);
  }
  std::discrete_distribution<NodeId> any_node(activity.begin(), activity.end());
  std::vector<std::discrete_distribution<std::size_t>> in_group;
  for (std::size_t c = 0; c < kCommunities; ++c) {
    in_group.emplace_back(member_weight[c].begin(), member_weight[c].end());
  }

  std::vector<Snapshot> snapshots;
  std::vector<Edge> previous;
  for (std::size_t t = 0; t < kEdges.size(); ++t) {
    const std::size_t target = kEdges[t];
    EdgeSet present;
    std::vector<Edge> edges;
    std::vector<std::vector<NodeId>> adj(kNodes);
    auto add = [&](NodeId a, NodeId b) {
      if (a == b || edges.size() >= target) return;
      if (!present.insert(pair_key(a, b)).second) return;
      edges.push_back(Edge::canonical(a, b));
      adj[a].push_back(b);
      adj[b].push_back(a);
    };

    std::vector<Edge> carry = previous;
    std::shuffle(carry.begin(), carry.end(), rng);
    const auto keep = static_cast<std::size_t>(kPersist * static_cast<double>(carry.size()));
    for (std::size_t k = 0; k < keep && k < carry.size(); ++k) add(carry[k].u, carry[k].v);

    while (edges.size() < target) {
      const NodeId a = any_node(rng);
      if (unif(rng) < kTriadic && !adj[a].empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, adj[a].size() - 1);
        const NodeId w = adj[a][pick(rng)];
        std::uniform_int_distribution<std::size_t> pick2(0, adj[w].size() - 1);
        add(a, adj[w][pick2(rng)]);
      } else if (unif(rng) < kWithin) {
        const std::size_t c = group[a];
        add(a, members[c][in_group[c](rng)]);
      } else {
        add(a, any_node(rng));
      }
    }
    std::sort(edges.begin(), edges.end());
    previous = edges;
    snapshots.push_back({kNodes, std::move(edges), std::nullopt});
  }
  return SnapshotSequence(std::move(snapshots));
}

}  // namespace sgrnn::data
