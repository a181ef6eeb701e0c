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

#include "sgrnn/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgrnn/errors.hpp"

namespace sgrnn::data {

std::size_t split_count(std::size_t num_edges, double frac) {
  auto n = static_cast<std::size_t>(std::floor(frac * static_cast<double>(num_edges)));
  if (num_edges >= 10) n = std::max<std::size_t>(n, 1);
  return n;
}

std::vector<Edge> sample_non_edges(std::size_t num_nodes, const EdgeSet& edges,
                                   const EdgeSet& exclude, std::size_t count,
                                   std::mt19937_64& rng) {
  if (count == 0) return {};
  const std::size_t total = num_nodes < 2 ? 0 : num_nodes * (num_nodes - 1) / 2;
  std::size_t taken = edges.size();
  for (std::uint64_t k : exclude) taken += edges.count(k) ? 0 : 1;
  const std::size_t available = total > taken ? total - taken : 0;
  if (count > available) {
    throw SplitError("requested " + std::to_string(count) + " non-edges but only " +
                     std::to_string(available) + " are available");
  }
  std::vector<Edge> out;
  out.reserve(count);
  if (2 * count > available) {
    // Dense regime: enumerate candidates and draw a prefix of a shuffle.
    std::vector<Edge> pool;
    pool.reserve(available);
    for (NodeId i = 0; i < num_nodes; ++i)
      for (NodeId j = i + 1; j < num_nodes; ++j) {
        const auto key = pair_key(i, j);
        if (!edges.count(key) && !exclude.count(key)) pool.push_back({i, j});
      }
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(rng)]);
      out.push_back(pool[k]);
    }
    return out;
  }
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(num_nodes - 1));
  EdgeSet chosen;
  chosen.reserve(count * 2);
  while (out.size() < count) {
    const NodeId a = node(rng);
    const NodeId b = node(rng);
    if (a == b) continue;
    const auto key = pair_key(a, b);
    if (edges.count(key) || exclude.count(key) || !chosen.insert(key).second) continue;
    out.push_back(Edge::canonical(a, b));
  }
  return out;
}

EdgeSplit split_edges_detection(const SnapshotSequence& seq, double val_frac, double test_frac,
                                std::uint64_t seed) {
  if (!(val_frac > 0.0 && val_frac < 1.0) || !(test_frac > 0.0 && test_frac < 1.0) ||
      val_frac + test_frac >= 1.0) {
    throw ContractError("split fractions must lie in (0,1) and sum to less than 1");
  }
  std::mt19937_64 rng(seed);
  EdgeSplit split;
  split.snapshots.reserve(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const Snapshot& s = seq[t];
    const std::size_t e = s.edges.size();
    if (e < 3) {
      throw SplitError("snapshot " + std::to_string(t) + " has " + std::to_string(e) +
                       " edges; at least 3 are needed to split");
    }
    const std::size_t n_val = split_count(e, val_frac);
    const std::size_t n_test = split_count(e, test_frac);

    std::vector<std::size_t> order(e);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    SnapshotSplit out;
    for (std::size_t k = 0; k < e; ++k) {
      const Edge& edge = s.edges[order[k]];
      if (k < n_val) {
        out.val_pos.push_back(edge);
      } else if (k < n_val + n_test) {
        out.test_pos.push_back(edge);
      } else {
        out.train.push_back(edge);
      }
    }
    std::sort(out.train.begin(), out.train.end());

    const EdgeSet all = make_edge_set(s.edges);
    out.val_neg = sample_non_edges(s.num_nodes, all, {}, n_val, rng);
    out.test_neg = sample_non_edges(s.num_nodes, all, make_edge_set(out.val_neg), n_test, rng);
    split.snapshots.push_back(std::move(out));
  }
  return split;
}

PredictionTargets build_prediction_targets(const SnapshotSequence& seq, bool new_only,
                                           std::uint64_t seed) {
  if (seq.size() < 2) throw ContractError("prediction targets need at least two snapshots");
  std::mt19937_64 rng(seed);
  PredictionTargets out;
  out.new_only = new_only;
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    const Snapshot& next = seq[t + 1];
    TransitionTargets tr;
    tr.source = t;
    tr.target = t + 1;
    if (new_only) {
      const EdgeSet prev = make_edge_set(seq[t].edges);
      for (const Edge& e : next.edges)
        if (!prev.count(pair_key(e.u, e.v))) tr.positives.push_back(e);
    } else {
      tr.positives = next.edges;
    }
    if (tr.positives.empty()) {
      tr.skipped = true;
      out.warnings.push_back("transition " + std::to_string(t) + "->" + std::to_string(t + 1) +
                             " has no positive targets; skipped");
    } else {
      tr.negatives = sample_non_edges(next.num_nodes, make_edge_set(next.edges), {},
                                      tr.positives.size(), rng);
    }
    out.transitions.push_back(std::move(tr));
  }
  return out;
}

}  // namespace sgrnn::data
