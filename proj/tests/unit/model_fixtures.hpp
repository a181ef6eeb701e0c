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

// Small model instances shared by the model, extension and training suites.

#ifndef SGRNN_TESTS_UNIT_MODEL_FIXTURES_HPP_
#define SGRNN_TESTS_UNIT_MODEL_FIXTURES_HPP_

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sgrnn/ad/gradcheck.hpp"
#include "sgrnn/data/snapshot.hpp"
#include "sgrnn/model/sgrnn.hpp"

namespace sgrnn::testing {

// 3 nodes, 2 snapshots, one edge change.
inline data::SnapshotSequence tiny_sequence() {
  std::vector<data::Snapshot> snaps(2);
  snaps[0].num_nodes = 3;
  snaps[0].edges = {{0, 1}, {1, 2}};
  snaps[1].num_nodes = 3;
  snaps[1].edges = {{0, 1}, {0, 2}};
  return data::SnapshotSequence(std::move(snaps));
}

inline model::SgrnnConfig tiny_config(model::Task task,
                                      gnn::GnnType type = gnn::GnnType::kGcn,
                                      model::PosteriorVariant variant =
                                          model::PosteriorVariant::kFixedBn) {
  model::SgrnnConfig cfg;
  cfg.input_dim = 3;
  cfg.max_nodes = 3;
  cfg.hidden_dim = 4;
  cfg.head_dim = 4;
  cfg.latent_dim = 3;
  cfg.gnn_type = type;
  cfg.variant = variant;
  cfg.task = task;
  cfg.sivi.noise_dim = 2;
  cfg.sivi.width = 4;
  return cfg;
}

struct GradcheckResult {
  bool passed = true;
  std::string detail;
};

/// Finite-difference check of the negative ELBO against every parameter, one
/// key at a time, with all noise fixed by reseeding per evaluation.
inline GradcheckResult whole_model_gradcheck(const model::SgrnnConfig& cfg,
                                             const data::SnapshotSequence& seq,
                                             std::uint64_t seed, double tolerance = 1e-4) {
  const model::SgrnnModel m(cfg);
  const model::GraphSequence g(seq);
  std::mt19937_64 rng(seed);
  auto params = m.init_parameters(rng);
  // Zero biases put ReLU inputs exactly on the kink at t = 0; jitter every
  // entry so the check runs at a generic, differentiable point.
  std::normal_distribution<double> jitter(0.0, 0.1);
  for (const auto& [key, value] : params.entries())
    for (auto& v : params.at(key).values()) v += jitter(rng);
  GradcheckResult result;
  std::ostringstream detail;
  for (const auto& [key, value] : params.entries()) {
    const ad::ScalarFn f = [&, k = key](ad::Tape& tape, ad::Var x) {
      model::TapeBinding p(tape, params);
      p.bind(k, x);
      auto streams = model::RngStreams::from_seed(seed);
      return m.elbo_loss(p, g, g.size(), streams).loss;
    };
    ad::FiniteDiffOptions opts;
    opts.tolerance = tolerance;
    // A small step keeps central differences from straddling ReLU kinks.
    opts.step = 1e-6;
    const auto report = ad::finite_diff_check(f, value, opts);
    if (report.passed) continue;
    // At 1e-6, rounding in the loss (~1e-12) can swamp a near-zero slope;
    // a wider step trades that for truncation error. A wrong adjoint fails
    // at both.
    opts.step = 1e-5;
    const auto wide = ad::finite_diff_check(f, value, opts);
    if (!wide.passed) {
      result.passed = false;
      detail << key << ": step 1e-6 " << report.summary() << ", step 1e-5 " << wide.summary()
             << "; ";
    }
  }
  result.detail = detail.str();
  return result;
}

}  // namespace sgrnn::testing

#endif  // SGRNN_TESTS_UNIT_MODEL_FIXTURES_HPP_
