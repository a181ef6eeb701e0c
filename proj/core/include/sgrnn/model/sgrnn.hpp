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

#ifndef SGRNN_MODEL_SGRNN_HPP_
#define SGRNN_MODEL_SGRNN_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgrnn/ad/ops.hpp"
#include "sgrnn/data/snapshot.hpp"
#include "sgrnn/data/split.hpp"
#include "sgrnn/gnn/layers.hpp"
#include "sgrnn/model/config.hpp"
#include "sgrnn/model/parameters.hpp"

namespace sgrnn::model {

/// Model-side view of a snapshot sequence: per-snapshot graph operators over
/// the observed (training) adjacency plus node features. Every read of a
/// snapshot's adjacency or features goes through frame() and is counted, so
/// tests can prove which snapshots an evaluation touched.
class GraphSequence {
 public:
  struct Frame {
    gnn::GraphOperators graph;
    ad::SparseMatrix features;
  };

  GraphSequence() = default;
  // Features default to identity when the sequence has none.
  explicit GraphSequence(const data::SnapshotSequence& seq);
  // Detection view: adjacency restricted to the split's training edges.
  GraphSequence(const data::SnapshotSequence& seq, const data::EdgeSplit& split);

  std::size_t size() const noexcept { return frames_.size(); }
  std::size_t num_nodes(std::size_t t) const { return nodes_.at(t); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t max_nodes() const noexcept { return max_nodes_; }

  const Frame& frame(std::size_t t) const;
  std::size_t access_count(std::size_t t) const { return access_.at(t); }
  void reset_access_counts() const;

 private:
  void build(const data::SnapshotSequence& seq, const std::vector<std::vector<data::Edge>>& edges);

  std::vector<Frame> frames_;
  std::vector<std::size_t> nodes_;
  std::size_t feature_dim_ = 0;
  std::size_t max_nodes_ = 0;
  mutable std::vector<std::size_t> access_;
};

struct GaussianParams {
  ad::Var mu;
  ad::Var sigma;
};

struct PosteriorOutput {
  GaussianParams q;
  // Output of the mean head before any prior-relative transform.
  ad::Var head;
};

/// Independent random streams. Reparameterization noise and semi-implicit
/// mixing noise are separate so models with and without the latter draw the
/// same reparameterization noise under one seed.
struct RngStreams {
  std::mt19937_64 reparam;
  std::mt19937_64 psi;
  std::mt19937_64 pairs;

  static RngStreams from_seed(std::uint64_t seed);
};

/// Per-snapshot tensors of one pass over a window [0, end).
struct SequenceStates {
  std::vector<ad::Var> h;
  std::vector<ad::Var> a;
  std::vector<GaussianParams> prior;
  std::vector<PosteriorOutput> posterior;
  std::vector<ad::Var> z;
};

struct ElboTerms {
  std::vector<double> recon_ll;
  std::vector<double> kl;
  // (1/2b) sum ((mu_q - mu_p) / sigma_p)^2 per snapshot.
  std::vector<double> shift_stat;
  double total = 0.0;
  ad::Var loss;  // -total, on the tape
};

class SgrnnModel {
 public:
  explicit SgrnnModel(SgrnnConfig config);

  const SgrnnConfig& config() const noexcept { return config_; }

  // Graph layers use Glorot-uniform weights, fully connected layers
  // U(+-1/sqrt(fan_in)) with zero bias; beta and eps_gin start at 0.
  ParameterStore init_parameters(std::mt19937_64& rng) const;

  /// h_t = f(h_prev, u_t). `u` is the frame supplying {A, X}; null means an
  /// empty graph with zero features. The result has `n` rows: h_prev and the
  /// input encoding are zero-padded or truncated to it.
  ad::Var deterministic_step(TapeBinding& p, ad::Var h_prev, const GraphSequence::Frame* u,
                             std::size_t n) const;

  GaussianParams prior(TapeBinding& p, ad::Var z_prev, ad::Var h) const;

  // a_t = g(a_next, h_t, A_t).
  ad::Var backward_step(TapeBinding& p, ad::Var a_next, ad::Var h,
                        const GraphSequence::Frame& f) const;

  /// Posterior for one snapshot. `psi_noise` is the N x noise_dim draw used
  /// by the semi-implicit trunk (ignored otherwise; null means zeros). When
  /// `trunk_trace` is set it receives the trunk activations r^(0..L).
  PosteriorOutput posterior(TapeBinding& p, ad::Var z_prev, ad::Var a, const GaussianParams& prior,
                            const GraphSequence::Frame& f, const ad::Tensor* psi_noise,
                            std::vector<ad::Var>* trunk_trace = nullptr) const;

  /// Full pass over snapshots [0, end). With `rng` null every noise draw is
  /// zero, so z_t is the posterior mean.
  SequenceStates run(TapeBinding& p, const GraphSequence& g, std::size_t end,
                     RngStreams* rng) const;

  // Negative ELBO over [0, end) with one reparameterized sample per snapshot.
  ElboTerms elbo_loss(TapeBinding& p, const GraphSequence& g, std::size_t end,
                      RngStreams& rng) const;

  // Posterior means over the whole sequence.
  std::vector<ad::Tensor> posterior_means(const ParameterStore& params,
                                          const GraphSequence& g) const;

  /// Prior mean for snapshot t + 1 computed from snapshots 0..t only:
  /// posterior means over the prefix, then h_{t+1} from u = {A_t, X_t}. Rows
  /// follow N_t.
  ad::Tensor predict_next(const ParameterStore& params, const GraphSequence& g,
                          std::size_t t) const;

  /// Prior (mean, std) over snapshot `target` with posterior means as the
  /// latent history. Prediction tasks build it from snapshots < target only
  /// (target >= 1); detection uses the window [0, target].
  std::pair<ad::Tensor, ad::Tensor> prior_for(const ParameterStore& params,
                                              const GraphSequence& g, std::size_t target) const;

  std::vector<std::string> parameter_keys() const;

 private:
  ad::Var recurrent_cell(TapeBinding& p, const std::string& name, ad::Var x, ad::Var h) const;

  SgrnnConfig config_;
};

// rows x cols draws from N(0, 1), row-major.
ad::Tensor standard_normal(std::mt19937_64& rng, std::size_t rows, std::size_t cols);

ad::Var reparameterize(const GaussianParams& params, const ad::Tensor& noise);

// Weighted reconstruction negative log-likelihood of `adjacency` under z.
ad::Var reconstruction_nll(ad::Var z, const ad::SparseMatrix& adjacency, const SgrnnConfig& cfg,
                           std::mt19937_64& rng);

/// (1/2b) sum [sq^2/sp^2 + (mp-mq)^2/sp^2 - log(sq^2/sp^2) - 1], b = rows.
ad::Var kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p);
double kl_diag_gaussian(const ad::Tensor& mu_q, const ad::Tensor& sigma_q,
                        const ad::Tensor& mu_p, const ad::Tensor& sigma_p);

// sum_i (gamma^2 + beta_i^2) / 2; an empty beta means zeros of length d.
double kl_floor(double gamma, std::span<const double> beta, std::size_t d);

// (1/2b) sum ((mu_q - mu_p) / sigma_p)^2.
double mean_shift_statistic(const ad::Tensor& mu_q, const ad::Tensor& mu_p,
                            const ad::Tensor& sigma_p);

/// sigmoid(z_i . z_j) for an N x d embedding.
class EdgeScorer {
 public:
  explicit EdgeScorer(ad::Tensor z) : z_(std::move(z)) {}

  std::size_t num_nodes() const noexcept { return z_.rows(); }
  // Throws ContractError for ids >= num_nodes().
  double score(std::size_t i, std::size_t j) const;
  std::vector<double> score_pairs(std::span<const data::Edge> pairs) const;
  // Dense N x N probabilities; refuses N > 2000.
  ad::Tensor full_matrix() const;

 private:
  ad::Tensor z_;
};

EdgeScorer decode(ad::Tensor z);

struct EvalSet {
  std::size_t snapshot = 0;  // t for detection, the target t+1 for prediction
  std::vector<data::Edge> pos;
  std::vector<data::Edge> neg;
};

struct PairScores {
  std::vector<double> pos;
  std::vector<double> neg;
};

/// Scores each evaluation set. Detection uses posterior means; prediction
/// modes use the prior mean from predict_next(snapshot - 1), zero-extending
/// embeddings for node ids beyond N_t.
std::vector<PairScores> rollout_predict(const SgrnnModel& model, const ParameterStore& params,
                                        const GraphSequence& g, std::span<const EvalSet> sets);

}  // namespace sgrnn::model

#endif  // SGRNN_MODEL_SGRNN_HPP_
