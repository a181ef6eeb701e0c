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

#include "sgrnn/model/sgrnn.hpp"

#include <algorithm>
#include <cmath>

#include "sgrnn/errors.hpp"

namespace sgrnn::model {

using ad::Tensor;
using ad::Var;
using gnn::Activation;
using gnn::InputBlock;

// ---------------------------------------------------------------------------
// GraphSequence

GraphSequence::GraphSequence(const data::SnapshotSequence& seq) {
  std::vector<std::vector<data::Edge>> edges;
  for (const auto& s : seq.snapshots()) edges.push_back(s.edges);
  build(seq, edges);
}

GraphSequence::GraphSequence(const data::SnapshotSequence& seq, const data::EdgeSplit& split) {
  if (split.snapshots.size() != seq.size()) {
    throw ContractError("split covers " + std::to_string(split.snapshots.size()) +
                        " snapshots, sequence has " + std::to_string(seq.size()));
  }
  std::vector<std::vector<data::Edge>> edges;
  for (const auto& s : split.snapshots) edges.push_back(s.train);
  build(seq, edges);
}

void GraphSequence::build(const data::SnapshotSequence& seq,
                          const std::vector<std::vector<data::Edge>>& edges) {
  const data::SnapshotSequence featured =
      seq.has_attributes() ? seq : data::identity_features(seq);
  feature_dim_ = featured.attribute_dim();
  max_nodes_ = featured.max_nodes();
  for (std::size_t t = 0; t < featured.size(); ++t) {
    const auto& s = featured[t];
    frames_.push_back({gnn::GraphOperators(data::adjacency_matrix(s.num_nodes, edges[t])),
                       *s.attributes});
    nodes_.push_back(s.num_nodes);
  }
  access_.assign(frames_.size(), 0);
}

const GraphSequence::Frame& GraphSequence::frame(std::size_t t) const {
  if (t >= frames_.size()) {
    throw ContractError("snapshot " + std::to_string(t) + " is not part of the sequence");
  }
  ++access_[t];
  return frames_[t];
}

void GraphSequence::reset_access_counts() const { std::fill(access_.begin(), access_.end(), 0); }

// ---------------------------------------------------------------------------
// Rng streams

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Tensor standard_normal(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = normal(rng);
  return t;
}

RngStreams RngStreams::from_seed(std::uint64_t seed) {
  return {std::mt19937_64(splitmix64(seed)), std::mt19937_64(splitmix64(seed + 1)),
          std::mt19937_64(splitmix64(seed + 2))};
}

// ---------------------------------------------------------------------------
// Layer bookkeeping

namespace {

enum class LayerKind { kGraph, kDense, kCell };

struct LayerSpec {
  std::string name;
  LayerKind kind;
  std::size_t in;
  std::size_t out;
};

Tensor uniform(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = dist(rng);
  return t;
}

}  // namespace

SgrnnModel::SgrnnModel(SgrnnConfig config) : config_(std::move(config)) { config_.validate(); }

namespace {

std::vector<LayerSpec> layer_specs(const SgrnnConfig& c) {
  const bool graph_inference = !is_prediction(c.task);
  const LayerKind inference = graph_inference ? LayerKind::kGraph : LayerKind::kDense;
  const std::size_t adjacency_in = graph_inference ? 0 : c.max_nodes;
  std::vector<LayerSpec> specs{
      {"f.input", LayerKind::kGraph, c.input_dim, c.hidden_dim},
      {"f.cell", LayerKind::kCell, 2 * c.hidden_dim, c.hidden_dim},
      {"g.input", inference, c.hidden_dim + c.input_dim + adjacency_in, c.hidden_dim},
      {"g.cell", LayerKind::kCell, 2 * c.hidden_dim, c.hidden_dim},
      {"prior.trunk", LayerKind::kDense, c.latent_dim + c.hidden_dim, c.head_dim},
      {"prior.mu", LayerKind::kDense, c.head_dim, c.latent_dim},
      {"prior.sigma", LayerKind::kDense, c.head_dim, c.latent_dim},
  };
  std::size_t trunk_out = c.head_dim;
  if (c.sivi.enabled) {
    trunk_out = c.sivi.width;
    specs.push_back({"q.trunk", inference, c.latent_dim + c.hidden_dim + c.sivi.noise_dim,
                     c.sivi.width});
    for (std::size_t j = 2; j <= c.sivi.layers; ++j) {
      specs.push_back({"q.trunk" + std::to_string(j), inference,
                       c.latent_dim + c.sivi.width + c.sivi.noise_dim, c.sivi.width});
    }
  } else {
    specs.push_back({"q.trunk", inference, c.latent_dim + c.hidden_dim, c.head_dim});
  }
  specs.push_back({"q.mu", inference, trunk_out, c.latent_dim});
  specs.push_back({"q.sigma", inference, trunk_out, c.latent_dim});
  return specs;
}

bool uses_bn(PosteriorVariant v) {
  return v == PosteriorVariant::kFixedBn || v == PosteriorVariant::kNoStd;
}

}  // namespace

ParameterStore SgrnnModel::init_parameters(std::mt19937_64& rng) const {
  ParameterStore store;
  for (const auto& spec : layer_specs(config_)) {
    const double fc_bound = 1.0 / std::sqrt(static_cast<double>(spec.in));
    const double glorot = std::sqrt(6.0 / static_cast<double>(spec.in + spec.out));
    switch (spec.kind) {
      case LayerKind::kGraph:
        switch (config_.gnn_type) {
          case gnn::GnnType::kGcn:
            store.add(spec.name + ".w", uniform(rng, spec.in, spec.out, glorot));
            break;
          case gnn::GnnType::kSage:
            store.add(spec.name + ".w_self", uniform(rng, spec.in, spec.out, glorot));
            store.add(spec.name + ".w_neigh", uniform(rng, spec.in, spec.out, glorot));
            break;
          case gnn::GnnType::kGin: {
            const double g2 = std::sqrt(6.0 / static_cast<double>(2 * spec.out));
            store.add(spec.name + ".w1", uniform(rng, spec.in, spec.out, glorot));
            store.add(spec.name + ".w2", uniform(rng, spec.out, spec.out, g2));
            store.add(spec.name + ".eps", Tensor(1, 1));
            break;
          }
        }
        break;
      case LayerKind::kDense:
        store.add(spec.name + ".w", uniform(rng, spec.in, spec.out, fc_bound));
        store.add(spec.name + ".b", Tensor(1, spec.out));
        break;
      case LayerKind::kCell:
        if (config_.cell == CellType::kGru) {
          for (const char* gate : {"z", "r", "h"}) {
            store.add(spec.name + ".w" + gate, uniform(rng, spec.in, spec.out, fc_bound));
            store.add(spec.name + ".b" + gate, Tensor(1, spec.out));
          }
        } else {
          store.add(spec.name + ".w", uniform(rng, spec.in, spec.out, fc_bound));
          store.add(spec.name + ".b", Tensor(1, spec.out));
        }
        break;
    }
  }
  if (uses_bn(config_.variant)) store.add("q.beta", Tensor(1, config_.latent_dim));
  return store;
}

std::vector<std::string> SgrnnModel::parameter_keys() const {
  std::mt19937_64 rng(0);
  std::vector<std::string> keys;
  const ParameterStore store = init_parameters(rng);
  for (const auto& [k, v] : store.entries()) keys.push_back(k);
  return keys;
}

namespace {

gnn::GraphLayerParams bind_graph(TapeBinding& p, const std::string& name, gnn::GnnType type) {
  switch (type) {
    case gnn::GnnType::kGcn: return {type, p(name + ".w"), {}, {}};
    case gnn::GnnType::kSage: return {type, p(name + ".w_self"), p(name + ".w_neigh"), {}};
    case gnn::GnnType::kGin: return {type, p(name + ".w1"), p(name + ".w2"), p(name + ".eps")};
  }
  throw ContractError("unknown gnn type");
}

Var dense_layer(TapeBinding& p, const std::string& name, std::span<const InputBlock> in,
                Activation act) {
  Var pre = ad::add(gnn::project(in, p(name + ".w")), p(name + ".b"));
  return gnn::activate(pre, act);
}

Var zeros(ad::Tape& tape, std::size_t rows, std::size_t cols) {
  return tape.constant(Tensor(rows, cols));
}

Var fit_rows(Var v, std::size_t n) { return v.rows() == n ? v : ad::resize_rows(v, n); }

}  // namespace

// ---------------------------------------------------------------------------
// Building blocks

Var SgrnnModel::recurrent_cell(TapeBinding& p, const std::string& name, Var x, Var h) const {
  const std::vector<InputBlock> xh{InputBlock::of(x), InputBlock::of(h)};
  if (config_.cell == CellType::kMlp) return dense_layer(p, name, xh, Activation::kTanh);
  auto gate = [&](const char* g, std::span<const InputBlock> in, Activation act) {
    Var pre = ad::add(gnn::project(in, p(name + ".w" + g)), p(name + ".b" + g));
    return gnn::activate(pre, act);
  };
  Var update = gate("z", xh, Activation::kSigmoid);
  Var reset = gate("r", xh, Activation::kSigmoid);
  const std::vector<InputBlock> xrh{InputBlock::of(x), InputBlock::of(ad::mul(reset, h))};
  Var cand = gate("h", xrh, Activation::kTanh);
  return ad::add(h, ad::mul(update, ad::sub(cand, h)));
}

Var SgrnnModel::deterministic_step(TapeBinding& p, Var h_prev, const GraphSequence::Frame* u,
                                   std::size_t n) const {
  if (h_prev.cols() != config_.hidden_dim) {
    throw ShapeError("h_prev has " + std::to_string(h_prev.cols()) + " columns, expected " +
                     std::to_string(config_.hidden_dim));
  }
  Var h = fit_rows(h_prev, n);
  Var x;
  if (u == nullptr) {
    x = zeros(p.tape(), n, config_.hidden_dim);
  } else {
    const std::vector<InputBlock> in{InputBlock::of(u->features, config_.input_dim)};
    x = fit_rows(gnn::graph_layer(u->graph, in, bind_graph(p, "f.input", config_.gnn_type),
                                  Activation::kRelu),
                 n);
  }
  return recurrent_cell(p, "f.cell", x, h);
}

GaussianParams SgrnnModel::prior(TapeBinding& p, Var z_prev, Var h) const {
  if (z_prev.rows() != h.rows()) throw ShapeError("prior: z_prev and h row counts differ");
  const std::vector<InputBlock> in{InputBlock::of(z_prev, config_.latent_dim),
                                   InputBlock::of(h, config_.hidden_dim)};
  Var trunk = dense_layer(p, "prior.trunk", in, Activation::kRelu);
  const std::vector<InputBlock> head{InputBlock::of(trunk)};
  return {dense_layer(p, "prior.mu", head, Activation::kLinear),
          dense_layer(p, "prior.sigma", head, Activation::kSoftplus)};
}

namespace {

Var inference_layer(TapeBinding& p, const SgrnnConfig& c, const std::string& name,
                    const GraphSequence::Frame& f, std::span<const InputBlock> in,
                    Activation act) {
  if (is_prediction(c.task)) return dense_layer(p, name, in, act);
  return gnn::graph_layer(f.graph, in, bind_graph(p, name, c.gnn_type), act);
}

}  // namespace

Var SgrnnModel::backward_step(TapeBinding& p, Var a_next, Var h,
                              const GraphSequence::Frame& f) const {
  const std::size_t n = h.rows();
  if (f.graph.num_nodes() != n) throw ShapeError("backward_step: frame and h row counts differ");
  Var a = fit_rows(a_next, n);
  std::vector<InputBlock> in{InputBlock::of(h, config_.hidden_dim),
                             InputBlock::of(f.features, config_.input_dim)};
  if (is_prediction(config_.task)) {
    // Non-graph transform: adjacency rows enter as plain features.
    in.push_back(InputBlock::of(f.graph.raw(), config_.max_nodes));
  }
  Var x = inference_layer(p, config_, "g.input", f, in, Activation::kRelu);
  return recurrent_cell(p, "g.cell", x, a);
}

PosteriorOutput SgrnnModel::posterior(TapeBinding& p, Var z_prev, Var a, const GaussianParams& pr,
                                      const GraphSequence::Frame& f, const Tensor* psi_noise,
                                      std::vector<Var>* trunk_trace) const {
  const std::size_t n = a.rows();
  if (z_prev.rows() != n || pr.mu.rows() != n) {
    throw ShapeError("posterior: row counts of z_prev, a and prior differ");
  }
  Var trunk;
  if (config_.sivi.enabled) {
    Var eps = psi_noise ? p.tape().constant(*psi_noise)
                        : zeros(p.tape(), n, config_.sivi.noise_dim);
    if (eps.rows() != n || eps.cols() != config_.sivi.noise_dim) {
      throw ShapeError("posterior: psi noise has the wrong shape");
    }
    Var r = a;
    if (trunk_trace) trunk_trace->push_back(r);
    for (std::size_t j = 1; j <= config_.sivi.layers; ++j) {
      const std::string name = j == 1 ? "q.trunk" : "q.trunk" + std::to_string(j);
      const std::vector<InputBlock> in{InputBlock::of(z_prev, config_.latent_dim),
                                       InputBlock::of(r), InputBlock::of(eps)};
      r = inference_layer(p, config_, name, f, in, Activation::kRelu);
      if (trunk_trace) trunk_trace->push_back(r);
    }
    trunk = r;
  } else {
    const std::vector<InputBlock> in{InputBlock::of(z_prev, config_.latent_dim),
                                     InputBlock::of(a, config_.hidden_dim)};
    trunk = inference_layer(p, config_, "q.trunk", f, in, Activation::kRelu);
    if (trunk_trace) *trunk_trace = {a, trunk};
  }
  const std::vector<InputBlock> head_in{InputBlock::of(trunk)};
  Var head = inference_layer(p, config_, "q.mu", f, head_in, Activation::kLinear);
  Var sigma = inference_layer(p, config_, "q.sigma", f, head_in, Activation::kSoftplus);

  Var mu;
  switch (config_.variant) {
    case PosteriorVariant::kPlain:
      mu = head;
      break;
    case PosteriorVariant::kRes:
      mu = ad::add(pr.mu, head);
      break;
    case PosteriorVariant::kFixedBn:
    case PosteriorVariant::kNoStd: {
      const ad::FixedBNConfig bn{config_.gamma, config_.bn_epsilon};
      Var normed = ad::fixed_batch_norm(head, p("q.beta"), bn);
      mu = config_.variant == PosteriorVariant::kFixedBn ? ad::add(pr.mu, ad::mul(pr.sigma, normed))
                                                         : ad::add(pr.mu, normed);
      break;
    }
  }
  return {{mu, sigma}, head};
}

SequenceStates SgrnnModel::run(TapeBinding& p, const GraphSequence& g, std::size_t end,
                               RngStreams* rng) const {
  if (end == 0 || end > g.size()) {
    throw ContractError("run: window end " + std::to_string(end) + " outside [1, " +
                        std::to_string(g.size()) + "]");
  }
  if (g.feature_dim() > config_.input_dim) {
    throw ShapeError("features have width " + std::to_string(g.feature_dim()) +
                     " but the model expects at most " + std::to_string(config_.input_dim));
  }
  if (is_prediction(config_.task) && g.max_nodes() > config_.max_nodes) {
    throw ShapeError("sequence has " + std::to_string(g.max_nodes()) +
                     " nodes but the model was sized for " + std::to_string(config_.max_nodes));
  }
  ad::Tape& tape = p.tape();
  SequenceStates s;
  const bool detection = !is_prediction(config_.task);

  Var h = zeros(tape, g.num_nodes(0), config_.hidden_dim);
  for (std::size_t t = 0; t < end; ++t) {
    const GraphSequence::Frame* u = detection ? &g.frame(t) : (t == 0 ? nullptr : &g.frame(t - 1));
    h = deterministic_step(p, h, u, g.num_nodes(t));
    s.h.push_back(h);
  }

  s.a.resize(end);
  Var a = zeros(tape, g.num_nodes(end - 1), config_.hidden_dim);
  for (std::size_t t = end; t-- > 0;) {
    a = backward_step(p, a, s.h[t], g.frame(t));
    s.a[t] = a;
  }

  Var z = zeros(tape, g.num_nodes(0), config_.latent_dim);
  for (std::size_t t = 0; t < end; ++t) {
    const std::size_t n = g.num_nodes(t);
    Var z_prev = fit_rows(z, n);
    GaussianParams pr = prior(p, z_prev, s.h[t]);
    Tensor psi;
    if (config_.sivi.enabled && rng) psi = standard_normal(rng->psi, n, config_.sivi.noise_dim);
    PosteriorOutput post =
        posterior(p, z_prev, s.a[t], pr, g.frame(t), psi.size() ? &psi : nullptr);
    z = rng ? reparameterize(post.q, standard_normal(rng->reparam, n, config_.latent_dim))
            : post.q.mu;
    s.prior.push_back(pr);
    s.posterior.push_back(post);
    s.z.push_back(z);
  }
  return s;
}

ElboTerms SgrnnModel::elbo_loss(TapeBinding& p, const GraphSequence& g, std::size_t end,
                                RngStreams& rng) const {
  SequenceStates s = run(p, g, end, &rng);
  ElboTerms terms;
  Var loss;
  for (std::size_t t = 0; t < end; ++t) {
    Var recon = reconstruction_nll(s.z[t], g.frame(t).graph.raw(), config_, rng.pairs);
    Var kl = kl_diag_gaussian(s.posterior[t].q, s.prior[t]);
    terms.recon_ll.push_back(-recon.value().item());
    terms.kl.push_back(kl.value().item());
    terms.shift_stat.push_back(mean_shift_statistic(
        s.posterior[t].q.mu.value(), s.prior[t].mu.value(), s.prior[t].sigma.value()));
    terms.total += terms.recon_ll.back() - terms.kl.back();
    Var step = ad::add(recon, kl);
    loss = loss.valid() ? ad::add(loss, step) : step;
  }
  terms.loss = loss;
  return terms;
}

std::vector<Tensor> SgrnnModel::posterior_means(const ParameterStore& params,
                                                const GraphSequence& g) const {
  ad::Tape tape(false);
  TapeBinding p(tape, params);
  SequenceStates s = run(p, g, g.size(), nullptr);
  std::vector<Tensor> out;
  for (const auto& post : s.posterior) out.push_back(post.q.mu.value());
  return out;
}

Tensor SgrnnModel::predict_next(const ParameterStore& params, const GraphSequence& g,
                                std::size_t t) const {
  if (!is_prediction(config_.task)) {
    throw ContractError("predict_next is only defined for prediction tasks");
  }
  return prior_for(params, g, t + 1).first;
}

std::pair<Tensor, Tensor> SgrnnModel::prior_for(const ParameterStore& params,
                                                const GraphSequence& g, std::size_t target) const {
  ad::Tape tape(false);
  TapeBinding p(tape, params);
  if (!is_prediction(config_.task)) {
    if (target >= g.size()) throw ContractError("prior_for: snapshot outside the sequence");
    SequenceStates s = run(p, g, target + 1, nullptr);
    return {s.prior[target].mu.value(), s.prior[target].sigma.value()};
  }
  if (target == 0) throw ContractError("prior_for: prediction needs a target snapshot >= 1");
  const std::size_t t = target - 1;
  SequenceStates s = run(p, g, t + 1, nullptr);
  const std::size_t n = g.num_nodes(t);
  Var h_next = deterministic_step(p, s.h[t], &g.frame(t), n);
  GaussianParams pr = prior(p, s.z[t], h_next);
  return {pr.mu.value(), pr.sigma.value()};
}

// ---------------------------------------------------------------------------
// Free functions

Var reparameterize(const GaussianParams& params, const Tensor& noise) {
  if (noise.shape() != params.mu.shape() || noise.shape() != params.sigma.shape()) {
    throw ShapeError("reparameterize: noise " + noise.shape().str() + " vs mu " +
                     params.mu.shape().str());
  }
  return ad::add(params.mu, ad::mul(params.sigma, params.mu.tape().constant(noise)));
}

Var reconstruction_nll(Var z, const ad::SparseMatrix& adjacency, const SgrnnConfig& cfg,
                       std::mt19937_64& rng) {
  const std::size_t n = adjacency.rows();
  if (z.rows() != n) throw ShapeError("reconstruction: z rows differ from adjacency size");
  const double ordered_pos = static_cast<double>(adjacency.nnz());
  if (ordered_pos == 0.0) throw ContractError("reconstruction: snapshot has no training edges");
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1);
  const double ordered_neg = pairs - ordered_pos;
  double pos_weight = 1.0;
  double norm = 1.0;
  if (cfg.pos_weight_mode == PosWeightMode::kBalanced && ordered_neg > 0.0) {
    pos_weight = ordered_neg / ordered_pos;
    norm = pairs / (2.0 * ordered_neg);
  }
  // Sum over pairs divided by the node count, matching the KL's 1/b rows.
  norm *= pairs / static_cast<double>(n);
  if (n <= cfg.full_pair_limit) {
    return ad::inner_product_bce(z, adjacency, {pos_weight, norm, true});
  }

  // Unordered positives plus uniformly sampled unordered non-edges, weighted
  // so the expectation equals the full-pair objective.
  std::vector<ad::NodePair> pos;
  const auto& off = adjacency.row_offsets();
  const auto& col = adjacency.col_indices();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = off[i]; k < off[i + 1]; ++k)
      if (col[k] > i) pos.emplace_back(i, col[k]);
  const std::size_t m = std::max<std::size_t>(1, cfg.negative_ratio * pos.size());
  std::vector<ad::NodePair> neg;
  neg.reserve(m);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  while (neg.size() < m) {
    const std::size_t i = node(rng);
    const std::size_t j = node(rng);
    if (i == j || adjacency.contains(i, j)) continue;
    neg.emplace_back(std::min(i, j), std::max(i, j));
  }
  Var pos_term = ad::bce_with_logits(ad::pair_logits(z, pos), Tensor(pos.size(), 1, 1.0));
  Var neg_term = ad::bce_with_logits(ad::pair_logits(z, neg), Tensor(neg.size(), 1, 0.0));
  const double unordered_pos = ordered_pos / 2.0;
  const double unordered_neg = ordered_neg / 2.0;
  return ad::add(ad::scale(pos_term, norm * 2.0 * pos_weight * unordered_pos / pairs),
                 ad::scale(neg_term, norm * 2.0 * unordered_neg / pairs));
}

Var kl_diag_gaussian(const GaussianParams& q, const GaussianParams& p) {
  if (q.mu.shape() != p.mu.shape() || q.sigma.shape() != p.sigma.shape() ||
      q.mu.shape() != q.sigma.shape()) {
    throw ShapeError("kl_diag_gaussian: parameter shapes differ");
  }
  const double b = static_cast<double>(q.mu.rows());
  const double entries = static_cast<double>(q.mu.value().size());
  Var ratio = ad::div(q.sigma, p.sigma);
  Var shift = ad::div(ad::sub(p.mu, q.mu), p.sigma);
  Var inner = ad::sub(ad::add(ad::square(ratio), ad::square(shift)), ad::scale(ad::log(ratio), 2.0));
  return ad::scale(ad::add_scalar(ad::sum(inner), -entries), 1.0 / (2.0 * b));
}

double kl_diag_gaussian(const Tensor& mu_q, const Tensor& sigma_q, const Tensor& mu_p,
                        const Tensor& sigma_p) {
  if (mu_q.shape() != mu_p.shape() || sigma_q.shape() != sigma_p.shape() ||
      mu_q.shape() != sigma_q.shape()) {
    throw ShapeError("kl_diag_gaussian: parameter shapes differ");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < mu_q.size(); ++k) {
    const double r = sigma_q[k] / sigma_p[k];
    const double s = (mu_p[k] - mu_q[k]) / sigma_p[k];
    acc += r * r + s * s - 2.0 * std::log(r) - 1.0;
  }
  return acc / (2.0 * static_cast<double>(mu_q.rows()));
}

double kl_floor(double gamma, std::span<const double> beta, std::size_t d) {
  if (!beta.empty() && beta.size() != d) throw ShapeError("kl_floor: beta length differs from d");
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double b = beta.empty() ? 0.0 : beta[i];
    acc += (gamma * gamma + b * b) / 2.0;
  }
  return acc;
}

double mean_shift_statistic(const Tensor& mu_q, const Tensor& mu_p, const Tensor& sigma_p) {
  double acc = 0.0;
  for (std::size_t k = 0; k < mu_q.size(); ++k) {
    const double s = (mu_q[k] - mu_p[k]) / sigma_p[k];
    acc += s * s;
  }
  return acc / (2.0 * static_cast<double>(mu_q.rows()));
}

// ---------------------------------------------------------------------------
// Decoder and rollout

double EdgeScorer::score(std::size_t i, std::size_t j) const {
  if (i >= z_.rows() || j >= z_.rows()) {
    throw ContractError("score: node id out of range for " + std::to_string(z_.rows()) +
                        " embeddings");
  }
  double dot = 0.0;
  const auto zi = z_.row(i);
  const auto zj = z_.row(j);
  for (std::size_t k = 0; k < zi.size(); ++k) dot += zi[k] * zj[k];
  return ad::sigmoid(dot);
}

std::vector<double> EdgeScorer::score_pairs(std::span<const data::Edge> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& e : pairs) out.push_back(score(e.u, e.v));
  return out;
}

Tensor EdgeScorer::full_matrix() const {
  if (z_.rows() > 2000) throw ContractError("full_matrix: refusing to materialize N > 2000");
  Tensor out = ad::matmul_nt(z_, z_);
  for (auto& v : out.values()) v = ad::sigmoid(v);
  return out;
}

EdgeScorer decode(Tensor z) {
  if (!z.all_finite()) throw NonFiniteError("decode: embeddings are not finite");
  return EdgeScorer(std::move(z));
}

namespace {

Tensor extend_rows(const Tensor& z, std::span<const EvalSet> sets_one) {
  std::size_t need = z.rows();
  for (const auto& s : sets_one) {
    for (const auto& e : s.pos) need = std::max<std::size_t>(need, e.v + 1);
    for (const auto& e : s.neg) need = std::max<std::size_t>(need, e.v + 1);
  }
  if (need == z.rows()) return z;
  Tensor out(need, z.cols());
  std::copy(z.values().begin(), z.values().end(), out.values().begin());
  return out;
}

}  // namespace

std::vector<PairScores> rollout_predict(const SgrnnModel& model, const ParameterStore& params,
                                        const GraphSequence& g, std::span<const EvalSet> sets) {
  std::vector<PairScores> out;
  if (!is_prediction(model.config().task)) {
    const auto means = model.posterior_means(params, g);
    for (const auto& s : sets) {
      if (s.snapshot >= means.size()) throw ContractError("detection set outside the sequence");
      const EdgeScorer scorer = decode(means[s.snapshot]);
      out.push_back({scorer.score_pairs(s.pos), scorer.score_pairs(s.neg)});
    }
    return out;
  }
  for (const auto& s : sets) {
    if (s.snapshot == 0 || s.snapshot > g.size()) {
      throw ContractError("prediction set must target a snapshot in [1, T]");
    }
    const Tensor z = model.predict_next(params, g, s.snapshot - 1);
    const EdgeScorer scorer = decode(extend_rows(z, std::span<const EvalSet>(&s, 1)));
    out.push_back({scorer.score_pairs(s.pos), scorer.score_pairs(s.neg)});
  }
  return out;
}

}  // namespace sgrnn::model
