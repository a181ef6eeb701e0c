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

// Independent reference computations shared by the unit suites and the
// acceptance binary.

#ifndef SGRNN_TESTS_ORACLES_HPP_
#define SGRNN_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "sgrnn/ad/tensor.hpp"
#include "sgrnn/data/synthetic.hpp"
#include "sgrnn/model/sgrnn.hpp"
#include "sgrnn/model/sivi.hpp"

namespace sgrnn::testing {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline McEstimate mean_and_se(const std::vector<double>& v) {
  McEstimate e;
  for (double x : v) e.mean += x;
  e.mean /= static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - e.mean) * (x - e.mean);
  e.se = std::sqrt(sq / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return e;
}

/// (1/b) E_q[log q(z) - log p(z)] for b x d diagonal Gaussians, estimated with
/// `n` draws from q.
inline McEstimate kl_monte_carlo(const ad::Tensor& mq, const ad::Tensor& sq,
                                 const ad::Tensor& mp, const ad::Tensor& sp, std::size_t n,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const double b = static_cast<double>(mq.rows());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double lr = 0.0;
    for (std::size_t k = 0; k < mq.size(); ++k) {
      const double e = normal(rng);
      const double z = mq[k] + sq[k] * e;
      const double dp = (z - mp[k]) / sp[k];
      lr += (-std::log(sq[k]) - 0.5 * e * e) - (-std::log(sp[k]) - 0.5 * dp * dp);
    }
    lr /= b;
    sum += lr;
    sum_sq += lr * lr;
  }
  const double mean = sum / static_cast<double>(n);
  return {mean, std::sqrt((sum_sq / static_cast<double>(n) - mean * mean) / static_cast<double>(n))};
}

// All-pairs comparison with ties counted half.
inline double auc_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / static_cast<double>(pos.size() * neg.size());
}

// Thresholds at each distinct score, descending: sum of recall increment
// times precision at that threshold.
inline double ap_oracle(const std::vector<double>& pos, const std::vector<double>& neg) {
  std::set<double, std::greater<>> thresholds(pos.begin(), pos.end());
  thresholds.insert(neg.begin(), neg.end());
  double ap = 0.0, prev_tp = 0.0;
  for (double tau : thresholds) {
    const auto at_least = [tau](double s) { return s >= tau; };
    const double tp = static_cast<double>(std::count_if(pos.begin(), pos.end(), at_least));
    const double fp = static_cast<double>(std::count_if(neg.begin(), neg.end(), at_least));
    ap += (tp - prev_tp) / static_cast<double>(pos.size()) * tp / (tp + fp);
    prev_tp = tp;
  }
  return ap;
}

/// Calls `check(pos, neg)` for every labelling of every ranking of up to
/// `max_distinct` distinct scores, and of every {0, 1, 2}-valued score vector
/// of up to `max_tied` entries. Returns false as soon as a check fails.
template <typename Check>
bool for_each_small_input(std::size_t max_distinct, std::size_t max_tied, Check&& check) {
  for (std::size_t n = 2; n <= max_distinct; ++n) {
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<double> pos, neg;
      for (std::size_t i = 0; i < n; ++i)
        ((mask >> i) & 1 ? pos : neg).push_back(static_cast<double>(i));
      if (!check(pos, neg)) return false;
    }
  }
  for (std::size_t n = 2; n <= max_tied; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<double> score(n);
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= 3) score[i] = static_cast<double>(c % 3);
      for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
        std::vector<double> pos, neg;
        for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1 ? pos : neg).push_back(score[i]);
        if (!check(pos, neg)) return false;
      }
    }
  }
  return true;
}

inline double log_normal_density(const ad::Tensor& x, const ad::Tensor& mu,
                                 const ad::Tensor& sigma) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - mu[i]) / sigma[i];
    acc += -0.5 * d * d - std::log(sigma[i]) - half_log_2pi;
  }
  return acc;
}

inline double log_mean_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc / static_cast<double>(v.size()));
}

struct JensenResult {
  double lower = 0.0;    // mean single-psi lower bound
  double mixture = 0.0;  // mean ELBO with the mixture posterior density
  double se = 0.0;       // standard error of the paired difference
};

/// Single snapshot, 12 nodes, latent and noise width 4: compares the
/// single-psi lower bound with the ELBO under the semi-implicit mixture,
/// whose log-density is estimated from the sample's own component plus
/// `k_mix` fresh ones. Both use the same z and are scaled by 1/b.
inline JensenResult jensen_bound_experiment(std::size_t k_mix = 64, std::size_t samples = 400) {
  using namespace sgrnn::model;
  const std::size_t n = 12, d = 4;
  auto seq = data::synthetic_dynamic_graph(n, 1, 2, 0.6, 0.1, 0.1, 21);
  SgrnnConfig cfg;
  cfg.input_dim = n;
  cfg.max_nodes = n;
  cfg.latent_dim = d;
  cfg.variant = PosteriorVariant::kPlain;
  cfg.sivi.enabled = true;
  cfg.sivi.noise_dim = d;
  const SgrnnModel model(cfg);
  std::mt19937_64 init(21);
  ParameterStore params = model.init_parameters(init);
  // Widen the noise path so the mixture is visibly non-Gaussian.
  for (auto& v : params.at("q.trunk.w").values()) v *= 3.0;
  const GraphSequence g(seq);

  ad::Tape tape(false);
  TapeBinding p(tape, params);
  const auto states = model.run(p, g, 1, nullptr);
  const ad::Var z_prev = tape.constant(ad::Tensor(n, d));
  const ad::Var a = states.a[0];
  const GaussianParams prior = states.prior[0];
  const auto& frame = g.frame(0);
  const double b = static_cast<double>(n);

  std::mt19937_64 rng(22);
  std::vector<double> diffs;
  double lower_sum = 0.0, mixture_sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto own = sivi_posterior_params(p, model, z_prev, a, prior, frame, rng);
    const ad::Tensor& mu0 = own.psi_params.mu.value();
    const ad::Tensor& sig0 = own.psi_params.sigma.value();
    const ad::Tensor z = reparameterize(own.psi_params, standard_normal(rng, n, d)).value();
    std::mt19937_64 pair_rng(0);
    const double recon =
        -reconstruction_nll(tape.constant(z), frame.graph.raw(), cfg, pair_rng).value().item();
    const double lower = recon - kl_diag_gaussian(mu0, sig0, prior.mu.value(), prior.sigma.value());
    std::vector<double> log_q{log_normal_density(z, mu0, sig0)};
    for (std::size_t k = 0; k < k_mix; ++k) {
      const auto other = sivi_posterior_params(p, model, z_prev, a, prior, frame, rng);
      log_q.push_back(
          log_normal_density(z, other.psi_params.mu.value(), other.psi_params.sigma.value()));
    }
    const double log_p = log_normal_density(z, prior.mu.value(), prior.sigma.value());
    const double mixture = recon + (log_p - log_mean_exp(log_q)) / b;
    lower_sum += lower;
    mixture_sum += mixture;
    diffs.push_back(mixture - lower);
  }
  JensenResult r;
  r.lower = lower_sum / static_cast<double>(samples);
  r.mixture = mixture_sum / static_cast<double>(samples);
  r.se = mean_and_se(diffs).se;
  return r;
}

}  // namespace sgrnn::testing

#endif  // SGRNN_TESTS_ORACLES_HPP_
