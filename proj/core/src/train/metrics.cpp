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
#include "sgrnn/train/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sgrnn/errors.hpp"

namespace sgrnn::train {

AucAp evaluate_auc_ap(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) {
    throw ContractError("evaluate_auc_ap: positive and negative scores must be non-empty");
  }
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(pos.size() + neg.size());
  for (double s : pos) items.push_back({s, true});
  for (double s : neg) items.push_back({s, false});
  std::sort(items.begin(), items.end(),
            [](const Item& a, const Item& b) { return a.score > b.score; });

  const double n_pos = static_cast<double>(pos.size());
  const double n_neg = static_cast<double>(neg.size());
  double auc_num = 0.0;  // sum over positives of (#neg below + half #neg tied)
  double ap = 0.0;
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    double group_pos = 0.0, group_neg = 0.0;
    while (j < items.size() && items[j].score == items[i].score) {
      (items[j].positive ? group_pos : group_neg) += 1.0;
      ++j;
    }
    const double neg_below = n_neg - fp - group_neg;
    auc_num += group_pos * (neg_below + 0.5 * group_neg);
    tp += group_pos;
    fp += group_neg;
    ap += (group_pos / n_pos) * (tp / (tp + fp));
    i = j;
  }
  return {auc_num / (n_pos * n_neg), ap};
}

AucAp mean_auc_ap(std::span<const model::PairScores> scores) {
  if (scores.empty()) throw ContractError("mean_auc_ap: no score sets");
  AucAp mean;
  for (const auto& s : scores) {
    const AucAp m = evaluate_auc_ap(s.pos, s.neg);
    mean.auc += m.auc;
    mean.ap += m.ap;
  }
  mean.auc /= static_cast<double>(scores.size());
  mean.ap /= static_cast<double>(scores.size());
  return mean;
}

AucAp pooled_auc_ap(std::span<const model::PairScores> scores) {
  std::vector<double> pos, neg;
  for (const auto& s : scores) {
    pos.insert(pos.end(), s.pos.begin(), s.pos.end());
    neg.insert(neg.end(), s.neg.begin(), s.neg.end());
  }
  return evaluate_auc_ap(pos, neg);
}

namespace {

// log sigmoid(x) and log(1 - sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double log_mean_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc / static_cast<double>(v.size()));
}

double dot_row(const ad::Tensor& z, std::size_t i, std::size_t j) {
  if (i >= z.rows() || j >= z.rows()) return 0.0;  // unseen nodes embed at zero
  double acc = 0.0;
  for (std::size_t k = 0; k < z.cols(); ++k) acc += z(i, k) * z(j, k);
  return acc;
}

}  // namespace

NllReport estimate_nll(const model::SgrnnModel& model, const model::ParameterStore& params,
                       const model::GraphSequence& g, std::span<const model::EvalSet> sets,
                       std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ContractError("estimate_nll: n_samples must be >= 1");
  std::mt19937_64 rng(seed);
  NllReport report;
  for (const auto& set : sets) {
    const auto [mu, sigma] = model.prior_for(params, g, set.snapshot);
    const std::size_t pairs = set.pos.size() + set.neg.size();
    if (pairs == 0) throw ContractError("estimate_nll: evaluation set has no pairs");
    std::vector<std::vector<double>> loglik(pairs, std::vector<double>(n_samples));
    for (std::size_t s = 0; s < n_samples; ++s) {
      const ad::Tensor eps = model::standard_normal(rng, mu.rows(), mu.cols());
      ad::Tensor z = mu;
      for (std::size_t i = 0; i < z.size(); ++i) z[i] += sigma[i] * eps[i];
      std::size_t k = 0;
      for (const auto& e : set.pos) loglik[k++][s] = log_sigmoid(dot_row(z, e.u, e.v));
      for (const auto& e : set.neg) loglik[k++][s] = log_sigmoid(-dot_row(z, e.u, e.v));
    }
    double acc = 0.0;
    for (const auto& l : loglik) acc -= log_mean_exp(l);
    report.per_snapshot.push_back(acc / static_cast<double>(pairs));
    report.total += report.per_snapshot.back();
  }
  return report;
}

}  // namespace sgrnn::train
