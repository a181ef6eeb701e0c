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

#ifndef SGRNN_TRAIN_METRICS_HPP_
#define SGRNN_TRAIN_METRICS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "sgrnn/model/sgrnn.hpp"

namespace sgrnn::train {

struct AucAp {
  double auc = 0.0;
  double ap = 0.0;
};

/// ROC AUC as the rank statistic with ties counted one half, and average
/// precision as the precision-weighted recall increments over the descending
/// score ranking (tied scores form one threshold). Throws ContractError when
/// either side is empty.
AucAp evaluate_auc_ap(std::span<const double> pos, std::span<const double> neg);

// Mean of per-set metrics.
AucAp mean_auc_ap(std::span<const model::PairScores> scores);
// Metrics over the union of all sets' pairs.
AucAp pooled_auc_ap(std::span<const model::PairScores> scores);

struct NllReport {
  std::vector<double> per_snapshot;  // mean over evaluated pairs
  double total = 0.0;                // sum over snapshots
};

/// For each set: draws `n_samples` latents from the prior of its snapshot and
/// reports, averaged over the set's pairs, -log of the Monte-Carlo mean of
/// p(label | Z) (log-mean-exp). Throws ContractError when n_samples < 1.
NllReport estimate_nll(const model::SgrnnModel& model, const model::ParameterStore& params,
                       const model::GraphSequence& g, std::span<const model::EvalSet> sets,
                       std::size_t n_samples, std::uint64_t seed);

}  // namespace sgrnn::train

#endif  // SGRNN_TRAIN_METRICS_HPP_
