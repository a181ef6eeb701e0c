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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "sgrnn/data/synthetic.hpp"
#include "sgrnn/errors.hpp"
#include "sgrnn/train/metrics.hpp"
#include "sgrnn/train/optim.hpp"
#include "sgrnn/train/trainer.hpp"

namespace sgrnn::train {
namespace {

using ad::Tensor;
using model::ParameterStore;
using model::Task;

ParameterStore scalar_store(double value) {
  ParameterStore s;
  s.add("w", Tensor::scalar(value));
  return s;
}

// ---------------------------------------------------------------------------
// Adam

TEST(AdamStep, ZeroGradientLeavesParametersUnchanged) {
  ParameterStore params;
  params.add("a", Tensor(2, 3));
  params.at("a")(1, 2) = 0.7;
  params.add("b", Tensor::scalar(-1.5));
  const ParameterStore before = params;
  OptimizerState state;
  for (int i = 0; i < 5; ++i) adam_step(params, params.zeros_like(), state, TrainConfig{});
  EXPECT_EQ(params, before);
  EXPECT_EQ(state.step, 5u);
}

TEST(AdamStep, FirstStepIsLearningRateTimesSign) {
  for (double g : {3.0, -0.02, 250.0}) {
    ParameterStore params = scalar_store(1.0);
    OptimizerState state;
    TrainConfig cfg;
    adam_step(params, scalar_store(g), state, cfg);
    const double step = params.at("w").item() - 1.0;
    EXPECT_NEAR(step, -cfg.learning_rate * (g > 0 ? 1.0 : -1.0), 1e-8) << "g=" << g;
  }
}

TEST(AdamStep, MatchesHandRolledUpdateOverSeveralSteps) {
  ParameterStore params = scalar_store(0.5);
  OptimizerState state;
  TrainConfig cfg;
  double w = 0.5, m = 0.0, v = 0.0;
  const std::vector<double> grads = {0.3, -1.2, 0.05, 2.0};
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    const double g = grads[t - 1];
    adam_step(params, scalar_store(g), state, cfg);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    const double vh = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    w -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(params.at("w").item(), w, 1e-14);
  }
}

TEST(AdamStep, DeterministicAcrossRuns) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<ParameterStore> grads;
  for (int i = 0; i < 10; ++i) {
    ParameterStore g;
    Tensor t(3, 2);
    for (auto& x : t.values()) x = normal(rng);
    g.add("x", t);
    grads.push_back(g);
  }
  auto run = [&] {
    ParameterStore p;
    p.add("x", Tensor(3, 2));
    OptimizerState s;
    for (const auto& g : grads) adam_step(p, g, s, TrainConfig{});
    return std::make_pair(p, s);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(AdamStep, KeyOrShapeMismatchIsContractError) {
  ParameterStore params = scalar_store(1.0);
  OptimizerState state;
  ParameterStore other;
  other.add("v", Tensor::scalar(1.0));
  EXPECT_THROW(adam_step(params, other, state, TrainConfig{}), ContractError);
  ParameterStore shaped;
  shaped.add("w", Tensor(2, 1));
  EXPECT_THROW(adam_step(params, shaped, state, TrainConfig{}), ContractError);
}

TEST(TrainConfig, RejectsInvalidValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// ---------------------------------------------------------------------------
// Early stopping

// Replays the history one epoch at a time, as the trainer does.
StopDecision replay(const std::vector<double>& h, std::size_t patience, std::size_t* stopped_at) {
  *stopped_at = 0;
  StopDecision d;
  for (std::size_t n = 1; n <= h.size(); ++n) {
    d = early_stopping_check(std::span(h.data(), n), patience);
    if (d.stop) {
      *stopped_at = n;
      break;
    }
  }
  return d;
}

TEST(EarlyStopping, FlatHistoryStopsAtThreeWithBestOne) {
  std::size_t at = 0;
  const auto d = replay({0.7, 0.7, 0.7}, 2, &at);
  EXPECT_EQ(at, 3u);
  EXPECT_EQ(d.best_epoch, 1u);
}

TEST(EarlyStopping, PeakThenDeclineStopsAfterFour) {
  std::size_t at = 0;
  const auto d = replay({0.6, 0.8, 0.75, 0.79}, 2, &at);
  EXPECT_EQ(at, 4u);
  EXPECT_EQ(d.best_epoch, 2u);
}

TEST(EarlyStopping, StrictlyImprovingNeverStops) {
  std::vector<double> h;
  for (int i = 0; i < 200; ++i) h.push_back(0.5 + 0.002 * i);
  for (std::size_t patience : {0u, 1u, 5u}) {
    std::size_t at = 0;
    const auto d = replay(h, patience, &at);
    EXPECT_EQ(at, 0u);
    EXPECT_EQ(d.best_epoch, h.size());
  }
}

TEST(EarlyStopping, PatienceZeroStopsOneEpochPastBest) {
  std::size_t at = 0;
  const auto d = replay({0.5, 0.6, 0.7, 0.65, 0.9}, 0, &at);
  EXPECT_EQ(d.best_epoch, 3u);
  EXPECT_EQ(at, 4u);
}

// ---------------------------------------------------------------------------
// AUC / AP

TEST(AucAp, PerfectSeparation) {
  const std::vector<double> pos = {0.9, 0.8}, neg = {0.2, 0.1};
  const auto m = evaluate_auc_ap(pos, neg);
  EXPECT_DOUBLE_EQ(m.auc, 1.0);
  EXPECT_DOUBLE_EQ(m.ap, 1.0);
}

TEST(AucAp, AllEqualScoresGiveHalfAuc) {
  const std::vector<double> pos = {0.3, 0.3, 0.3}, neg = {0.3, 0.3};
  EXPECT_DOUBLE_EQ(evaluate_auc_ap(pos, neg).auc, 0.5);
}

TEST(AucAp, PosNegPosRanking) {
  const std::vector<double> pos = {0.9, 0.5}, neg = {0.7};
  EXPECT_NEAR(evaluate_auc_ap(pos, neg).ap, (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
}

TEST(AucAp, EmptySideIsContractError) {
  const std::vector<double> some = {0.1}, none;
  EXPECT_THROW(evaluate_auc_ap(none, some), ContractError);
  EXPECT_THROW(evaluate_auc_ap(some, none), ContractError);
}

TEST(AucAp, MatchesExhaustivePairOracle) {
  // Every ranking of up to 12 distinct scores and every tie pattern up to 7.
  const bool ok = testing::for_each_small_input(12, 7, [](const auto& pos, const auto& neg) {
    const auto m = evaluate_auc_ap(pos, neg);
    const bool good = std::abs(m.auc - testing::auc_oracle(pos, neg)) <= 1e-12 &&
                      std::abs(m.ap - testing::ap_oracle(pos, neg)) <= 1e-12;
    EXPECT_TRUE(good) << "pos " << pos.size() << " neg " << neg.size();
    return good;
  });
  EXPECT_TRUE(ok);
}

TEST(AucAp, InvariantUnderStrictlyMonotoneTransforms) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pos(20), neg(30);
    for (auto& x : pos) x = std::round(normal(rng) * 4.0) / 4.0 + 0.5;
    for (auto& x : neg) x = std::round(normal(rng) * 4.0) / 4.0;
    const auto base = evaluate_auc_ap(pos, neg);
    for (auto f : {+[](double x) { return std::exp(x); }, +[](double x) { return x * x * x - 7.0; },
                   +[](double x) { return 1.0 / (1.0 + std::exp(-x)); }}) {
      std::vector<double> tp(pos), tn(neg);
      std::transform(tp.begin(), tp.end(), tp.begin(), f);
      std::transform(tn.begin(), tn.end(), tn.begin(), f);
      const auto m = evaluate_auc_ap(tp, tn);
      EXPECT_NEAR(m.auc, base.auc, 1e-12);
      EXPECT_NEAR(m.ap, base.ap, 1e-12);
    }
  }
}

TEST(AucAp, MeanAndPooledAggregation) {
  std::vector<model::PairScores> sets(2);
  sets[0] = {{0.9}, {0.1}};   // AUC 1
  sets[1] = {{0.2}, {0.95}};  // AUC 0
  EXPECT_DOUBLE_EQ(mean_auc_ap(sets).auc, 0.5);
  // Pooled: pos {0.9, 0.2}, neg {0.1, 0.95}: pairs won 0.9>0.1, 0.2>0.1.
  EXPECT_DOUBLE_EQ(pooled_auc_ap(sets).auc, 0.5);
  // Pooled: pos {0.9, 0.2}, neg {0.1, 0.25}: three of four pairs won.
  sets[1] = {{0.2}, {0.25}};
  EXPECT_DOUBLE_EQ(mean_auc_ap(sets).auc, 0.5);
  EXPECT_DOUBLE_EQ(pooled_auc_ap(sets).auc, 0.75);
}

// ---------------------------------------------------------------------------
// Task preparation

data::SnapshotSequence clique_fixture(std::uint64_t seed) {
  return data::synthetic_dynamic_graph(60, 8, 2, 1.0, 0.0, 0.0, seed);
}

data::SnapshotSequence sbm_fixture(std::uint64_t seed) {
  return data::synthetic_dynamic_graph(60, 8, 2, 0.9, 0.02, 0.05, seed);
}

TEST(PrepareTask, DetectionLayout) {
  const auto td = prepare_task(sbm_fixture(1), Task::kDetection, 3, 1);
  EXPECT_EQ(td.train_end, 8u);
  EXPECT_EQ(td.validation.size(), 8u);
  ASSERT_EQ(td.test.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(td.test[i].snapshot, 5 + i);
}

TEST(PrepareTask, PredictionLayout) {
  for (Task task : {Task::kPrediction, Task::kNewPrediction}) {
    const auto seq = sbm_fixture(1);
    const auto td = prepare_task(seq, task, 3, 1);
    EXPECT_EQ(td.train_end, 5u);
    ASSERT_EQ(td.validation.size(), 1u);
    EXPECT_LT(td.validation[0].snapshot, td.train_end);
    EXPECT_GE(td.validation[0].snapshot, 1u);
    ASSERT_EQ(td.test.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& set = td.test[i];
      EXPECT_EQ(set.snapshot, 5 + i);
      const auto now = data::make_edge_set(seq[set.snapshot].edges);
      const auto before = data::make_edge_set(seq[set.snapshot - 1].edges);
      for (const auto& e : set.pos) {
        EXPECT_TRUE(now.count(data::pair_key(e.u, e.v)));
        if (task == Task::kNewPrediction) EXPECT_FALSE(before.count(data::pair_key(e.u, e.v)));
      }
      for (const auto& e : set.neg) EXPECT_FALSE(now.count(data::pair_key(e.u, e.v)));
    }
  }
}

TEST(PrepareTask, TooShortSequenceIsSplitError) {
  const auto seq = data::synthetic_dynamic_graph(30, 4, 2, 0.9, 0.02, 0.05, 1);
  EXPECT_THROW(prepare_task(seq, Task::kPrediction, 3, 1), SplitError);
  EXPECT_THROW(prepare_task(seq, Task::kDetection, 5, 1), SplitError);
  EXPECT_THROW(prepare_task(seq, Task::kDetection, 0, 1), SplitError);
}

// ---------------------------------------------------------------------------
// NLL

TEST(EstimateNll, ZeroLatentsGiveLnTwoPerPair) {
  const auto td = prepare_task(sbm_fixture(2), Task::kPrediction, 3, 2);
  const model::SgrnnModel m(fit_config({}, td));
  std::mt19937_64 rng(0);
  ParameterStore params = m.init_parameters(rng).zeros_like();
  // Prior mean 0 and a vanishing prior std collapse every draw onto Z = 0.
  for (auto& v : params.at("prior.sigma.b").values()) v = -800.0;
  const auto report = estimate_nll(m, params, td.graphs, td.test, 8, 3);
  ASSERT_EQ(report.per_snapshot.size(), td.test.size());
  for (double v : report.per_snapshot) EXPECT_NEAR(v, std::log(2.0), 1e-12);
  EXPECT_NEAR(report.total, 3.0 * std::log(2.0), 1e-12);
}

TEST(EstimateNll, MoreSamplesTightenTheEstimate) {
  const auto td = prepare_task(sbm_fixture(3), Task::kPrediction, 3, 3);
  const model::SgrnnModel m(fit_config({}, td));
  std::mt19937_64 rng(3);
  const ParameterStore params = m.init_parameters(rng);
  const std::size_t reps = 30;
  std::vector<double> one;
  for (std::size_t r = 0; r < reps; ++r)
    one.push_back(estimate_nll(m, params, td.graphs, td.test, 1, 100 + r).total);
  const double mean = std::accumulate(one.begin(), one.end(), 0.0) / reps;
  double var = 0.0;
  for (double v : one) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (reps - 1) / reps);
  const double many = estimate_nll(m, params, td.graphs, td.test, 64, 7).total;
  EXPECT_LE(many, mean + 2.0 * se) << "one-sample " << mean << " +- " << se;
  EXPECT_GE(many, 0.0);
}

TEST(EstimateNll, DeterministicAndValidated) {
  const auto td = prepare_task(sbm_fixture(4), Task::kPrediction, 3, 4);
  const model::SgrnnModel m(fit_config({}, td));
  std::mt19937_64 rng(4);
  const ParameterStore params = m.init_parameters(rng);
  const auto a = estimate_nll(m, params, td.graphs, td.test, 16, 9);
  const auto b = estimate_nll(m, params, td.graphs, td.test, 16, 9);
  EXPECT_EQ(a.per_snapshot, b.per_snapshot);
  EXPECT_THROW(estimate_nll(m, params, td.graphs, td.test, 0, 9), ContractError);
}

// ---------------------------------------------------------------------------
// Training

TEST(Train, CliqueFixtureReachesHighValidationAuc) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto td = prepare_task(clique_fixture(seed), Task::kDetection, 3, seed);
    const model::SgrnnModel m(fit_config({}, td));
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = seed;
    const auto result = train(m, td, cfg);
    EXPECT_GT(result.record.best_val_auc, 0.9) << "seed " << seed;
    EXPECT_LE(result.record.epochs.size(), 300u);
  }
}

TEST(Train, WithinCliquePairsOutscoreCrossCliquePairs) {
  const auto td = prepare_task(clique_fixture(5), Task::kDetection, 3, 5);
  const model::SgrnnModel m(fit_config({}, td));
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.seed = 5;
  const auto result = train(m, td, cfg);
  const auto scores = model::rollout_predict(m, result.params, td.graphs, td.test);
  for (const auto& s : scores) {
    const double pos = std::accumulate(s.pos.begin(), s.pos.end(), 0.0) / s.pos.size();
    const double neg = std::accumulate(s.neg.begin(), s.neg.end(), 0.0) / s.neg.size();
    EXPECT_GT(pos, neg);
  }
}

TEST(Train, ElboIncreasesOverFirstFiftySteps) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto td = prepare_task(clique_fixture(seed), Task::kDetection, 3, seed);
    const model::SgrnnModel m(fit_config({}, td));
    std::mt19937_64 init(seed);
    ParameterStore params = m.init_parameters(init);
    OptimizerState state;
    double prev = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    for (int step = 0; step <= 50; ++step) {
      // A common noise draw per step isolates the optimizer from Monte-Carlo noise.
      auto streams = model::RngStreams::from_seed(seed);
      ad::Tape tape;
      model::TapeBinding p(tape, params);
      const auto terms = m.elbo_loss(p, td.graphs, td.train_end, streams);
      if (terms.total <= prev) ++violations;
      prev = terms.total;
      if (step == 50) break;
      tape.backward(terms.loss);
      adam_step(params, p.gradients(), state, TrainConfig{});
    }
    EXPECT_EQ(violations, 0u) << "seed " << seed;
  }
}

TEST(Train, SameSeedGivesIdenticalRunRecord) {
  const auto td = prepare_task(sbm_fixture(6), Task::kDetection, 3, 6);
  const model::SgrnnModel m(fit_config({}, td));
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 6;
  const auto a = train(m, td, cfg);
  const auto b = train(m, td, cfg);
  EXPECT_EQ(a.record.epochs, b.record.epochs);
  EXPECT_EQ(a.record.best_epoch, b.record.best_epoch);
  EXPECT_EQ(a.params, b.params);
}

TEST(Train, PatienceZeroStopsOneEpochPastBest) {
  const auto td = prepare_task(sbm_fixture(7), Task::kDetection, 3, 7);
  const model::SgrnnModel m(fit_config({}, td));
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.patience = 0;
  cfg.seed = 7;
  const auto r = train(m, td, cfg).record;
  ASSERT_LT(r.epochs.size(), 200u);
  EXPECT_EQ(r.epochs.size(), r.best_epoch + 1);
}

TEST(Train, ReturnsBestValidationCheckpoint) {
  const auto td = prepare_task(sbm_fixture(8), Task::kDetection, 3, 8);
  const model::SgrnnModel m(fit_config({}, td));
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.patience = 10;
  cfg.seed = 8;
  const auto result = train(m, td, cfg);
  const auto scores = model::rollout_predict(m, result.params, td.graphs, td.validation);
  EXPECT_DOUBLE_EQ(pooled_auc_ap(scores).auc, result.record.best_val_auc);
  double best = 0.0;
  for (const auto& e : result.record.epochs) best = std::max(best, e.val_auc);
  EXPECT_DOUBLE_EQ(best, result.record.best_val_auc);
}

TEST(Train, FixedBnKlStaysAboveFloor) {
  const auto seq = data::generate_synthetic(data::SyntheticSpec{}).sequence;
  const auto td = prepare_task(seq, Task::kDetection, 3, 1);
  model::SgrnnConfig base;
  base.variant = model::PosteriorVariant::kFixedBn;
  const model::SgrnnModel m(fit_config(base, td));
  TrainConfig cfg;
  cfg.epochs = 120;
  cfg.patience = 1000;
  cfg.seed = 1;
  const auto r = train(m, td, cfg).record;
  ASSERT_EQ(r.epochs.size(), 120u);
  const double snapshots = static_cast<double>(td.train_end);
  for (const auto& e : r.epochs) {
    if (e.epoch <= 50) continue;
    EXPECT_GE(e.kl / snapshots, 0.9 * e.kl_floor) << "epoch " << e.epoch;
  }
}

TEST(Train, DivergenceIsReported) {
  const auto td = prepare_task(sbm_fixture(9), Task::kDetection, 3, 9);
  const model::SgrnnModel m(fit_config({}, td));
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.learning_rate = 1e300;
  cfg.seed = 9;
  EXPECT_THROW(train(m, td, cfg), TrainingDiverged);
}

TEST(Train, TaskMismatchIsContractError) {
  const auto td = prepare_task(sbm_fixture(1), Task::kDetection, 3, 1);
  model::SgrnnConfig c = fit_config({}, td);
  c.task = Task::kPrediction;
  EXPECT_THROW(train(model::SgrnnModel(c), td, TrainConfig{}), ContractError);
}

TEST(RunRecord, JsonRoundTripIsExact) {
  const auto td = prepare_task(sbm_fixture(10), Task::kDetection, 3, 10);
  const model::SgrnnModel m(fit_config({}, td));
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 10;
  const auto r = train(m, td, cfg).record;
  const auto back = RunRecord::from_json(r.to_json());
  EXPECT_EQ(back.epochs, r.epochs);
  EXPECT_EQ(back.best_epoch, r.best_epoch);
  EXPECT_EQ(back.best_val_auc, r.best_val_auc);
  EXPECT_EQ(back.wall_seconds, r.wall_seconds);
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_THROW(RunRecord::from_json("{\"format\": \"other\"}"), ConfigError);
  EXPECT_THROW(RunRecord::from_json("not json"), ConfigError);
}

}  // namespace
}  // namespace sgrnn::train
