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

// Micro benchmarks: sparse products, one graph layer, one training step.

#include <random>

#include <benchmark/benchmark.h>

#include "sgrnn/ad/ops.hpp"
#include "sgrnn/ad/sparse.hpp"
#include "sgrnn/data/io.hpp"
#include "sgrnn/gnn/layers.hpp"
#include "sgrnn/train/optim.hpp"
#include "sgrnn/train/trainer.hpp"
#include "test_util.hpp"

namespace {

using namespace sgrnn;

// Sparse x dense forward and backward; range(0) nodes at average degree 8.
void BM_SparseDenseMatmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto a = testing::random_sparse(rng, n, n, 8.0 / static_cast<double>(n));
  const auto x = testing::random_tensor(rng, n, 32);
  for (auto _ : state) {
    ad::Tape tape;
    auto v = tape.leaf(x);
    auto loss = ad::sum(ad::sparse_dense_matmul(a, v));
    tape.backward(loss);
    benchmark::DoNotOptimize(v.grad());
  }
  state.counters["nnz"] = static_cast<double>(a.nnz());
}
BENCHMARK(BM_SparseDenseMatmul)->Arg(184)->Arg(1000)->Arg(4000);

// One graph layer of each type, forward and backward, on 184 nodes.
void BM_GraphLayer(benchmark::State& state) {
  const auto type = static_cast<gnn::GnnType>(state.range(0));
  std::mt19937_64 rng(2);
  const gnn::GraphOperators g(ad::SparseMatrix::from_dense(testing::random_adjacency(rng, 184, 0.03)));
  const auto h = testing::random_tensor(rng, 184, 32);
  const auto w0 = testing::random_tensor(rng, 32, 32, 0.2);
  const auto w1 = testing::random_tensor(rng, 32, 32, 0.2);
  for (auto _ : state) {
    ad::Tape tape;
    const auto b = gnn::InputBlock::of(tape.leaf(h));
    const gnn::GraphLayerParams p{type, tape.leaf(w0), tape.leaf(w1),
                                  tape.leaf(ad::Tensor::scalar(0.0))};
    auto out = gnn::graph_layer(g, std::span<const gnn::InputBlock>(&b, 1), p, gnn::Activation::kRelu);
    tape.backward(ad::sum(out));
    benchmark::DoNotOptimize(out.value());
  }
  state.SetLabel(std::string(gnn::to_string(type)));
}
BENCHMARK(BM_GraphLayer)->DenseRange(0, 2);

// One full ELBO forward/backward plus Adam update on the Enron-shaped fixture.
void BM_TrainingStep(benchmark::State& state) {
  const auto seq = data::load_snapshots(testing::fixtures_dir() + "/enron_like.txt");
  const auto task = train::prepare_task(seq, model::Task::kDetection, 3, 1);
  const model::SgrnnModel m(train::fit_config(model::SgrnnConfig{}, task));
  std::mt19937_64 rng(3);
  auto params = m.init_parameters(rng);
  train::OptimizerState opt;
  const train::TrainConfig tc;
  auto streams = model::RngStreams::from_seed(4);
  for (auto _ : state) {
    ad::Tape tape;
    model::TapeBinding p(tape, params);
    auto terms = m.elbo_loss(p, task.graphs, task.train_end, streams);
    tape.backward(terms.loss);
    train::adam_step(params, p.gradients(), opt, tc);
    benchmark::DoNotOptimize(terms.loss.value());
  }
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
