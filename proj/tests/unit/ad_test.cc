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

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sgrnn/ad/gradcheck.hpp"
#include "sgrnn/ad/ops.hpp"
#include "sgrnn/ad/sparse.hpp"
#include "sgrnn/ad/tape.hpp"
#include "sgrnn/errors.hpp"
#include "gradient_suite.hpp"
#include "test_util.hpp"

namespace sgrnn::ad {
namespace {

using testing::dense_matmul_reference;
using testing::random_sparse;
using testing::random_tensor;

double column_mean(const Tensor& t, std::size_t c) {
  double m = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) m += t(r, c);
  return m / static_cast<double>(t.rows());
}

double column_std(const Tensor& t, std::size_t c) {
  const double m = column_mean(t, c);
  double v = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r) v += (t(r, c) - m) * (t(r, c) - m);
  return std::sqrt(v / static_cast<double>(t.rows()));
}

// ---------------------------------------------------------------------------
// sparse_dense_matmul

TEST(SparseDenseMatmul, IdentityLeavesDenseUnchanged) {
  Tape tape;
  const Tensor d = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const SparseMatrix eye = SparseMatrix::identity(3);
  Var out = sparse_dense_matmul(eye, tape.leaf(d));
  EXPECT_EQ(out.value(), d);
}

TEST(SparseDenseMatmul, NoStoredEntriesGivesZeros) {
  Tape tape;
  const SparseMatrix empty = SparseMatrix::from_triplets(3, 3, {});
  Var out = sparse_dense_matmul(empty, tape.leaf(Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}})));
  EXPECT_EQ(out.value(), Tensor(3, 2));
}

TEST(SparseDenseMatmul, MatchesDenseOracleSeed7) {
  std::mt19937_64 rng(7);
  const SparseMatrix s = random_sparse(rng, 4, 4, 0.5);
  const Tensor d = random_tensor(rng, 4, 3);
  Tape tape;
  Var out = sparse_dense_matmul(s, tape.leaf(d));
  EXPECT_LT(max_abs_diff(out.value(), dense_matmul_reference(s.to_dense(), d)), 1e-12);
}

TEST(SparseDenseMatmul, DensityGridUpTo16MatchesOracle) {
  std::mt19937_64 rng(11);
  for (double density : {0.0, 0.25, 0.5, 1.0}) {
    for (std::size_t n = 1; n <= 16; ++n) {
      const SparseMatrix s = random_sparse(rng, n, n, density);
      const Tensor d = random_tensor(rng, n, 3);
      Tape tape;
      Var out = sparse_dense_matmul(s, tape.leaf(d));
      EXPECT_LT(max_abs_diff(out.value(), dense_matmul_reference(s.to_dense(), d)), 1e-12)
          << "n=" << n << " density=" << density;
    }
  }
}

TEST(SparseDenseMatmul, DimensionMismatchThrows) {
  Tape tape;
  EXPECT_THROW(sparse_dense_matmul(SparseMatrix::identity(3), tape.leaf(Tensor(4, 2))),
               ShapeError);
}

TEST(SparseDenseMatmul, AdjointsForDenseAndEntryValues) {
  std::mt19937_64 rng(3);
  const SparseMatrix pattern = random_sparse(rng, 5, 4, 0.5);
  const Tensor d = random_tensor(rng, 4, 3);
  const Tensor w = random_tensor(rng, 5, 3);
  Tensor vals(pattern.nnz(), 1);
  for (std::size_t k = 0; k < pattern.nnz(); ++k) vals[k] = pattern.values()[k];

  auto wrt_dense = [&](Tape& t, Var x) {
    return sum(mul(sparse_dense_matmul(pattern, x), t.constant(w)));
  };
  EXPECT_TRUE(finite_diff_check(wrt_dense, d).passed);

  auto wrt_values = [&](Tape& t, Var v) {
    return sum(mul(sparse_dense_matmul(pattern, v, t.constant(d)), t.constant(w)));
  };
  const auto report = finite_diff_check(wrt_values, vals);
  EXPECT_TRUE(report.passed) << report.summary();
}

TEST(SparseMatrix, RejectsBrokenCsr) {
  EXPECT_THROW(SparseMatrix(2, 2, {0, 1, 1}, {2}, {1.0}), ContractError);
  EXPECT_THROW(SparseMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), ContractError);
  EXPECT_THROW(SparseMatrix(1, 3, {1, 1}, {}, {}), ContractError);
  EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {0, 1, 2.0}}), ContractError);
}

// ---------------------------------------------------------------------------
// Elementwise nonlinearities

TEST(Softplus, ClosedFormValues) {
  Tape tape;
  Var y = softplus(tape.leaf(Tensor::from_rows({{0.0, 50.0, -50.0}})));
  EXPECT_NEAR(y.value()[0], 0.6931472, 1e-6);
  EXPECT_LT(y.value()[1] - 50.0, 1e-9);
  EXPECT_LT(y.value()[2], 1e-9);
  EXPECT_GT(y.value()[2], 0.0);
  EXPECT_GT(softplus(tape.leaf(Tensor::scalar(-1000.0))).value()[0], 0.0);
}

TEST(Sigmoid, ClosedFormAndSymmetry) {
  Tape tape;
  Var y = sigmoid(tape.leaf(Tensor::from_rows({{0.0, 2.0}})));
  EXPECT_EQ(y.value()[0], 0.5);
  EXPECT_NEAR(y.value()[1], 0.8807971, 1e-6);
  for (double x : {-3.0, 1.0, 7.0}) EXPECT_NEAR(sigmoid(x) + sigmoid(-x), 1.0, 1e-15);
}

// ---------------------------------------------------------------------------
// fixed_batch_norm

TEST(FixedBatchNorm, StandardizesToGammaAndBeta) {
  Tape tape;
  Tensor l(4, 1);
  l[0] = 1;
  l[1] = 5;
  l[2] = 1;
  l[3] = 5;  // mean 3, biased std 2
  Var out = fixed_batch_norm(tape.leaf(l), tape.leaf(Tensor(1, 1)), FixedBNConfig{0.8, 1e-5});
  EXPECT_NEAR(column_mean(out.value(), 0), 0.0, 1e-9);
  EXPECT_NEAR(column_std(out.value(), 0), 0.8, 1e-9);
}

TEST(FixedBatchNorm, ConstantColumnMapsToBeta) {
  Tape tape;
  Var out = fixed_batch_norm(tape.leaf(Tensor(5, 2, 3.7)), tape.leaf(Tensor(1, 2, 0.3)),
                             FixedBNConfig{0.8, 1e-5});
  for (double v : out.value().values()) EXPECT_DOUBLE_EQ(v, 0.3);
}

TEST(FixedBatchNorm, UnitGammaZeroBetaIsStandardBatchNorm) {
  std::mt19937_64 rng(5);
  const Tensor l = random_tensor(rng, 32, 4, 3.0);
  Tape tape;
  Var out = fixed_batch_norm(tape.leaf(l), tape.leaf(Tensor(1, 4)), FixedBNConfig{1.0, 1e-5});
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(column_mean(out.value(), c), 0.0, 1e-12);
    EXPECT_NEAR(column_std(out.value(), c), 1.0, 1e-12);
    for (std::size_t r = 0; r < 32; ++r) {
      const double expect = (l(r, c) - column_mean(l, c)) / column_std(l, c);
      EXPECT_NEAR(out.value()(r, c), expect, 1e-12);
    }
  }
}

TEST(FixedBatchNorm, SingleRowBatchIsRejected) {
  Tape tape;
  EXPECT_THROW(fixed_batch_norm(tape.leaf(Tensor(1, 3)), tape.leaf(Tensor(1, 3)), FixedBNConfig{}),
               BatchTooSmallError);
}

TEST(FixedBatchNorm, InvalidConfigAndTrainableGammaAreRejected) {
  Tape tape;
  Var l = tape.leaf(Tensor(3, 2));
  Var beta = tape.leaf(Tensor(1, 2));
  EXPECT_THROW(fixed_batch_norm(l, beta, FixedBNConfig{0.0, 1e-5}), ContractError);
  EXPECT_THROW(fixed_batch_norm(l, beta, FixedBNConfig{0.8, 0.0}), ContractError);
  EXPECT_THROW(fixed_batch_norm(l, beta, tape.leaf(Tensor::scalar(0.8)), 1e-5), ContractError);
}

TEST(FixedBatchNorm, BatchStatisticsPropertyOverRandomInputs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(2e-4, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t b = 2 + rng() % 60;
    const std::size_t d = 1 + rng() % 8;
    Tensor l = random_tensor(rng, b, d);
    for (std::size_t c = 0; c < d; ++c) {
      const double s = scale(rng), shift = unif(rng) * 10;
      for (std::size_t r = 0; r < b; ++r) l(r, c) = l(r, c) * s + shift;
    }
    Tensor beta(1, d);
    for (auto& v : beta.values()) v = unif(rng);
    const double gamma = 0.1 + std::abs(unif(rng));
    Tape tape;
    Var out = fixed_batch_norm(tape.leaf(l), tape.leaf(beta), FixedBNConfig{gamma, 1e-5});
    for (std::size_t c = 0; c < d; ++c) {
      if (column_std(l, c) <= 10 * 1e-5) continue;
      EXPECT_LT(std::abs(column_mean(out.value(), c) - beta[c]), 1e-7);
      EXPECT_LT(std::abs(column_std(out.value(), c) - gamma), 1e-6);
    }
  }
}

TEST(FixedBatchNorm, GammaGradientSlotStaysZero) {
  std::mt19937_64 rng(9);
  Tape tape;
  Var l = tape.leaf(random_tensor(rng, 6, 3));
  Var beta = tape.leaf(random_tensor(rng, 1, 3));
  Var gamma = tape.constant(Tensor::scalar(0.8));
  Var out = fixed_batch_norm(l, beta, gamma, 1e-5);
  tape.backward(sum(mul(out, tape.constant(random_tensor(rng, 6, 3)))));
  EXPECT_EQ(gamma.grad(), Tensor(1, 1));
  EXPECT_NE(beta.grad(), Tensor(1, 3));
}

// ---------------------------------------------------------------------------
// backward

TEST(Backward, ProductRule) {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(2.0));
  Var y = tape.leaf(Tensor::scalar(3.0));
  tape.backward(mul(x, y));
  EXPECT_EQ(x.grad().item(), 3.0);
  EXPECT_EQ(y.grad().item(), 2.0);
}

TEST(Backward, SigmoidOfLinearMapMatchesCentralDifferences) {
  std::mt19937_64 rng(17);
  const Tensor x = random_tensor(rng, 3, 1);
  const Tensor w = random_tensor(rng, 3, 3);
  auto f = [&](Tape& t, Var wv) { return sum(sigmoid(matmul(wv, t.constant(x)))); };
  const auto report = finite_diff_check(f, w, {.step = 1e-4, .tolerance = 1e-5});
  EXPECT_TRUE(report.passed) << report.summary();
}

TEST(Backward, UnreachableLeafHasZeroGradient) {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(2.0));
  Var z = tape.leaf(Tensor(2, 2, 1.0));
  tape.backward(square(x));
  EXPECT_EQ(z.grad(), Tensor(2, 2));
  EXPECT_EQ(x.grad().item(), 4.0);
}

TEST(Backward, NonScalarLossIsAContractError) {
  Tape tape;
  Var x = tape.leaf(Tensor(2, 1, 1.0));
  EXPECT_THROW(tape.backward(square(x)), ContractError);
}

TEST(Backward, TopologicalOrderIsAppendOrder) {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(1.5));
  Var y = mul(x, x);
  Var z = add(y, x);
  for (std::size_t id = 0; id < tape.size(); ++id)
    for (std::size_t p : tape.parents(id)) EXPECT_LT(p, id);
  tape.backward(z);
  EXPECT_DOUBLE_EQ(x.grad().item(), 2 * 1.5 + 1);
}

// ---------------------------------------------------------------------------
// finite_diff_check

TEST(FiniteDiffCheck, SumOfSquares) {
  auto f = [](Tape&, Var x) { return sum(square(x)); };
  const auto report =
      finite_diff_check(f, Tensor::from_rows({{1.0, 2.0}}), {.tolerance = 1e-6});
  EXPECT_TRUE(report.passed) << report.summary();
  Tape tape;
  Var x = tape.leaf(Tensor::from_rows({{1.0, 2.0}}));
  tape.backward(sum(square(x)));
  EXPECT_EQ(x.grad(), Tensor::from_rows({{2.0, 4.0}}));
}

TEST(FiniteDiffCheck, CorruptedAdjointFails) {
  // x^2 with an adjoint that is off by a factor of two.
  auto broken_square = [](Var a) {
    Tensor y = a.value();
    for (auto& v : y.values()) v *= v;
    const std::size_t pa = a.id();
    return a.tape().record(OpKind::kCustom, {pa}, std::move(y), [pa](Tape& t, std::size_t self) {
      const Tensor& g = t.grad(self);
      Tensor& gx = t.grad_slot(pa);
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += 4.0 * t.value(pa)[i] * g[i];
    });
  };
  auto f = [&](Tape&, Var x) { return sum(broken_square(x)); };
  EXPECT_FALSE(finite_diff_check(f, Tensor::from_rows({{1.0, 2.0}})).passed);
}

TEST(FiniteDiffCheck, NonDeterministicFunctionIsDetected) {
  int calls = 0;
  auto f = [&](Tape&, Var x) { return add_scalar(sum(x), static_cast<double>(++calls)); };
  EXPECT_THROW(finite_diff_check(f, Tensor::from_rows({{1.0}})), OracleError);
}

// Every differentiable operation against central differences, 10 seeds.
TEST(FiniteDiffCheck, OperationSuiteOverTenSeeds) {
  for (const auto& c : testing::op_gradient_cases()) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto report = c.run(seed);
      EXPECT_TRUE(report.passed) << c.name << " seed " << seed << ": " << report.summary();
    }
  }
}

TEST(InnerProductBce, MatchesDirectSumOverPairs) {
  std::mt19937_64 rng(4);
  const Tensor z = random_tensor(rng, 6, 2);
  const Tensor a = testing::random_adjacency(rng, 6, 0.5);
  Tape tape;
  Var loss = inner_product_bce(tape.leaf(z), SparseMatrix::from_dense(a),
                               {.pos_weight = 3.0, .norm = 0.5});
  double total = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      double logit = 0.0;
      for (std::size_t c = 0; c < 2; ++c) logit += z(i, c) * z(j, c);
      const double p = 1.0 / (1.0 + std::exp(-logit));
      total += a(i, j) > 0 ? -3.0 * std::log(p) : -std::log(1.0 - p);
    }
  EXPECT_NEAR(loss.value().item(), 0.5 * total / 30.0, 1e-12);
}

TEST(Tape, EvaluationTapeRecordsNoGradients) {
  Tape tape(false);
  Var x = tape.leaf(Tensor::scalar(2.0));
  Var y = square(x);
  EXPECT_FALSE(y.requires_grad());
  EXPECT_EQ(y.value().item(), 4.0);
}

}  // namespace
}  // namespace sgrnn::ad
