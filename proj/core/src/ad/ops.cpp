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

#include "sgrnn/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgrnn/errors.hpp"

namespace sgrnn::ad {
namespace {

constexpr double kSoftplusThreshold = 30.0;

Tape& common_tape(Var a, Var b) {
  if (!a.valid() || !b.valid()) throw ContractError("op on an invalid Var");
  if (&a.tape() != &b.tape()) throw ContractError("operands live on different tapes");
  return a.tape();
}

void require_same_shape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": " + a.shape().str() + " vs " + b.shape().str());
  }
}

bool is_row_broadcast(Var a, Var b) {
  return b.rows() == 1 && b.cols() == a.cols() && a.rows() != 1;
}

// Adds `g` into the parent's slot, summing over rows when the parent is a
// broadcast row vector.
void accumulate(Tape& tape, std::size_t parent, const Tensor& g) {
  if (!tape.requires_grad(parent)) return;
  Tensor& slot = tape.grad_slot(parent);
  if (slot.shape() == g.shape()) {
    slot += g;
    return;
  }
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) slot(0, c) += g(r, c);
}

template <typename Fwd, typename Deriv>
Var unary(OpKind kind, Var a, Fwd fwd, Deriv deriv) {
  Tape& tape = a.tape();
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const std::size_t pa = a.id();
  return tape.record(kind, {pa}, std::move(y), [pa, deriv](Tape& t, std::size_t self) {
    const Tensor& x = t.value(pa);
    const Tensor& y = t.value(self);
    const Tensor& gy = t.grad(self);
    Tensor& gx = t.grad_slot(pa);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

double softplus(double x) {
  if (x > kSoftplusThreshold) return x + std::log1p(std::exp(-x));
  // Floored at the smallest normal double so the output never underflows to 0.
  return std::max(std::log1p(std::exp(x)), std::numeric_limits<double>::min());
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void FixedBNConfig::validate() const {
  if (!(gamma > 0.0)) throw ContractError("fixed batch norm: gamma must be > 0");
  if (!(epsilon > 0.0)) throw ContractError("fixed batch norm: epsilon must be > 0");
}

Var matmul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  Tensor y = matmul(a.value(), b.value());
  const std::size_t pa = a.id(), pb = b.id();
  return tape.record(OpKind::kMatMul, {pa, pb}, std::move(y), [pa, pb](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(pa)) t.grad_slot(pa) += matmul_nt(g, t.value(pb));
    if (t.requires_grad(pb)) t.grad_slot(pb) += matmul_tn(t.value(pa), g);
  });
}

Var gram(Var z) {
  Tape& tape = z.tape();
  Tensor y = matmul_nt(z.value(), z.value());
  const std::size_t pz = z.id();
  return tape.record(OpKind::kGram, {pz}, std::move(y), [pz](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor sym = g;
    sym += g.transposed();
    t.grad_slot(pz) += matmul(sym, t.value(pz));
  });
}

Var sparse_dense_matmul(const SparseMatrix& s, Var d) {
  Tape& tape = d.tape();
  Tensor y = spmm(s, d.value());
  const std::size_t pd = d.id();
  const SparseMatrix* sp = &s;
  return tape.record(OpKind::kSpMM, {pd}, std::move(y), [pd, sp](Tape& t, std::size_t self) {
    t.grad_slot(pd) += spmm_t(*sp, t.grad(self));
  });
}

Var sparse_dense_matmul(const SparseMatrix& pattern, Var values, Var d) {
  Tape& tape = common_tape(values, d);
  if (values.rows() != pattern.nnz() || values.cols() != 1) {
    throw ShapeError("sparse values must be nnz x 1, got " + values.shape().str());
  }
  SparseMatrix s = pattern;
  std::copy(values.value().values().begin(), values.value().values().end(),
            s.mutable_values().begin());
  Tensor y = spmm(s, d.value());
  const std::size_t pv = values.id(), pd = d.id();
  const SparseMatrix* pat = &pattern;
  return tape.record(
      OpKind::kSpMMValues, {pv, pd}, std::move(y), [pv, pd, pat, s](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(pd)) t.grad_slot(pd) += spmm_t(s, g);
        if (t.requires_grad(pv)) {
          // d(out[r, :]) / d(value_k) = d[col_k, :]
          Tensor& gv = t.grad_slot(pv);
          const Tensor& dv = t.value(pd);
          const auto& off = pat->row_offsets();
          const auto& idx = pat->col_indices();
          for (std::size_t r = 0; r < pat->rows(); ++r) {
            for (std::size_t k = off[r]; k < off[r + 1]; ++k) {
              double acc = 0.0;
              for (std::size_t j = 0; j < g.cols(); ++j) acc += g(r, j) * dv(idx[k], j);
              gv[k] += acc;
            }
          }
        }
      });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  const bool bcast = is_row_broadcast(a, b);
  if (!bcast) require_same_shape("add", a, b);
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += bcast ? bv(0, c) : bv(r, c);
  const std::size_t pa = a.id(), pb = b.id();
  return tape.record(bcast ? OpKind::kAddRowBroadcast : OpKind::kAdd, {pa, pb}, std::move(y),
                     [pa, pb](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       accumulate(t, pa, g);
                       accumulate(t, pb, g);
                     });
}

Var sub(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape("sub", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= b.value()[i];
  const std::size_t pa = a.id(), pb = b.id();
  return tape.record(OpKind::kSub, {pa, pb}, std::move(y), [pa, pb](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(pa)) t.grad_slot(pa) += g;
    if (t.requires_grad(pb)) {
      Tensor& gb = t.grad_slot(pb);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape("mul", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b.value()[i];
  const std::size_t pa = a.id(), pb = b.id();
  return tape.record(OpKind::kMul, {pa, pb}, std::move(y), [pa, pb](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(pa);
    const Tensor& bv = t.value(pb);
    if (t.requires_grad(pa)) {
      Tensor& ga = t.grad_slot(pa);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(pb)) {
      Tensor& gb = t.grad_slot(pb);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var div(Var a, Var b) {
  Tape& tape = common_tape(a, b);
  require_same_shape("div", a, b);
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= b.value()[i];
  const std::size_t pa = a.id(), pb = b.id();
  return tape.record(OpKind::kDiv, {pa, pb}, std::move(y), [pa, pb](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& bv = t.value(pb);
    const Tensor& yv = t.value(self);
    if (t.requires_grad(pa)) {
      Tensor& ga = t.grad_slot(pa);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
    }
    if (t.requires_grad(pb)) {
      Tensor& gb = t.grad_slot(pb);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * yv[i] / bv[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(
      OpKind::kScale, a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var scalar_mul(Var s, Var a) {
  Tape& tape = common_tape(s, a);
  if (s.value().size() != 1) throw ShapeError("scalar_mul: first operand must be 1x1");
  const double k = s.value()[0];
  Tensor y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= k;
  const std::size_t ps = s.id(), pa = a.id();
  return tape.record(OpKind::kScalarMul, {ps, pa}, std::move(y),
                     [ps, pa](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       const Tensor& av = t.value(pa);
                       if (t.requires_grad(ps)) {
                         double acc = 0.0;
                         for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
                         t.grad_slot(ps)[0] += acc;
                       }
                       if (t.requires_grad(pa)) {
                         const double k = t.value(ps)[0];
                         Tensor& ga = t.grad_slot(pa);
                         for (std::size_t i = 0; i < g.size(); ++i) ga[i] += k * g[i];
                       }
                     });
}

Var add_scalar(Var a, double c) {
  return unary(
      OpKind::kAddScalar, a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Var log(Var a) {
  return unary(
      OpKind::kLog, a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var square(Var a) {
  return unary(
      OpKind::kSquare, a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var relu(Var a) {
  return unary(
      OpKind::kRelu, a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      OpKind::kSigmoid, a, [](double x) { return sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      OpKind::kTanh, a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var softplus(Var a) {
  return unary(
      OpKind::kSoftplus, a, [](double x) { return softplus(x); },
      [](double x, double) { return sigmoid(x); });
}

Var sum(Var a) {
  double acc = 0.0;
  for (double v : a.value().values()) acc += v;
  const std::size_t pa = a.id();
  return a.tape().record(OpKind::kSum, {pa}, Tensor::scalar(acc),
                         [pa](Tape& t, std::size_t self) {
                           const double g = t.grad(self)[0];
                           Tensor& ga = t.grad_slot(pa);
                           for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
                         });
}

Var mean(Var a) {
  if (a.value().size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var row_slice(Var a, std::size_t begin, std::size_t end) {
  if (begin > end || end > a.rows()) {
    throw ShapeError("row_slice [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") of " + a.shape().str());
  }
  const std::size_t cols = a.cols();
  const auto& src = a.value().values();
  std::vector<double> vals(src.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                           src.begin() + static_cast<std::ptrdiff_t>(end * cols));
  const std::size_t pa = a.id();
  return a.tape().record(OpKind::kRowSlice, {pa}, Tensor({end - begin, cols}, std::move(vals)),
                         [pa, begin](Tape& t, std::size_t self) {
                           const Tensor& g = t.grad(self);
                           Tensor& ga = t.grad_slot(pa);
                           const std::size_t off = begin * g.cols();
                           for (std::size_t i = 0; i < g.size(); ++i) ga[off + i] += g[i];
                         });
}

Var resize_rows(Var a, std::size_t n) {
  const std::size_t cols = a.cols();
  const std::size_t keep = std::min(n, a.rows());
  Tensor y(n, cols);
  std::copy_n(a.value().values().begin(), keep * cols, y.values().begin());
  const std::size_t pa = a.id();
  return a.tape().record(OpKind::kResizeRows, {pa}, std::move(y),
                         [pa, keep](Tape& t, std::size_t self) {
                           const Tensor& g = t.grad(self);
                           Tensor& ga = t.grad_slot(pa);
                           for (std::size_t i = 0; i < keep * g.cols(); ++i) ga[i] += g[i];
                         });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  Tape& tape = parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> ids, widths;
  for (const Var& p : parts) {
    if (&p.tape() != &tape) throw ContractError("concat_cols across tapes");
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    ids.push_back(p.id());
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor y(rows, total);
  std::size_t off = 0;
  for (const Var& p : parts) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p.cols(); ++c) y(r, off + c) = p.value()(r, c);
    off += p.cols();
  }
  return tape.record(OpKind::kConcatCols, ids, std::move(y),
                     [ids, widths](Tape& t, std::size_t self) {
                       const Tensor& g = t.grad(self);
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < ids.size(); ++k) {
                         if (t.requires_grad(ids[k])) {
                           Tensor& gp = t.grad_slot(ids[k]);
                           for (std::size_t r = 0; r < g.rows(); ++r)
                             for (std::size_t c = 0; c < widths[k]; ++c)
                               gp(r, c) += g(r, off + c);
                         }
                         off += widths[k];
                       }
                     });
}

Var fixed_batch_norm(Var l, Var beta, Var gamma, double epsilon) {
  Tape& tape = common_tape(l, beta);
  if (&gamma.tape() != &tape) throw ContractError("fixed_batch_norm: gamma on another tape");
  if (gamma.requires_grad()) {
    throw ContractError("fixed_batch_norm: gamma must be a constant, not a trainable node");
  }
  FixedBNConfig{gamma.value().item(), epsilon}.validate();
  const std::size_t b = l.rows(), d = l.cols();
  if (b < 2) {
    throw BatchTooSmallError("fixed_batch_norm needs at least 2 rows, got " + std::to_string(b));
  }
  if (beta.rows() != 1 || beta.cols() != d) {
    throw ShapeError("fixed_batch_norm: beta must be 1x" + std::to_string(d) + ", got " +
                     beta.shape().str());
  }
  const double g = gamma.value().item();
  const Tensor& x = l.value();
  const double inv_b = 1.0 / static_cast<double>(b);
  Tensor xhat(b, d);
  Tensor inv_std(1, d);
  std::vector<bool> floored(d, false);
  for (std::size_t i = 0; i < d; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < b; ++j) mu += x(j, i);
    mu *= inv_b;
    double var = 0.0;
    for (std::size_t j = 0; j < b; ++j) var += (x(j, i) - mu) * (x(j, i) - mu);
    var *= inv_b;
    // epsilon floors the batch std; columns above the floor are normalized
    // exactly.
    floored[i] = std::sqrt(var) <= epsilon;
    inv_std[i] = 1.0 / std::max(std::sqrt(var), epsilon);
    for (std::size_t j = 0; j < b; ++j) xhat(j, i) = (x(j, i) - mu) * inv_std[i];
  }
  Tensor y(b, d);
  for (std::size_t j = 0; j < b; ++j)
    for (std::size_t i = 0; i < d; ++i) y(j, i) = g * xhat(j, i) + beta.value()(0, i);

  const std::size_t pl = l.id(), pb = beta.id(), pg = gamma.id();
  return tape.record(
      OpKind::kFixedBatchNorm, {pl, pb, pg}, std::move(y),
      [pl, pb, g, xhat = std::move(xhat), inv_std = std::move(inv_std),
       floored = std::move(floored)](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const std::size_t b = gy.rows(), d = gy.cols();
        if (t.requires_grad(pb)) {
          Tensor& gbeta = t.grad_slot(pb);
          for (std::size_t j = 0; j < b; ++j)
            for (std::size_t i = 0; i < d; ++i) gbeta[i] += gy(j, i);
        }
        if (t.requires_grad(pl)) {
          Tensor& gl = t.grad_slot(pl);
          const double bd = static_cast<double>(b);
          for (std::size_t i = 0; i < d; ++i) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < b; ++j) {
              const double dxh = g * gy(j, i);
              s1 += dxh;
              s2 += dxh * xhat(j, i);
            }
            // Below the floor the std is a constant, so only the mean term
            // propagates.
            const double proj = floored[i] ? 0.0 : s2;
            for (std::size_t j = 0; j < b; ++j) {
              const double dxh = g * gy(j, i);
              gl(j, i) += inv_std[i] / bd * (bd * dxh - s1 - xhat(j, i) * proj);
            }
          }
        }
        // gamma is frozen: its slot is left untouched.
      });
}

Var fixed_batch_norm(Var l, Var beta, const FixedBNConfig& cfg) {
  cfg.validate();
  Var gamma = l.tape().constant(Tensor::scalar(cfg.gamma));
  return fixed_batch_norm(l, beta, gamma, cfg.epsilon);
}

Var inner_product_bce(Var z, const SparseMatrix& targets, const BceOptions& opts) {
  const Tensor& zv = z.value();
  const std::size_t n = zv.rows();
  if (targets.rows() != n || targets.cols() != n) {
    throw ShapeError("inner_product_bce: targets " + Shape{targets.rows(), targets.cols()}.str() +
                     " for " + std::to_string(n) + " nodes");
  }
  const std::size_t pairs = opts.exclude_diagonal ? n * (n - 1) : n * n;
  if (pairs == 0) throw ShapeError("inner_product_bce: no node pairs");
  const double scale = opts.norm / static_cast<double>(pairs);
  const Tensor logits = matmul_nt(zv, zv);
  // dloss/dlogit for each ordered pair, kept for the backward sweep.
  Tensor dlogit(n, n);
  double total = 0.0;
  const auto& off = targets.row_offsets();
  const auto& idx = targets.col_indices();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cursor = off[i];
    for (std::size_t j = 0; j < n; ++j) {
      while (cursor < off[i + 1] && idx[cursor] < j) ++cursor;
      if (opts.exclude_diagonal && i == j) continue;
      const bool positive = cursor < off[i + 1] && idx[cursor] == j;
      const double x = logits(i, j);
      if (positive) {
        total += opts.pos_weight * softplus(-x);
        dlogit(i, j) = -opts.pos_weight * sigmoid(-x) * scale;
      } else {
        total += softplus(x);
        dlogit(i, j) = sigmoid(x) * scale;
      }
    }
  }
  const std::size_t pz = z.id();
  return z.tape().record(OpKind::kInnerProductBce, {pz}, Tensor::scalar(total * scale),
                         [pz, dlogit = std::move(dlogit)](Tape& t, std::size_t self) {
                           const double g = t.grad(self)[0];
                           Tensor sym = dlogit;
                           sym += dlogit.transposed();
                           Tensor gz = matmul(sym, t.value(pz));
                           Tensor& slot = t.grad_slot(pz);
                           for (std::size_t i = 0; i < gz.size(); ++i) slot[i] += g * gz[i];
                         });
}

Var pair_logits(Var z, std::span<const NodePair> pairs) {
  const Tensor& zv = z.value();
  Tensor y(pairs.size(), 1);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    if (i >= zv.rows() || j >= zv.rows()) {
      throw ShapeError("pair (" + std::to_string(i) + "," + std::to_string(j) +
                       ") outside " + std::to_string(zv.rows()) + " nodes");
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < zv.cols(); ++c) acc += zv(i, c) * zv(j, c);
    y[p] = acc;
  }
  const std::size_t pz = z.id();
  std::vector<NodePair> saved(pairs.begin(), pairs.end());
  return z.tape().record(OpKind::kPairLogits, {pz}, std::move(y),
                         [pz, saved = std::move(saved)](Tape& t, std::size_t self) {
                           const Tensor& g = t.grad(self);
                           const Tensor& zv = t.value(pz);
                           Tensor& gz = t.grad_slot(pz);
                           for (std::size_t p = 0; p < saved.size(); ++p) {
                             const auto [i, j] = saved[p];
                             for (std::size_t c = 0; c < zv.cols(); ++c) {
                               gz(i, c) += g[p] * zv(j, c);
                               gz(j, c) += g[p] * zv(i, c);
                             }
                           }
                         });
}

Var bce_with_logits(Var logits, const Tensor& targets, double pos_weight) {
  const Tensor& x = logits.value();
  if (targets.shape() != x.shape()) {
    throw ShapeError("bce_with_logits: targets " + targets.shape().str() + " vs logits " +
                     x.shape().str());
  }
  if (x.size() == 0) throw ShapeError("bce_with_logits: empty input");
  const double inv = 1.0 / static_cast<double>(x.size());
  double total = 0.0;
  Tensor dx(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = targets[i];
    total += pos_weight * y * softplus(-x[i]) + (1.0 - y) * softplus(x[i]);
    dx[i] = (-pos_weight * y * sigmoid(-x[i]) + (1.0 - y) * sigmoid(x[i])) * inv;
  }
  const std::size_t px = logits.id();
  return logits.tape().record(OpKind::kBceWithLogits, {px}, Tensor::scalar(total * inv),
                              [px, dx = std::move(dx)](Tape& t, std::size_t self) {
                                const double g = t.grad(self)[0];
                                Tensor& slot = t.grad_slot(px);
                                for (std::size_t i = 0; i < dx.size(); ++i) slot[i] += g * dx[i];
                              });
}

}  // namespace sgrnn::ad
