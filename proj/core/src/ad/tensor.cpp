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

#include "sgrnn/ad/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "sgrnn/errors.hpp"

namespace sgrnn::ad {

std::string Shape::str() const {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : shape_{rows, cols}, values_(rows * cols, fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw ShapeError("tensor value count " + std::to_string(values_.size()) +
                     " does not match shape " + shape_.str());
  }
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Tensor::from_rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values));
}

double Tensor::item() const {
  if (values_.size() != 1) throw ShapeError("item() on non-scalar tensor " + shape_.str());
  return values_[0];
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::transposed() const {
  Tensor out(cols(), rows());
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) out(j, i) = (*this)(i, j);
  return out;
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (shape_ != other.shape_) {
    throw ShapeError("+= shape mismatch " + shape_.str() + " vs " + other.shape_.str());
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul " + a.shape().str() + " x " + b.shape().str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = &out(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* brow = &b.values()[p * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn " + a.shape().str() + " x " + b.shape().str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Tensor out(k, m);
  for (std::size_t r = 0; r < n; ++r) {
    const double* brow = &b.values()[r * m];
    for (std::size_t i = 0; i < k; ++i) {
      const double av = a(r, i);
      if (av == 0.0) continue;
      double* orow = &out(i, 0);
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt " + a.shape().str() + " x " + b.shape().str());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = &a.values()[i * k];
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = &b.values()[j * k];
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      out(i, j) = acc;
    }
  }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("max_abs_diff " + a.shape().str() + " vs " + b.shape().str());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace sgrnn::ad
