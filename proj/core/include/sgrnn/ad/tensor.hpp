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

#ifndef SGRNN_AD_TENSOR_HPP_
#define SGRNN_AD_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sgrnn::ad {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense rank-2 grid of doubles in row-major order. Scalars are 1x1.
///
/// A Tensor is a plain value; tape participation goes through ad::Var.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor identity(std::size_t n);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return shape_.rows; }
  std::size_t cols() const noexcept { return shape_.cols; }
  std::size_t size() const noexcept { return values_.size(); }
  const Shape& shape() const noexcept { return shape_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * shape_.cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * shape_.cols + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * shape_.cols, shape_.cols};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * shape_.cols, shape_.cols}; }

  double item() const;
  void fill(double v);
  bool all_finite() const noexcept;
  Tensor transposed() const;

  Tensor& operator+=(const Tensor& other);
  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Plain (untaped) dense product, used by the tape adjoints and by callers that
// need a reference result.
Tensor matmul(const Tensor& a, const Tensor& b);
// a^T * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace sgrnn::ad

#endif  // SGRNN_AD_TENSOR_HPP_
