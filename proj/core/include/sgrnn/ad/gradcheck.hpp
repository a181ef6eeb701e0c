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

#ifndef SGRNN_AD_GRADCHECK_HPP_
#define SGRNN_AD_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <string>

#include "sgrnn/ad/tape.hpp"
#include "sgrnn/ad/tensor.hpp"

namespace sgrnn::ad {

// Builds a scalar loss from `x` on the given tape.
using ScalarFn = std::function<Var(Tape& tape, Var x)>;

struct FiniteDiffOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  // Denominator floor for the relative error, so coordinates whose true
  // gradient is ~0 are judged on absolute error instead.
  double scale_floor = 1e-3;
};

struct FiniteDiffReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;

  std::string summary() const;
};

/// Compares the tape gradient of `f` at `x` against central differences,
/// coordinate by coordinate. Throws OracleError if two evaluations of `f` at
/// the same point disagree.
FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x,
                                   const FiniteDiffOptions& opts = {});

}  // namespace sgrnn::ad

#endif  // SGRNN_AD_GRADCHECK_HPP_
