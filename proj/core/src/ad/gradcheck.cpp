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

#include "sgrnn/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sgrnn/errors.hpp"

namespace sgrnn::ad {
namespace {

double evaluate(const ScalarFn& f, const Tensor& x) {
  Tape tape(false);
  Var v = tape.leaf(x);
  return f(tape, v).value().item();
}

}  // namespace

std::string FiniteDiffReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "FAIL") << " max_rel_error=" << max_rel_error << " at " << worst_index
     << " (tape " << analytic << ", numeric " << numeric << ")";
  return os.str();
}

FiniteDiffReport finite_diff_check(const ScalarFn& f, const Tensor& x,
                                   const FiniteDiffOptions& opts) {
  const double base = evaluate(f, x);
  if (evaluate(f, x) != base) {
    throw OracleError("finite_diff_check: function is not deterministic");
  }

  Tape tape;
  Var v = tape.leaf(x);
  Var loss = f(tape, v);
  tape.backward(loss);
  const Tensor analytic = v.grad();

  FiniteDiffReport report;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + opts.step;
    const double up = evaluate(f, probe);
    probe[i] = orig - opts.step;
    const double down = evaluate(f, probe);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * opts.step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), opts.scale_floor});
    double rel = std::abs(analytic[i] - numeric) / denom;
    if (!std::isfinite(rel)) rel = INFINITY;
    if (i == 0 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.analytic = analytic[i];
      report.numeric = numeric;
    }
  }
  report.passed = report.max_rel_error < opts.tolerance;
  return report;
}

}  // namespace sgrnn::ad
