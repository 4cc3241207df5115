// src/grad-check.cc

// Copyright 2026  The dlid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dlid/grad-check.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "dlid/keyed-rng.h"
#include "dlid/ops.h"

namespace dlid {

namespace {

double Evaluate(const GradFunction &fn, const std::vector<Tensor<double>> &inputs,
                const Tensor<double> &projection) {
  Tape<double> tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto &t : inputs) vars.push_back(tape.Constant(t));
  Var out = fn(tape, vars);
  return tape.value(Dot(tape, out, projection))[0];
}

}  // namespace

GradCheckReport GradCheck(const GradFunction &fn,
                          std::span<const Tensor<double>> inputs,
                          const GradCheckOptions &opts) {
  for (const auto &t : inputs)
    if (!t.AllFinite()) throw NumericError("GradCheck: non-finite input");

  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto &t : inputs) vars.push_back(tape.Variable(t));
  Var out = fn(tape, vars);
  Tensor<double> projection(tape.value(out).shape());
  KeyedStream rng(opts.seed, {0x9c});
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (double &r : projection.values()) r = unif(rng);
  tape.Backward(Dot(tape, out, projection));

  GradCheckReport report;
  std::vector<Tensor<double>> work(inputs.begin(), inputs.end());
  for (std::size_t i = 0; i < work.size(); ++i) {
    const Tensor<double> analytic = tape.grad(vars[i]);
    const std::size_t n = work[i].size();
    const std::size_t stride =
        opts.max_coords_per_input == 0 || n <= opts.max_coords_per_input
            ? 1
            : n / opts.max_coords_per_input;
    for (std::size_t j = 0; j < n; j += stride) {
      const double saved = work[i][j];
      work[i][j] = saved + opts.step;
      const double up = Evaluate(fn, work, projection);
      work[i][j] = saved - opts.step;
      const double down = Evaluate(fn, work, projection);
      work[i][j] = saved;
      const double numeric = (up - down) / (2.0 * opts.step);
      const double a = analytic[j];
      const double denom =
          std::max({std::abs(a), std::abs(numeric), opts.denominator_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coords_checked;
      if (!std::isfinite(rel)) throw NumericError("GradCheck: non-finite difference");
      if (report.coords_checked == 1 || rel > report.max_rel_err) {
        report.max_rel_err = rel;
        std::ostringstream os;
        os << "input " << i << "[" << j << "]: analytic " << a << " numeric " << numeric;
        report.worst = os.str();
      }
    }
  }
  report.pass = report.max_rel_err < opts.tolerance;
  return report;
}

}  // namespace dlid
