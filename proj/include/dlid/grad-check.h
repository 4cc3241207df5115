// include/dlid/grad-check.h

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

#ifndef DLID_GRAD_CHECK_H_
#define DLID_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "dlid/autodiff.h"
#include "dlid/tensor.h"

namespace dlid {

struct GradCheckOptions {
  double step = 1e-5;       // central-difference half step h
  double tolerance = 1e-4;  // pass iff max relative error < tolerance
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor);
  // the floor keeps near-zero gradients from turning round-off into failures.
  double denominator_floor = 1e-3;
  std::uint64_t seed = 0;   // seeds the random projection of the output
  // Check at most this many coordinates per input (0 = all), chosen evenly.
  std::size_t max_coords_per_input = 0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t coords_checked = 0;
  std::string worst;  // "input i[j]: analytic a numeric n"
};

/// Builds a graph from the inputs and returns its output node.
using GradFunction =
    std::function<Var(Tape<double> &, std::span<const Var> inputs)>;

/// Compares reverse-mode gradients of sum(out * r), r a fixed random tensor,
/// with central finite differences for every input coordinate.  Runs in f64.
GradCheckReport GradCheck(const GradFunction &fn,
                          std::span<const Tensor<double>> inputs,
                          const GradCheckOptions &opts = {});

}  // namespace dlid

#endif  // DLID_GRAD_CHECK_H_
