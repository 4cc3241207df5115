// include/dlid/optim.h

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

#ifndef DLID_OPTIM_H_
#define DLID_OPTIM_H_

#include <cstddef>
#include <vector>

#include "dlid/model.h"
#include "dlid/tensor.h"

namespace dlid {

/// Linear warmup followed by cosine annealing to zero.
struct ScheduleConfig {
  double base_lr = 1e-4;
  std::size_t warmup_steps = 24000;
  std::size_t total_steps = 0;
};

// step < warmup: base_lr * step / warmup.  Otherwise
// base_lr * 0.5 * (1 + cos(pi * (step - warmup) / (total - warmup))).
// Throws std::invalid_argument for step > total, or for a step at or past
// the warmup when total <= warmup.
double LrAt(std::size_t step, const ScheduleConfig &schedule);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over every tensor of a ModelParams.
template <typename Real>
class Adam {
 public:
  Adam(const ModelParams<Real> &params, AdamConfig config = {});

  // One update with learning rate `lr`.  grads[i] belongs to
  // params.entries()[i].  A non-finite gradient throws NumericError before
  // anything is modified.
  void Step(ModelParams<Real> &params, const std::vector<Tensor<Real>> &grads, double lr);

  std::size_t step_count() const { return t_; }
  const std::vector<Tensor<Real>> &first_moments() const { return m_; }
  const std::vector<Tensor<Real>> &second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<Tensor<Real>> m_, v_;
};

}  // namespace dlid

#endif  // DLID_OPTIM_H_
