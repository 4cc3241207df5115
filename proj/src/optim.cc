// src/optim.cc

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

#include "dlid/optim.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dlid/errors.h"

namespace dlid {

double LrAt(std::size_t step, const ScheduleConfig &s) {
  if (step > s.total_steps)
    throw std::invalid_argument("lr_at: step " + std::to_string(step) + " exceeds total " +
                                std::to_string(s.total_steps));
  if (step < s.warmup_steps)
    return s.base_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  if (s.total_steps <= s.warmup_steps)
    throw std::invalid_argument("lr_at: total steps " + std::to_string(s.total_steps) +
                                " must exceed warmup " + std::to_string(s.warmup_steps));
  const double progress = static_cast<double>(step - s.warmup_steps) /
                          static_cast<double>(s.total_steps - s.warmup_steps);
  return s.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <typename Real>
Adam<Real>::Adam(const ModelParams<Real> &params, AdamConfig config) : config_(config) {
  for (const auto &[name, t] : params.entries()) {
    m_.emplace_back(t.shape());
    v_.emplace_back(t.shape());
  }
}

template <typename Real>
void Adam<Real>::Step(ModelParams<Real> &params, const std::vector<Tensor<Real>> &grads,
                      double lr) {
  auto &entries = params.entries();
  if (grads.size() != entries.size() || m_.size() != entries.size())
    throw std::invalid_argument("Adam::Step: gradient count does not match parameters");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].shape() != entries[i].second.shape())
      throw std::invalid_argument("Adam::Step: shape mismatch for " + entries[i].first);
    if (!grads[i].AllFinite())
      throw NumericError("non-finite gradient for " + entries[i].first + " at update " +
                         std::to_string(t_ + 1));
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Real *p = entries[i].second.data();
    Real *m = m_[i].data();
    Real *v = v_[i].data();
    const Real *g = grads[i].data();
    for (std::size_t j = 0; j < grads[i].size(); ++j) {
      m[j] = static_cast<Real>(b1 * m[j] + (1.0 - b1) * g[j]);
      v[j] = static_cast<Real>(b2 * v[j] + (1.0 - b2) * g[j] * g[j]);
      const double mhat = m[j] / c1, vhat = v[j] / c2;
      p[j] = static_cast<Real>(p[j] - lr * mhat / (std::sqrt(vhat) + config_.epsilon));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace dlid
