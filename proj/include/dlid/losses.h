// include/dlid/losses.h

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

#ifndef DLID_LOSSES_H_
#define DLID_LOSSES_H_

#include <span>

#include "dlid/autodiff.h"

namespace dlid {

/// Weights of the dual-mode objective
///   alpha * CE(full) + beta * CE(short) + (1 - alpha - beta) * KD.
struct LossWeights {
  double alpha = 0.33;
  double beta = 0.33;
  double temp = 2.0;  // distillation temperature, KD term only

  double kd_weight() const { return 1.0 - alpha - beta; }
  // Throws std::invalid_argument unless alpha, beta >= 0, alpha + beta <= 1
  // and temp > 0.
  void Validate() const;

  friend bool operator==(const LossWeights &, const LossWeights &) = default;
};

enum class KdDirection {
  // sum_q P_S (ln P_S - ln P_F): expectation under the short-mode output.
  kShortWeighted,
  // sum_q P_F (ln P_F - ln P_S), the mirrored form.
  kFullWeighted,
};

struct KdOptions {
  KdDirection direction = KdDirection::kShortWeighted;
  // Stop gradients into the full-mode (teacher) logits.
  bool detach_teacher = false;
};

// Mean over rows of -log softmax(logits)[label].  logits is Q or B x Q.
// Throws std::invalid_argument if a label is out of range.
template <typename Real>
Var CrossEntropy(Tape<Real> &tape, Var logits, std::span<const int> labels);

// Mean over rows of the temperature-softened KL term between the full-mode
// and short-mode outputs.  No temp^2 rescaling.
template <typename Real>
Var KdLoss(Tape<Real> &tape, Var full_logits, Var short_logits, Real temp,
           const KdOptions &options = {});

// alpha * l_full + beta * l_short + (1 - alpha - beta) * l_kd.
template <typename Real>
Var DualLoss(Tape<Real> &tape, Var l_full, Var l_short, Var l_kd, const LossWeights &w);

// Plain-value versions for single Q-vectors.
double CrossEntropyValue(std::span<const double> logits, int label);
double KdLossValue(std::span<const double> full_logits, std::span<const double> short_logits,
                   double temp, KdDirection direction = KdDirection::kShortWeighted);
double DualLossValue(double l_full, double l_short, double l_kd, const LossWeights &w);

}  // namespace dlid

#endif  // DLID_LOSSES_H_
