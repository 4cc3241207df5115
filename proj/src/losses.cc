// src/losses.cc

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

#include "dlid/losses.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dlid/errors.h"
#include "dlid/ops.h"

namespace dlid {

void LossWeights::Validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || alpha + beta > 1.0 + 1e-12)
    throw std::invalid_argument("loss weights need alpha, beta >= 0 and alpha + beta <= 1 (got " +
                                std::to_string(alpha) + ", " + std::to_string(beta) + ")");
  if (!(temp > 0.0)) throw std::invalid_argument("distillation temperature must be positive");
}

namespace {

// (rows, Q) of a Q or B x Q logit tensor.
std::pair<std::size_t, std::size_t> RowsCols(const Shape &s) {
  if (s.size() == 1) return {1, s[0]};
  if (s.size() == 2) return {s[0], s[1]};
  throw std::invalid_argument("logits must be Q or B x Q, got " + ShapeString(s));
}

}  // namespace

template <typename Real>
Var CrossEntropy(Tape<Real> &tape, Var logits, std::span<const int> labels) {
  const Tensor<Real> &z = tape.value(logits);
  const auto [rows, q] = RowsCols(z.shape());
  if (labels.size() != rows)
    throw std::invalid_argument("CrossEntropy: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(rows) + " rows");
  Tensor<Real> probs(z.shape());
  Real loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= q)
      throw std::invalid_argument("CrossEntropy: label " + std::to_string(labels[r]) +
                                  " out of range for " + std::to_string(q) + " classes");
    auto lp = LogSoftmaxTemperatureValues<Real>(z.values().subspan(r * q, q), Real(1));
    loss -= lp[labels[r]];
    for (std::size_t i = 0; i < q; ++i) probs[r * q + i] = std::exp(lp[i]);
  }
  loss /= Real(rows);
  if (!std::isfinite(loss)) throw NumericError("CrossEntropy: non-finite loss");
  std::vector<int> labs(labels.begin(), labels.end());
  return tape.Record(
      Tensor<Real>::Vector({loss}), {logits},
      [=, probs = std::move(probs), labs = std::move(labs)](Tape<Real> &tp,
                                                            const Tensor<Real> &g) {
        Tensor<Real> &dz = tp.grad_buffer(logits);
        const Real scale = g[0] / Real(rows);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i < q; ++i)
            dz[r * q + i] +=
                scale * (probs[r * q + i] - (static_cast<int>(i) == labs[r] ? Real(1) : Real(0)));
      });
}

template <typename Real>
Var KdLoss(Tape<Real> &tape, Var full_logits, Var short_logits, Real temp,
           const KdOptions &options) {
  if (!(temp > Real(0))) throw std::invalid_argument("KdLoss: temperature must be positive");
  const Tensor<Real> &zf = tape.value(full_logits);
  const Tensor<Real> &zs = tape.value(short_logits);
  if (zf.shape() != zs.shape())
    throw std::invalid_argument("KdLoss: logit shapes differ");
  const auto [rows, q] = RowsCols(zf.shape());
  // "weighting" is the distribution supplying the expectation, "other" the
  // one it is compared against.
  const bool short_weighted = options.direction == KdDirection::kShortWeighted;
  Var weighting = short_weighted ? short_logits : full_logits;
  Var other = short_weighted ? full_logits : short_logits;
  const Tensor<Real> &zw = tape.value(weighting);
  const Tensor<Real> &zo = tape.value(other);
  Tensor<Real> lw(zf.shape()), lo(zf.shape());
  std::vector<Real> row_kl(rows, 0);
  Real loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    auto a = LogSoftmaxTemperatureValues<Real>(zw.values().subspan(r * q, q), temp);
    auto b = LogSoftmaxTemperatureValues<Real>(zo.values().subspan(r * q, q), temp);
    for (std::size_t i = 0; i < q; ++i) {
      lw[r * q + i] = a[i];
      lo[r * q + i] = b[i];
      row_kl[r] += std::exp(a[i]) * (a[i] - b[i]);
    }
    loss += row_kl[r];
  }
  loss /= Real(rows);
  if (!std::isfinite(loss)) throw NumericError("KdLoss: non-finite loss");
  const bool grad_full = !options.detach_teacher;
  return tape.Record(
      Tensor<Real>::Vector({loss}), {full_logits, short_logits},
      [=, lw = std::move(lw), lo = std::move(lo), row_kl = std::move(row_kl)](
          Tape<Real> &tp, const Tensor<Real> &g) {
        const Real scale = g[0] / (Real(rows) * temp);
        const bool to_w = tp.requires_grad(weighting) && (grad_full || weighting == short_logits);
        const bool to_o = tp.requires_grad(other) && (grad_full || other == short_logits);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i < q; ++i) {
            const std::size_t idx = r * q + i;
            const Real pw = std::exp(lw[idx]), po = std::exp(lo[idx]);
            // d/dz_w: p_w (ln p_w - ln p_o - KL);  d/dz_o: p_o - p_w.
            if (to_w) tp.grad_buffer(weighting)[idx] += scale * pw * (lw[idx] - lo[idx] - row_kl[r]);
            if (to_o) tp.grad_buffer(other)[idx] += scale * (po - pw);
          }
      });
}

template <typename Real>
Var DualLoss(Tape<Real> &tape, Var l_full, Var l_short, Var l_kd, const LossWeights &w) {
  w.Validate();
  const Var terms[] = {l_full, l_short, l_kd};
  const Real weights[] = {Real(w.alpha), Real(w.beta), Real(w.kd_weight())};
  return WeightedSum<Real>(tape, terms, weights);
}

double CrossEntropyValue(std::span<const double> logits, int label) {
  Tape<double> tape;
  Var z = tape.Constant(Tensor<double>::Vector({logits.begin(), logits.end()}));
  const int labels[] = {label};
  return tape.value(CrossEntropy(tape, z, std::span<const int>(labels)))[0];
}

double KdLossValue(std::span<const double> full_logits, std::span<const double> short_logits,
                   double temp, KdDirection direction) {
  Tape<double> tape;
  Var f = tape.Constant(Tensor<double>::Vector({full_logits.begin(), full_logits.end()}));
  Var s = tape.Constant(Tensor<double>::Vector({short_logits.begin(), short_logits.end()}));
  return tape.value(KdLoss(tape, f, s, temp, KdOptions{direction, false}))[0];
}

double DualLossValue(double l_full, double l_short, double l_kd, const LossWeights &w) {
  w.Validate();
  return w.alpha * l_full + w.beta * l_short + w.kd_weight() * l_kd;
}

template Var CrossEntropy<float>(Tape<float> &, Var, std::span<const int>);
template Var CrossEntropy<double>(Tape<double> &, Var, std::span<const int>);
template Var KdLoss<float>(Tape<float> &, Var, Var, float, const KdOptions &);
template Var KdLoss<double>(Tape<double> &, Var, Var, double, const KdOptions &);
template Var DualLoss<float>(Tape<float> &, Var, Var, Var, const LossWeights &);
template Var DualLoss<double>(Tape<double> &, Var, Var, Var, const LossWeights &);

}  // namespace dlid
