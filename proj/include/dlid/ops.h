// include/dlid/ops.h

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

#ifndef DLID_OPS_H_
#define DLID_OPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "dlid/autodiff.h"
#include "dlid/tensor.h"

namespace dlid {

/// Additive logit applied to attention keys that are masked out.
inline constexpr double kMaskLogit = -1e9;

/// Floor added to the pooled variance before the square root.
inline constexpr double kPoolVarianceFloor = 1e-10;

/// Epsilon inside layer normalization.
inline constexpr double kLayerNormEpsilon = 1e-5;

/// Row masks are flat byte vectors, nonzero meaning "participates".  An empty
/// span means every row participates.
using MaskView = std::span<const std::uint8_t>;

// Dilated 1-D convolution over the frame axis with zero same-padding.
// input is L x C_in or B x L x C_in (independent sequences), weight is
// C_out x C_in x k with k odd, bias is C_out.  Output keeps the frame count:
//   out[t,o] = bias[o] + sum_{c,j} weight[o,c,j] * in_padded[t + j*dilation, c]
// with (k-1)*dilation/2 zeros on each side.
template <typename Real>
Var Conv1d(Tape<Real> &tape, Var input, Var weight, Var bias, std::size_t dilation);

// Affine map over the last axis: y = x W + b, with W stored in x out layout.
template <typename Real>
Var Linear(Tape<Real> &tape, Var x, Var weight, Var bias);

template <typename Real>
Var Relu(Tape<Real> &tape, Var x);

template <typename Real>
Var Add(Tape<Real> &tape, Var a, Var b);

// x + c where c matches the trailing axes of x (broadcast over the leading
// ones).  c carries no gradient.
template <typename Real>
Var AddConstant(Tape<Real> &tape, Var x, const Tensor<Real> &c);

template <typename Real>
Var Reshape(Tape<Real> &tape, Var x, Shape shape);

// Places row i of x (N x D) at row dest[i] of a zero-filled total_rows x D
// result.  Destinations must be distinct.
template <typename Real>
Var ScatterRows(Tape<Real> &tape, Var x, std::span<const std::size_t> dest,
                std::size_t total_rows);

// Normalizes each row over the last axis.
template <typename Real>
Var LayerNorm(Tape<Real> &tape, Var x, Var gamma, Var beta);

/// Scaled dot-product attention split into n_heads heads (no projections;
/// the caller owns those).  q, k, v are T x d or B x T x d; key_mask has
/// B*T entries (or is empty).  Masked keys get kMaskLogit added before the
/// row softmax.  A batch element with no active key still produces rows;
/// its index is appended to *fully_masked when that pointer is set.
template <typename Real>
Var MaskedAttention(Tape<Real> &tape, Var q, Var k, Var v, MaskView key_mask,
                    std::size_t n_heads,
                    std::vector<std::size_t> *fully_masked = nullptr);

/// Mean and population standard deviation over the rows of an N x D (or
/// B x N x D) tensor, restricted to rows whose mask entry is set.  Output
/// is 2D (or B x 2D): [mean | sqrt(var + kPoolVarianceFloor)].
/// Throws std::invalid_argument("empty pool") if a sequence has no active row.
template <typename Real>
Var StatsPool(Tape<Real> &tape, Var x, MaskView mask);

// softmax(x / temp) over the last axis.
template <typename Real>
Var SoftmaxTemperature(Tape<Real> &tape, Var logits, Real temp);

// log softmax(x / temp) over the last axis.
template <typename Real>
Var LogSoftmaxTemperature(Tape<Real> &tape, Var logits, Real temp);

// sum_i x_i * w_i, a scalar.
template <typename Real>
Var Dot(Tape<Real> &tape, Var x, const Tensor<Real> &w);

// sum_i w_i * s_i over scalar nodes.
template <typename Real>
Var WeightedSum(Tape<Real> &tape, std::span<const Var> scalars,
                std::span<const Real> weights);

/// Stable softmax(logits / temp) on plain values.
template <typename Real>
std::vector<Real> SoftmaxTemperatureValues(std::span<const Real> logits, Real temp);

/// Stable log softmax(logits / temp) on plain values.
template <typename Real>
std::vector<Real> LogSoftmaxTemperatureValues(std::span<const Real> logits, Real temp);

}  // namespace dlid

#endif  // DLID_OPS_H_
