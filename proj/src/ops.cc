// src/ops.cc

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

#include "dlid/ops.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

namespace dlid {

namespace {

template <typename Real>
using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MatMap = Eigen::Map<RowMat<Real>>;
template <typename Real>
using ConstMatMap = Eigen::Map<const RowMat<Real>>;
template <typename Real>
using StridedMap = Eigen::Map<RowMat<Real>, 0, Eigen::OuterStride<>>;
template <typename Real>
using ConstStridedMap = Eigen::Map<const RowMat<Real>, 0, Eigen::OuterStride<>>;

template <typename Real>
ConstMatMap<Real> AsMatrix(const Tensor<Real> &t, std::size_t rows, std::size_t cols) {
  return ConstMatMap<Real>(t.data(), rows, cols);
}
template <typename Real>
MatMap<Real> AsMatrix(Tensor<Real> &t, std::size_t rows, std::size_t cols) {
  return MatMap<Real>(t.data(), rows, cols);
}

// Records a primitive's output after checking it is finite.
template <typename Real>
Var Emit(Tape<Real> &tape, const char *op, Tensor<Real> value,
         std::initializer_list<Var> inputs, typename Tape<Real>::BackwardFn backward) {
  if (!value.AllFinite())
    throw NumericError(std::string(op) + ": non-finite output");
  return tape.Record(std::move(value), inputs, std::move(backward));
}

void Require(bool cond, const std::string &what) {
  if (!cond) throw std::invalid_argument(what);
}

std::size_t Leading(const Shape &s) {
  std::size_t n = 1;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) n *= s[i];
  return n;
}

}  // namespace

template <typename Real>
Var Conv1d(Tape<Real> &tape, Var input, Var weight, Var bias, std::size_t dilation) {
  const Tensor<Real> &in = tape.value(input);
  const Tensor<Real> &w = tape.value(weight);
  const Tensor<Real> &b = tape.value(bias);
  Require(in.rank() == 2 || in.rank() == 3,
          "Conv1d: input must be L x C or B x L x C, got " + ShapeString(in.shape()));
  Require(w.rank() == 3, "Conv1d: weight must be C_out x C_in x k");
  const std::size_t batch = in.rank() == 3 ? in.dim(0) : 1;
  const std::size_t len = in.dim(in.rank() - 2);
  const std::size_t c_in = in.dim(in.rank() - 1);
  const std::size_t c_out = w.dim(0), kernel = w.dim(2);
  Require(w.dim(1) == c_in, "Conv1d: weight expects " + std::to_string(w.dim(1)) +
                                " input channels, input has " + std::to_string(c_in));
  Require(b.rank() == 1 && b.dim(0) == c_out, "Conv1d: bias must have C_out entries");
  Require(dilation >= 1, "Conv1d: dilation must be positive");
  Require(kernel % 2 == 1, "Conv1d: even kernel size " + std::to_string(kernel) +
                               " cannot be same-padded");
  if (!in.AllFinite()) throw NumericError("Conv1d: non-finite input");

  const std::size_t rows = batch * len, depth = kernel * c_in;
  const long pad = static_cast<long>((kernel - 1) * dilation / 2);

  // im2col: col[(b,t), j*C_in + c] = in[b, t + j*dilation - pad, c].
  auto build_col = [&](const Tensor<Real> &x) {
    RowMat<Real> col = RowMat<Real>::Zero(rows, depth);
    for (std::size_t bb = 0; bb < batch; ++bb)
      for (std::size_t t = 0; t < len; ++t)
        for (std::size_t j = 0; j < kernel; ++j) {
          long src = static_cast<long>(t + j * dilation) - pad;
          if (src < 0 || src >= static_cast<long>(len)) continue;
          const Real *from = x.data() + (bb * len + src) * c_in;
          std::copy(from, from + c_in, &col(bb * len + t, j * c_in));
        }
    return col;
  };
  // Wcol[j*C_in + c, o] = w[o, c, j].
  RowMat<Real> wcol(depth, c_out);
  for (std::size_t o = 0; o < c_out; ++o)
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t j = 0; j < kernel; ++j) wcol(j * c_in + c, o) = w(o, c, j);

  Shape out_shape = in.shape();
  out_shape.back() = c_out;
  Tensor<Real> out(out_shape);
  auto out_m = AsMatrix(out, rows, c_out);
  // The unfolded input is kept for the weight gradient.
  std::shared_ptr<const RowMat<Real>> col;
  if (kernel == 1) {
    out_m.noalias() = AsMatrix(in, rows, c_in) * wcol;
  } else {
    col = std::make_shared<const RowMat<Real>>(build_col(in));
    out_m.noalias() = *col * wcol;
  }
  out_m.rowwise() += AsMatrix(b, 1, c_out).row(0);

  return Emit(tape, "Conv1d", std::move(out), {input, weight, bias},
              [=](Tape<Real> &tp, const Tensor<Real> &g) {
                auto g_m = AsMatrix(g, rows, c_out);
                const Tensor<Real> &x = tp.value(input);
                if (tp.requires_grad(bias))
                  AsMatrix(tp.grad_buffer(bias), 1, c_out) += g_m.colwise().sum();
                if (tp.requires_grad(weight)) {
                  RowMat<Real> dwcol =
                      kernel == 1 ? RowMat<Real>(AsMatrix(x, rows, c_in).transpose() * g_m)
                                  : RowMat<Real>(col->transpose() * g_m);
                  Tensor<Real> &dw = tp.grad_buffer(weight);
                  for (std::size_t o = 0; o < c_out; ++o)
                    for (std::size_t c = 0; c < c_in; ++c)
                      for (std::size_t j = 0; j < kernel; ++j)
                        dw(o, c, j) += dwcol(j * c_in + c, o);
                }
                if (tp.requires_grad(input)) {
                  Tensor<Real> &dx = tp.grad_buffer(input);
                  if (kernel == 1) {
                    AsMatrix(dx, rows, c_in).noalias() += g_m * wcol.transpose();
                    return;
                  }
                  RowMat<Real> dcol = g_m * wcol.transpose();
                  for (std::size_t bb = 0; bb < batch; ++bb)
                    for (std::size_t t = 0; t < len; ++t)
                      for (std::size_t j = 0; j < kernel; ++j) {
                        long src = static_cast<long>(t + j * dilation) - pad;
                        if (src < 0 || src >= static_cast<long>(len)) continue;
                        Real *to = dx.data() + (bb * len + src) * c_in;
                        const Real *from = &dcol(bb * len + t, j * c_in);
                        for (std::size_t c = 0; c < c_in; ++c) to[c] += from[c];
                      }
                }
              });
}

template <typename Real>
Var Linear(Tape<Real> &tape, Var x, Var weight, Var bias) {
  const Tensor<Real> &in = tape.value(x);
  const Tensor<Real> &w = tape.value(weight);
  const Tensor<Real> &b = tape.value(bias);
  Require(w.rank() == 2, "Linear: weight must be rank 2");
  const std::size_t d_in = w.dim(0), d_out = w.dim(1);
  Require(in.shape().back() == d_in, "Linear: input " + ShapeString(in.shape()) +
                                         " does not match weight " + ShapeString(w.shape()));
  Require(b.rank() == 1 && b.dim(0) == d_out, "Linear: bias must have d_out entries");
  const std::size_t rows = Leading(in.shape());
  Shape out_shape = in.shape();
  out_shape.back() = d_out;
  Tensor<Real> out(out_shape);
  auto out_m = AsMatrix(out, rows, d_out);
  out_m.noalias() = AsMatrix(in, rows, d_in) * AsMatrix(w, d_in, d_out);
  out_m.rowwise() += AsMatrix(b, 1, d_out).row(0);
  return Emit(tape, "Linear", std::move(out), {x, weight, bias},
              [=](Tape<Real> &tp, const Tensor<Real> &g) {
                auto g_m = AsMatrix(g, rows, d_out);
                if (tp.requires_grad(bias))
                  AsMatrix(tp.grad_buffer(bias), 1, d_out) += g_m.colwise().sum();
                if (tp.requires_grad(weight))
                  AsMatrix(tp.grad_buffer(weight), d_in, d_out).noalias() +=
                      AsMatrix(tp.value(x), rows, d_in).transpose() * g_m;
                if (tp.requires_grad(x))
                  AsMatrix(tp.grad_buffer(x), rows, d_in).noalias() +=
                      g_m * AsMatrix(tp.value(weight), d_in, d_out).transpose();
              });
}

template <typename Real>
Var Relu(Tape<Real> &tape, Var x) {
  Tensor<Real> out = tape.value(x);
  for (Real &v : out.values()) v = v > Real(0) ? v : Real(0);
  return Emit(tape, "Relu", std::move(out), {x},
              [=](Tape<Real> &tp, const Tensor<Real> &g) {
                const Tensor<Real> &in = tp.value(x);
                Tensor<Real> &dx = tp.grad_buffer(x);
                for (std::size_t i = 0; i < in.size(); ++i)
                  dx[i] += in[i] > Real(0) ? g[i] : Real(0);
              });
}

template <typename Real>
Var Add(Tape<Real> &tape, Var a, Var b) {
  const Tensor<Real> &va = tape.value(a);
  const Tensor<Real> &vb = tape.value(b);
  Require(va.shape() == vb.shape(), "Add: shape mismatch " + ShapeString(va.shape()) +
                                        " vs " + ShapeString(vb.shape()));
  Tensor<Real> out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += vb[i];
  return Emit(tape, "Add", std::move(out), {a, b},
              [=](Tape<Real> &tp, const Tensor<Real> &g) {
                for (Var v : {a, b}) {
                  if (!tp.requires_grad(v)) continue;
                  Tensor<Real> &d = tp.grad_buffer(v);
                  for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
                }
              });
}

template <typename Real>
Var AddConstant(Tape<Real> &tape, Var x, const Tensor<Real> &c) {
  const Tensor<Real> &in = tape.value(x);
  Require(c.size() > 0 && in.size() % c.size() == 0 && c.rank() <= in.rank() &&
              std::equal(c.shape().rbegin(), c.shape().rend(), in.shape().rbegin()),
          "AddConstant: " + ShapeString(c.shape()) + " does not broadcast onto " +
              ShapeString(in.shape()));
  Tensor<Real> out = in;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i % c.size()];
  return Emit(tape, "AddConstant", std::move(out), {x},
              [=](Tape<Real> &tp, const Tensor<Real> &g) {
                Tensor<Real> &d = tp.grad_buffer(x);
                for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
              });
}

template <typename Real>
Var Reshape(Tape<Real> &tape, Var x, Shape shape) {
  Tensor<Real> out = tape.value(x).Reshaped(std::move(shape));
  return tape.Record(std::move(out), {x}, [=](Tape<Real> &tp, const Tensor<Real> &g) {
    Tensor<Real> &d = tp.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
  });
}

template <typename Real>
Var ScatterRows(Tape<Real> &tape, Var x, std::span<const std::size_t> dest,
                std::size_t total_rows) {
  const Tensor<Real> &in = tape.value(x);
  Require(in.rank() == 2 && in.dim(0) == dest.size(),
          "ScatterRows: need one destination per input row");
  const std::size_t d = in.dim(1);
  Tensor<Real> out({total_rows, d});
  std::vector<std::uint8_t> used(total_rows, 0);
  for (std::size_t i = 0; i < dest.size(); ++i) {
    Require(dest[i] < total_rows && !used[dest[i]], "ScatterRows: bad destination");
    used[dest[i]] = 1;
    std::copy(in.data() + i * d, in.data() + (i + 1) * d, out.data() + dest[i] * d);
  }
  std::vector<std::size_t> rows(dest.begin(), dest.end());
  return tape.Record(std::move(out), {x},
                     [=, rows = std::move(rows)](Tape<Real> &tp, const Tensor<Real> &g) {
                       Tensor<Real> &dx = tp.grad_buffer(x);
                       for (std::size_t i = 0; i < rows.size(); ++i)
                         for (std::size_t c = 0; c < d; ++c) dx[i * d + c] += g[rows[i] * d + c];
                     });
}

template <typename Real>
Var LayerNorm(Tape<Real> &tape, Var x, Var gamma, Var beta) {
  const Tensor<Real> &in = tape.value(x);
  const std::size_t d = in.shape().back();
  const std::size_t rows = Leading(in.shape());
  Require(tape.value(gamma).size() == d && tape.value(beta).size() == d,
          "LayerNorm: gamma/beta must have " + std::to_string(d) + " entries");
  const Tensor<Real> &ga = tape.value(gamma);
  const Tensor<Real> &be = tape.value(beta);
  Tensor<Real> xhat(in.shape());
  std::vector<Real> inv_std(rows);
  Tensor<Real> out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const Real *row = in.data() + r * d;
    Real mean = 0;
    for (std::size_t i = 0; i < d; ++i) mean += row[i];
    mean /= Real(d);
    Real var = 0;
    for (std::size_t i = 0; i < d; ++i) var += (row[i] - mean) * (row[i] - mean);
    var /= Real(d);
    inv_std[r] = Real(1) / std::sqrt(var + Real(kLayerNormEpsilon));
    for (std::size_t i = 0; i < d; ++i) {
      Real h = (row[i] - mean) * inv_std[r];
      xhat[r * d + i] = h;
      out[r * d + i] = h * ga[i] + be[i];
    }
  }
  return Emit(tape, "LayerNorm", std::move(out), {x, gamma, beta},
              [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                  Tape<Real> &tp, const Tensor<Real> &g) {
                const Tensor<Real> &gam = tp.value(gamma);
                if (tp.requires_grad(gamma) || tp.requires_grad(beta)) {
                  std::vector<Real> dg(d, 0), db(d, 0);
                  for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t i = 0; i < d; ++i) {
                      dg[i] += g[r * d + i] * xhat[r * d + i];
                      db[i] += g[r * d + i];
                    }
                  if (tp.requires_grad(gamma)) {
                    Tensor<Real> &dga = tp.grad_buffer(gamma);
                    for (std::size_t i = 0; i < d; ++i) dga[i] += dg[i];
                  }
                  if (tp.requires_grad(beta)) {
                    Tensor<Real> &dbe = tp.grad_buffer(beta);
                    for (std::size_t i = 0; i < d; ++i) dbe[i] += db[i];
                  }
                }
                if (!tp.requires_grad(x)) return;
                Tensor<Real> &dx = tp.grad_buffer(x);
                std::vector<Real> dh(d);
                for (std::size_t r = 0; r < rows; ++r) {
                  Real mean_dh = 0, mean_dh_h = 0;
                  for (std::size_t i = 0; i < d; ++i) {
                    dh[i] = g[r * d + i] * gam[i];
                    mean_dh += dh[i];
                    mean_dh_h += dh[i] * xhat[r * d + i];
                  }
                  mean_dh /= Real(d);
                  mean_dh_h /= Real(d);
                  for (std::size_t i = 0; i < d; ++i)
                    dx[r * d + i] +=
                        inv_std[r] * (dh[i] - mean_dh - xhat[r * d + i] * mean_dh_h);
                }
              });
}

template <typename Real>
Var MaskedAttention(Tape<Real> &tape, Var q, Var k, Var v, MaskView key_mask,
                    std::size_t n_heads, std::vector<std::size_t> *fully_masked) {
  const Tensor<Real> &vq = tape.value(q);
  const Tensor<Real> &vk = tape.value(k);
  const Tensor<Real> &vv = tape.value(v);
  Require(vq.rank() == 2 || vq.rank() == 3, "MaskedAttention: q must be T x d or B x T x d");
  Require(vq.shape() == vk.shape() && vq.shape() == vv.shape(),
          "MaskedAttention: q, k, v shapes differ");
  const std::size_t batch = vq.rank() == 3 ? vq.dim(0) : 1;
  const std::size_t len = vq.dim(vq.rank() - 2);
  const std::size_t d = vq.dim(vq.rank() - 1);
  Require(n_heads >= 1 && d % n_heads == 0,
          "MaskedAttention: d=" + std::to_string(d) + " not divisible by " +
              std::to_string(n_heads) + " heads");
  Require(key_mask.empty() || key_mask.size() == batch * len,
          "MaskedAttention: key mask has " + std::to_string(key_mask.size()) +
              " entries, expected " + std::to_string(batch * len));
  const std::size_t dh = d / n_heads;
  const Real scale = Real(1) / std::sqrt(Real(dh));
  std::vector<std::uint8_t> mask(batch * len, 1);
  if (!key_mask.empty()) std::copy(key_mask.begin(), key_mask.end(), mask.begin());

  // Attention weights for every (b, h), kept for the backward pass.
  std::vector<RowMat<Real>> probs(batch * n_heads);
  Tensor<Real> out(vq.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const std::uint8_t *m = mask.data() + b * len;
    if (fully_masked && std::none_of(m, m + len, [](std::uint8_t a) { return a != 0; }))
      fully_masked->push_back(b);
    for (std::size_t h = 0; h < n_heads; ++h) {
      const std::size_t off = b * len * d + h * dh;
      ConstStridedMap<Real> qh(vq.data() + off, len, dh, Eigen::OuterStride<>(d));
      ConstStridedMap<Real> kh(vk.data() + off, len, dh, Eigen::OuterStride<>(d));
      ConstStridedMap<Real> vh(vv.data() + off, len, dh, Eigen::OuterStride<>(d));
      RowMat<Real> s = (qh * kh.transpose()) * scale;
      for (std::size_t j = 0; j < len; ++j)
        if (!m[j]) s.col(j).array() += Real(kMaskLogit);
      for (std::size_t i = 0; i < len; ++i) {
        Real mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp();
        s.row(i) /= s.row(i).sum();
      }
      StridedMap<Real> oh(out.data() + off, len, dh, Eigen::OuterStride<>(d));
      oh.noalias() = s * vh;
      probs[b * n_heads + h] = std::move(s);
    }
  }
  return Emit(
      tape, "MaskedAttention", std::move(out), {q, k, v},
      [=, probs = std::move(probs)](Tape<Real> &tp, const Tensor<Real> &g) {
        const Tensor<Real> &tq = tp.value(q);
        const Tensor<Real> &tk = tp.value(k);
        const Tensor<Real> &tv = tp.value(v);
        Real *dq = tp.requires_grad(q) ? tp.grad_buffer(q).data() : nullptr;
        Real *dk = tp.requires_grad(k) ? tp.grad_buffer(k).data() : nullptr;
        Real *dv = tp.requires_grad(v) ? tp.grad_buffer(v).data() : nullptr;
        for (std::size_t b = 0; b < batch; ++b)
          for (std::size_t h = 0; h < n_heads; ++h) {
            const std::size_t off = b * len * d + h * dh;
            const RowMat<Real> &p = probs[b * n_heads + h];
            ConstStridedMap<Real> gh(g.data() + off, len, dh, Eigen::OuterStride<>(d));
            ConstStridedMap<Real> qh(tq.data() + off, len, dh, Eigen::OuterStride<>(d));
            ConstStridedMap<Real> kh(tk.data() + off, len, dh, Eigen::OuterStride<>(d));
            ConstStridedMap<Real> vh(tv.data() + off, len, dh, Eigen::OuterStride<>(d));
            if (dv) {
              StridedMap<Real> dvh(dv + off, len, dh, Eigen::OuterStride<>(d));
              dvh.noalias() += p.transpose() * gh;
            }
            if (!dq && !dk) continue;
            RowMat<Real> dp = gh * vh.transpose();
            // Softmax Jacobian, row by row.
            Eigen::Matrix<Real, Eigen::Dynamic, 1> rowdot =
                (dp.array() * p.array()).rowwise().sum();
            RowMat<Real> ds = p.array() * (dp.colwise() - rowdot).array();
            ds *= scale;
            if (dq) {
              StridedMap<Real> dqh(dq + off, len, dh, Eigen::OuterStride<>(d));
              dqh.noalias() += ds * kh;
            }
            if (dk) {
              StridedMap<Real> dkh(dk + off, len, dh, Eigen::OuterStride<>(d));
              dkh.noalias() += ds.transpose() * qh;
            }
          }
      });
}

template <typename Real>
Var StatsPool(Tape<Real> &tape, Var x, MaskView mask) {
  const Tensor<Real> &in = tape.value(x);
  Require(in.rank() == 2 || in.rank() == 3, "StatsPool: input must be N x D or B x N x D");
  const std::size_t batch = in.rank() == 3 ? in.dim(0) : 1;
  const std::size_t n = in.dim(in.rank() - 2);
  const std::size_t d = in.dim(in.rank() - 1);
  Require(mask.empty() || mask.size() == batch * n,
          "StatsPool: mask has " + std::to_string(mask.size()) + " entries, expected " +
              std::to_string(batch * n));
  std::vector<std::uint8_t> keep(batch * n, 1);
  if (!mask.empty()) std::copy(mask.begin(), mask.end(), keep.begin());
  std::vector<std::size_t> counts(batch, 0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < n; ++i) counts[b] += keep[b * n + i] ? 1 : 0;
  for (std::size_t c : counts) Require(c > 0, "empty pool");

  Shape out_shape = in.rank() == 3 ? Shape{batch, 2 * d} : Shape{2 * d};
  Tensor<Real> out(out_shape);
  for (std::size_t b = 0; b < batch; ++b) {
    Real *mean = out.data() + b * 2 * d;
    Real *sd = mean + d;
    const Real inv_n = Real(1) / Real(counts[b]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[b * n + i]) continue;
      const Real *row = in.data() + (b * n + i) * d;
      for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (std::size_t c = 0; c < d; ++c) mean[c] *= inv_n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!keep[b * n + i]) continue;
      const Real *row = in.data() + (b * n + i) * d;
      for (std::size_t c = 0; c < d; ++c) sd[c] += (row[c] - mean[c]) * (row[c] - mean[c]);
    }
    for (std::size_t c = 0; c < d; ++c)
      sd[c] = std::sqrt(sd[c] * inv_n + Real(kPoolVarianceFloor));
  }
  Tensor<Real> pooled = out;
  return Emit(tape, "StatsPool", std::move(out), {x},
              [=, keep = std::move(keep), counts = std::move(counts),
               pooled = std::move(pooled)](Tape<Real> &tp, const Tensor<Real> &g) {
                const Tensor<Real> &xin = tp.value(x);
                Tensor<Real> &dx = tp.grad_buffer(x);
                for (std::size_t b = 0; b < batch; ++b) {
                  const Real inv_n = Real(1) / Real(counts[b]);
                  const Real *mean = pooled.data() + b * 2 * d;
                  const Real *sd = mean + d;
                  const Real *gmean = g.data() + b * 2 * d;
                  const Real *gsd = gmean + d;
                  for (std::size_t i = 0; i < n; ++i) {
                    if (!keep[b * n + i]) continue;
                    const Real *row = xin.data() + (b * n + i) * d;
                    Real *drow = dx.data() + (b * n + i) * d;
                    for (std::size_t c = 0; c < d; ++c)
                      drow[c] += gmean[c] * inv_n +
                                 gsd[c] * (row[c] - mean[c]) * inv_n / sd[c];
                  }
                }
              });
}

template <typename Real>
std::vector<Real> LogSoftmaxTemperatureValues(std::span<const Real> logits, Real temp) {
  if (!(temp > Real(0)))
    throw std::invalid_argument("softmax temperature must be positive");
  Require(!logits.empty(), "softmax: empty logits");
  std::vector<Real> out(logits.size());
  Real mx = -std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] / temp;
    mx = std::max(mx, out[i]);
  }
  Real sum = 0;
  for (Real v : out) sum += std::exp(v - mx);
  const Real lse = mx + std::log(sum);
  for (Real &v : out) v -= lse;
  return out;
}

template <typename Real>
std::vector<Real> SoftmaxTemperatureValues(std::span<const Real> logits, Real temp) {
  if (!(temp > Real(0)))
    throw std::invalid_argument("softmax temperature must be positive");
  Require(!logits.empty(), "softmax: empty logits");
  std::vector<Real> out(logits.size());
  Real mx = -std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = logits[i] / temp;
    mx = std::max(mx, out[i]);
  }
  Real sum = 0;
  for (Real &v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (Real &v : out) v /= sum;
  return out;
}

template <typename Real>
Var SoftmaxTemperature(Tape<Real> &tape, Var logits, Real temp) {
  const Tensor<Real> &in = tape.value(logits);
  const std::size_t q = in.shape().back(), rows = Leading(in.shape());
  Tensor<Real> out(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto p = SoftmaxTemperatureValues<Real>(in.values().subspan(r * q, q), temp);
    std::copy(p.begin(), p.end(), out.data() + r * q);
  }
  Tensor<Real> probs = out;
  return Emit(tape, "SoftmaxTemperature", std::move(out), {logits},
              [=, probs = std::move(probs)](Tape<Real> &tp, const Tensor<Real> &g) {
                Tensor<Real> &dx = tp.grad_buffer(logits);
                for (std::size_t r = 0; r < rows; ++r) {
                  Real dot = 0;
                  for (std::size_t i = 0; i < q; ++i) dot += probs[r * q + i] * g[r * q + i];
                  for (std::size_t i = 0; i < q; ++i)
                    dx[r * q + i] += probs[r * q + i] * (g[r * q + i] - dot) / temp;
                }
              });
}

template <typename Real>
Var LogSoftmaxTemperature(Tape<Real> &tape, Var logits, Real temp) {
  const Tensor<Real> &in = tape.value(logits);
  const std::size_t q = in.shape().back(), rows = Leading(in.shape());
  Tensor<Real> out(in.shape());
  Tensor<Real> probs(in.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto lp = LogSoftmaxTemperatureValues<Real>(in.values().subspan(r * q, q), temp);
    for (std::size_t i = 0; i < q; ++i) {
      out[r * q + i] = lp[i];
      probs[r * q + i] = std::exp(lp[i]);
    }
  }
  return Emit(tape, "LogSoftmaxTemperature", std::move(out), {logits},
              [=, probs = std::move(probs)](Tape<Real> &tp, const Tensor<Real> &g) {
                Tensor<Real> &dx = tp.grad_buffer(logits);
                for (std::size_t r = 0; r < rows; ++r) {
                  Real sum = 0;
                  for (std::size_t i = 0; i < q; ++i) sum += g[r * q + i];
                  for (std::size_t i = 0; i < q; ++i)
                    dx[r * q + i] += (g[r * q + i] - probs[r * q + i] * sum) / temp;
                }
              });
}

template <typename Real>
Var Dot(Tape<Real> &tape, Var x, const Tensor<Real> &w) {
  const Tensor<Real> &in = tape.value(x);
  Require(in.size() == w.size(), "Dot: size mismatch");
  Real s = 0;
  for (std::size_t i = 0; i < in.size(); ++i) s += in[i] * w[i];
  return Emit(tape, "Dot", Tensor<Real>::Vector({s}), {x},
              [=](Tape<Real> &tp, const Tensor<Real> &g) {
                Tensor<Real> &dx = tp.grad_buffer(x);
                for (std::size_t i = 0; i < w.size(); ++i) dx[i] += g[0] * w[i];
              });
}

template <typename Real>
Var WeightedSum(Tape<Real> &tape, std::span<const Var> scalars,
                std::span<const Real> weights) {
  Require(scalars.size() == weights.size() && !scalars.empty(),
          "WeightedSum: need one weight per scalar");
  Real s = 0;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    Require(tape.value(scalars[i]).size() == 1, "WeightedSum: input is not a scalar");
    s += weights[i] * tape.value(scalars[i])[0];
  }
  std::vector<Var> ins(scalars.begin(), scalars.end());
  std::vector<Real> ws(weights.begin(), weights.end());
  Tensor<Real> out = Tensor<Real>::Vector({s});
  if (!out.AllFinite()) throw NumericError("WeightedSum: non-finite output");
  return tape.Record(std::move(out), std::span<const Var>(ins),
                     [ins, ws = std::move(ws)](Tape<Real> &tp, const Tensor<Real> &g) {
                       for (std::size_t i = 0; i < ins.size(); ++i)
                         if (tp.requires_grad(ins[i])) tp.grad_buffer(ins[i])[0] += ws[i] * g[0];
                     });
}

#define DLID_INSTANTIATE_OPS(Real)                                                     \
  template Var Conv1d<Real>(Tape<Real> &, Var, Var, Var, std::size_t);                 \
  template Var Linear<Real>(Tape<Real> &, Var, Var, Var);                              \
  template Var Relu<Real>(Tape<Real> &, Var);                                          \
  template Var Add<Real>(Tape<Real> &, Var, Var);                                      \
  template Var AddConstant<Real>(Tape<Real> &, Var, const Tensor<Real> &);             \
  template Var Reshape<Real>(Tape<Real> &, Var, Shape);                                \
  template Var LayerNorm<Real>(Tape<Real> &, Var, Var, Var);                           \
  template Var ScatterRows<Real>(Tape<Real> &, Var, std::span<const std::size_t>,      \
                                 std::size_t);                                         \
  template Var MaskedAttention<Real>(Tape<Real> &, Var, Var, Var, MaskView,            \
                                     std::size_t, std::vector<std::size_t> *);         \
  template Var StatsPool<Real>(Tape<Real> &, Var, MaskView);                           \
  template Var SoftmaxTemperature<Real>(Tape<Real> &, Var, Real);                      \
  template Var LogSoftmaxTemperature<Real>(Tape<Real> &, Var, Real);                   \
  template Var Dot<Real>(Tape<Real> &, Var, const Tensor<Real> &);                     \
  template Var WeightedSum<Real>(Tape<Real> &, std::span<const Var>,                   \
                                 std::span<const Real>);                               \
  template std::vector<Real> SoftmaxTemperatureValues<Real>(std::span<const Real>,     \
                                                            Real);                     \
  template std::vector<Real> LogSoftmaxTemperatureValues<Real>(std::span<const Real>,  \
                                                               Real);

DLID_INSTANTIATE_OPS(float)
DLID_INSTANTIATE_OPS(double)

}  // namespace dlid
