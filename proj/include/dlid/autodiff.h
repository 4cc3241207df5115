// include/dlid/autodiff.h

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

#ifndef DLID_AUTODIFF_H_
#define DLID_AUTODIFF_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dlid/errors.h"
#include "dlid/tensor.h"

namespace dlid {

/// Handle to a node on a Tape.
struct Var {
  std::uint32_t id = 0;
  friend bool operator==(Var a, Var b) { return a.id == b.id; }
};

/// Reverse-mode tape.  Every primitive appends one node holding its value
/// and a closure that pushes the node's gradient into its parents.  Nodes
/// live in a deque, so references to values stay valid as the tape grows.
///
/// A node is either a constant, an owned variable, or a parameter that
/// refers to a tensor owned elsewhere (the model's ModelParams).  Parameter
/// nodes never copy: value(v) aliases the external tensor.
template <typename Real>
class Tape {
 public:
  using TensorT = Tensor<Real>;
  // Called with the tape and the node's accumulated output gradient.
  using BackwardFn = std::function<void(Tape &, const TensorT &)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var Constant(TensorT value) { return Push(std::move(value), nullptr, false, {}); }

  Var Variable(TensorT value) { return Push(std::move(value), nullptr, true, {}); }

  // `external` must outlive the tape.  With requires_grad false the node
  // behaves as a constant (inference).
  Var Parameter(const TensorT &external, bool requires_grad = true) {
    return Push(TensorT(), &external, requires_grad, {});
  }

  // Appends the output of a primitive.  The node requires a gradient iff
  // one of its inputs does; otherwise the closure is dropped.
  Var Record(TensorT value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return Record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  Var Record(TensorT value, std::span<const Var> inputs, BackwardFn backward) {
    bool needs = false;
    for (Var v : inputs) needs = needs || nodes_.at(v.id).requires_grad;
    return Push(std::move(value), nullptr, needs,
                needs ? std::move(backward) : BackwardFn());
  }

  const TensorT &value(Var v) const {
    const Node &n = nodes_.at(v.id);
    return n.external ? *n.external : n.value;
  }

  const TensorT *external(Var v) const { return nodes_.at(v.id).external; }

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  bool has_grad(Var v) const { return !nodes_.at(v.id).grad.empty(); }

  // Gradient of the last Backward() target with respect to v; zeros when no
  // path reached v.
  TensorT grad(Var v) const {
    const Node &n = nodes_.at(v.id);
    if (!n.grad.empty()) return n.grad;
    return TensorT(value(v).shape());
  }

  // Mutable gradient buffer, allocated on first use.  Only valid for nodes
  // that require a gradient.
  TensorT &grad_buffer(Var v) {
    Node &n = nodes_.at(v.id);
    if (n.grad.empty()) n.grad = TensorT(value(v).shape());
    return n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(out)/d(out) = 1 for a scalar output and runs every recorded
  /// closure in reverse order.  Gradients are accumulated, so call once per
  /// tape.
  void Backward(Var out) {
    if (value(out).size() != 1)
      throw std::invalid_argument("Tape::Backward: output is not a scalar, shape " +
                                  ShapeString(value(out).shape()));
    if (!requires_grad(out)) return;
    grad_buffer(out)[0] = Real(1);
    for (std::size_t i = out.id + 1; i-- > 0;) {
      Node &n = nodes_[i];
      if (!n.backward || n.grad.empty()) continue;
      if (!n.grad.AllFinite())
        throw NumericError("non-finite gradient at tape node " + std::to_string(i));
      n.backward(*this, n.grad);
    }
  }

 private:
  struct Node {
    TensorT value;
    const TensorT *external = nullptr;
    TensorT grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var Push(TensorT value, const TensorT *external, bool requires_grad,
           BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), external, TensorT(), requires_grad,
                          std::move(backward)});
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  std::deque<Node> nodes_;
};

}  // namespace dlid

#endif  // DLID_AUTODIFF_H_
