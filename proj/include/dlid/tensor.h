// include/dlid/tensor.h

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

#ifndef DLID_TENSOR_H_
#define DLID_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dlid {

using Shape = std::vector<std::size_t>;

inline std::size_t NumElements(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string ShapeString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

// Tensor storage is 64-byte aligned so that vectorized kernels see the same
// alignment, and therefore round the same way, regardless of heap layout.
inline constexpr std::size_t kTensorAlignment = 64;

template <typename T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U> &) {}
  T *allocate(std::size_t n) {
    return static_cast<T *>(::operator new(n * sizeof(T), std::align_val_t(kTensorAlignment)));
  }
  void deallocate(T *p, std::size_t) { ::operator delete(p, std::align_val_t(kTensorAlignment)); }
  template <typename U>
  friend bool operator==(const AlignedAllocator &, const AlignedAllocator<U> &) {
    return true;
  }
};

/// Dense row-major array with a runtime shape.  Real is float for training
/// and double on the verification paths.
template <typename Real>
class Tensor {
 public:
  using value_type = Real;
  using Storage = std::vector<Real, AlignedAllocator<Real>>;

  Tensor() = default;

  explicit Tensor(Shape shape, Real fill = Real(0))
      : shape_(std::move(shape)), data_(NumElements(shape_), fill) {
    CheckExtents();
  }

  Tensor(Shape shape, const std::vector<Real> &data)
      : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    CheckExtents();
    if (data_.size() != NumElements(shape_))
      throw std::invalid_argument("Tensor: data length " +
                                  std::to_string(data_.size()) +
                                  " does not match shape " + ShapeString(shape_));
  }

  static Tensor Vector(std::vector<Real> values) {
    Shape shape{values.size()};
    return Tensor(std::move(shape), std::move(values));
  }

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real *data() { return data_.data(); }
  const Real *data() const { return data_.data(); }
  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  std::vector<Real> ToVector() const { return std::vector<Real>(data_.begin(), data_.end()); }

  Real &operator[](std::size_t i) { return data_[i]; }
  const Real &operator[](std::size_t i) const { return data_[i]; }

  Real &operator()(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
  }
  const Real &operator()(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  Real &operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const Real &operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Same data, new extents; the element count must not change.
  Tensor Reshaped(Shape shape) const {
    if (NumElements(shape) != data_.size())
      throw std::invalid_argument("Tensor::Reshaped: cannot view " +
                                  ShapeString(shape_) + " as " +
                                  ShapeString(shape));
    Tensor out;
    out.shape_ = std::move(shape);
    out.data_ = data_;
    return out;
  }

  void SetZero() { std::fill(data_.begin(), data_.end(), Real(0)); }

  bool AllFinite() const {
    for (Real v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  template <typename Other>
  Tensor<Other> Cast() const {
    Tensor<Other> out(shape_);
    std::copy(data_.begin(), data_.end(), out.data());
    return out;
  }

  friend bool operator==(const Tensor &a, const Tensor &b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void CheckExtents() const {
    for (std::size_t e : shape_)
      if (e == 0)
        throw std::invalid_argument("Tensor: zero extent in shape " +
                                    ShapeString(shape_));
  }

  Shape shape_;
  Storage data_;
};

}  // namespace dlid

#endif  // DLID_TENSOR_H_
