#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <string>
#include <utility>

#include "medgan/common.hpp"

namespace medgan {

// Shape of a rank-4 tensor laid out row-major as [n][h][w][c].
// Convolution kernels reuse the same storage with the reading [kh][kw][cin][cout].
struct Shape4 {
  int n = 0;
  int h = 0;
  int w = 0;
  int c = 0;

  std::int64_t count() const {
    return std::int64_t(n) * h * w * c;
  }
  bool operator==(const Shape4&) const = default;

  std::string str() const {
    return "[" + std::to_string(n) + "," + std::to_string(h) + "," +
           std::to_string(w) + "," + std::to_string(c) + "]";
  }
};

// Dense rank-4 tensor over a single scalar type. float carries training,
// double carries the gradient-check and oracle paths; both instantiations
// share every operation.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;
  explicit Tensor(Shape4 s) : shape_(s), data_(Array::Zero(s.count())) {}
  Tensor(Shape4 s, Scalar fill) : shape_(s), data_(Array::Constant(s.count(), fill)) {}

  static Tensor zeros(Shape4 s) { return Tensor(s); }
  static Tensor constant(Shape4 s, Scalar v) { return Tensor(s, v); }

  const Shape4& shape() const { return shape_; }
  std::int64_t size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  // Flat storage as an Eigen array, for expression-style elementwise math.
  Array& array() { return data_; }
  const Array& array() const { return data_; }

  std::int64_t index(int n, int y, int x, int c) const {
    return ((std::int64_t(n) * shape_.h + y) * shape_.w + x) * shape_.c + c;
  }
  Scalar& at(int n, int y, int x, int c) { return data_[index(n, y, x, c)]; }
  Scalar at(int n, int y, int x, int c) const { return data_[index(n, y, x, c)]; }

  Scalar& operator[](std::int64_t i) { return data_[i]; }
  Scalar operator[](std::int64_t i) const { return data_[i]; }

  bool all_finite() const {
    return data_.isFinite().all();
  }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out;
    out.reset(shape_);
    out.array() = data_.template cast<Other>();
    return out;
  }

  void reset(Shape4 s) {
    shape_ = s;
    data_ = Array::Zero(s.count());
  }

 private:
  Shape4 shape_;
  Array data_;
};

template <typename S>
void require_shape(const Tensor<S>& t, Shape4 want, const char* what) {
  if (!(t.shape() == want)) {
    throw ShapeError(std::string(what) + ": expected shape " + want.str() +
                     ", got " + t.shape().str());
  }
}

template <typename S>
void require_finite(const Tensor<S>& t, const char* what) {
  if (!t.all_finite()) {
    throw NumericError(std::string(what) + ": non-finite element");
  }
}

// Concatenate two tensors along the channel axis. Batch and spatial dims must match.
template <typename S>
Tensor<S> concat_channels(const Tensor<S>& a, const Tensor<S>& b) {
  const Shape4 sa = a.shape(), sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("concat_channels: spatial mismatch " + sa.str() + " vs " + sb.str());
  }
  Tensor<S> out(Shape4{sa.n, sa.h, sa.w, sa.c + sb.c});
  const std::int64_t rows = std::int64_t(sa.n) * sa.h * sa.w;
  for (std::int64_t r = 0; r < rows; ++r) {
    S* dst = out.data() + r * (sa.c + sb.c);
    const S* pa = a.data() + r * sa.c;
    const S* pb = b.data() + r * sb.c;
    for (int c = 0; c < sa.c; ++c) dst[c] = pa[c];
    for (int c = 0; c < sb.c; ++c) dst[sa.c + c] = pb[c];
  }
  return out;
}

// Adjoint of concat_channels: splits a gradient back into the two operands.
template <typename S>
std::pair<Tensor<S>, Tensor<S>> split_channels(const Tensor<S>& g, int c_first) {
  const Shape4 s = g.shape();
  if (c_first <= 0 || c_first >= s.c) {
    throw ShapeError("split_channels: bad split " + std::to_string(c_first) +
                     " for shape " + s.str());
  }
  Tensor<S> a(Shape4{s.n, s.h, s.w, c_first});
  Tensor<S> b(Shape4{s.n, s.h, s.w, s.c - c_first});
  const std::int64_t rows = std::int64_t(s.n) * s.h * s.w;
  for (std::int64_t r = 0; r < rows; ++r) {
    const S* src = g.data() + r * s.c;
    S* pa = a.data() + r * c_first;
    S* pb = b.data() + r * (s.c - c_first);
    for (int c = 0; c < c_first; ++c) pa[c] = src[c];
    for (int c = c_first; c < s.c; ++c) pb[c - c_first] = src[c];
  }
  return {std::move(a), std::move(b)};
}

}  // namespace medgan
