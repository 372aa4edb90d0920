#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <vector>

#include "medgan/common.hpp"

namespace medgan {

// 2-D single-channel image, row-major so (y, x) indexing matches the
// [h][w] file layout.
template <typename S>
using Image = Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename S>
using CImage = Eigen::Array<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageF = Image<float>;
using ImageD = Image<double>;

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace detail {

// Iterative radix-2 Cooley-Tukey on a strided line, twiddle sign -1 for the
// forward transform. Unitary scaling is applied by the 2-D wrappers.
template <typename S>
void fft_line(std::complex<S>* data, int n, int stride, int sign) {
  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[std::int64_t(i) * stride], data[std::int64_t(j) * stride]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = double(sign) * 2.0 * M_PI / double(len);
    const std::complex<S> wl(S(std::cos(ang)), S(std::sin(ang)));
    for (int i = 0; i < n; i += len) {
      std::complex<S> w(S(1), S(0));
      for (int k = 0; k < len / 2; ++k) {
        std::complex<S>& a = data[std::int64_t(i + k) * stride];
        std::complex<S>& b = data[std::int64_t(i + k + len / 2) * stride];
        const std::complex<S> t = w * b;
        b = a - t;
        a += t;
        w *= wl;
      }
    }
  }
}

template <typename S>
CImage<S> fft2_impl(const CImage<S>& in, int sign) {
  const int h = int(in.rows()), w = int(in.cols());
  if (!is_pow2(h) || !is_pow2(w)) {
    throw ShapeError("fft2: size " + std::to_string(h) + "x" + std::to_string(w) +
                     " is not a power of two");
  }
  CImage<S> out = in;
  for (int y = 0; y < h; ++y) fft_line(out.data() + std::int64_t(y) * w, w, 1, sign);
  for (int x = 0; x < w; ++x) fft_line(out.data() + x, h, w, sign);
  const S scale = S(1.0 / std::sqrt(double(h) * double(w)));
  out *= scale;
  return out;
}

}  // namespace detail

// Unitary 2-D DFT (1/sqrt(N) each direction); power-of-two sizes only.
template <typename S>
CImage<S> fft2(const CImage<S>& in) {
  return detail::fft2_impl(in, -1);
}

template <typename S>
CImage<S> fft2(const Image<S>& in) {
  CImage<S> c(in.rows(), in.cols());
  for (Eigen::Index i = 0; i < in.size(); ++i) c.data()[i] = std::complex<S>(in.data()[i], S(0));
  return detail::fft2_impl(c, -1);
}

template <typename S>
CImage<S> ifft2(const CImage<S>& in) {
  return detail::fft2_impl(in, +1);
}

}  // namespace medgan
