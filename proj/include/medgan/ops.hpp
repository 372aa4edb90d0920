#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <type_traits>
#include <utility>

#include "medgan/tensor.hpp"

// Forward and backward implementations of the network primitives.
//
// Every op exists for float and double. The float instantiation is the
// training path and runs convolutions as im2col + Eigen GEMM; the double
// instantiation is the oracle/gradient-check path and accumulates with plain
// sequential loops in a documented order: per output element, contributions
// are summed bias-first, then ascending (ky, kx, cin); reductions over the
// batch run ascending (n, oy, ox). Results on the double path are therefore
// bit-reproducible and directly comparable against independent loop oracles.

namespace medgan {

template <typename S>
using MatrixR = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

namespace detail {

template <typename S>
void check_conv(const Tensor<S>& input, const Tensor<S>& kernel, int stride, int pad,
                const char* op) {
  if (stride < 1 || pad < 0) {
    throw ShapeError(std::string(op) + ": stride must be >= 1 and pad >= 0");
  }
  // kernel layout [kh, kw, cin, cout]
  if (kernel.shape().w != input.shape().c) {
    throw ShapeError(std::string(op) + ": input channels " + input.shape().str() +
                     " do not match kernel cin " + kernel.shape().str());
  }
  if (kernel.shape().n > input.shape().h + 2 * pad ||
      kernel.shape().h > input.shape().w + 2 * pad) {
    throw ShapeError(std::string(op) + ": kernel " + kernel.shape().str() +
                     " larger than padded input " + input.shape().str());
  }
}

// Patch matrix with one row per output position (n, oy, ox) and one column
// per kernel tap (ky, kx, c). Out-of-bounds taps stay zero.
template <typename S>
MatrixR<S> im2col(const Tensor<S>& in, int kh, int kw, int stride, int pad,
                  int oh, int ow) {
  const Shape4 s = in.shape();
  MatrixR<S> cols = MatrixR<S>::Zero(std::int64_t(s.n) * oh * ow,
                                     std::int64_t(kh) * kw * s.c);
  std::int64_t row = 0;
  for (int n = 0; n < s.n; ++n) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++row) {
        S* dst = cols.data() + row * cols.cols();
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= s.h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= s.w) continue;
            const S* src = in.data() + in.index(n, iy, ix, 0);
            S* d = dst + (std::int64_t(ky) * kw + kx) * s.c;
            for (int c = 0; c < s.c; ++c) d[c] = src[c];
          }
        }
      }
    }
  }
  return cols;
}

// Adjoint of im2col: scatter-adds patch rows back onto the image grid.
template <typename S>
void col2im_add(const MatrixR<S>& cols, Tensor<S>& target, int kh, int kw,
                int stride, int pad, int oh, int ow) {
  const Shape4 s = target.shape();
  std::int64_t row = 0;
  for (int n = 0; n < s.n; ++n) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox, ++row) {
        const S* src = cols.data() + row * cols.cols();
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= s.h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= s.w) continue;
            S* dst = target.data() + target.index(n, iy, ix, 0);
            const S* c0 = src + (std::int64_t(ky) * kw + kx) * s.c;
            for (int c = 0; c < s.c; ++c) dst[c] += c0[c];
          }
        }
      }
    }
  }
}

// Correlation of input with kernel, no bias. GEMM on float, sequential loops
// on double.
template <typename S>
Tensor<S> conv_fwd(const Tensor<S>& input, const Tensor<S>& kernel, int stride, int pad) {
  const Shape4 in = input.shape();
  const int kh = kernel.shape().n, kw = kernel.shape().h;
  const int cin = kernel.shape().w, cout = kernel.shape().c;
  const int oh = conv_out_dim(in.h, kh, stride, pad);
  const int ow = conv_out_dim(in.w, kw, stride, pad);
  Tensor<S> out(Shape4{in.n, oh, ow, cout});
  if constexpr (std::is_same_v<S, float>) {
    const MatrixR<S> cols = im2col(input, kh, kw, stride, pad, oh, ow);
    Eigen::Map<const MatrixR<S>> K(kernel.data(), std::int64_t(kh) * kw * cin, cout);
    Eigen::Map<MatrixR<S>> O(out.data(), cols.rows(), cout);
    O.noalias() = cols * K;
  } else {
    for (int n = 0; n < in.n; ++n) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          for (int co = 0; co < cout; ++co) {
            S acc = S(0);
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= in.h) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= in.w) continue;
                for (int ci = 0; ci < cin; ++ci) {
                  acc += input.at(n, iy, ix, ci) * kernel.at(ky, kx, ci, co);
                }
              }
            }
            out.at(n, oy, ox, co) = acc;
          }
        }
      }
    }
  }
  return out;
}

// d(conv)/d(input): spreads the upstream grid back through the kernel.
// Doubles as the transposed-convolution forward pass.
template <typename S>
Tensor<S> conv_dinput(const Tensor<S>& upstream, const Tensor<S>& kernel,
                      int stride, int pad, Shape4 in_shape) {
  const int kh = kernel.shape().n, kw = kernel.shape().h;
  const int cin = kernel.shape().w, cout = kernel.shape().c;
  const int oh = upstream.shape().h, ow = upstream.shape().w;
  Tensor<S> out(in_shape);
  if constexpr (std::is_same_v<S, float>) {
    Eigen::Map<const MatrixR<S>> U(upstream.data(),
                                   std::int64_t(in_shape.n) * oh * ow, cout);
    Eigen::Map<const MatrixR<S>> K(kernel.data(), std::int64_t(kh) * kw * cin, cout);
    MatrixR<S> cols(U.rows(), K.rows());
    cols.noalias() = U * K.transpose();
    col2im_add(cols, out, kh, kw, stride, pad, oh, ow);
  } else {
    for (int n = 0; n < in_shape.n; ++n) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride - pad + ky;
            if (iy < 0 || iy >= in_shape.h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride - pad + kx;
              if (ix < 0 || ix >= in_shape.w) continue;
              for (int ci = 0; ci < cin; ++ci) {
                S acc = S(0);
                for (int co = 0; co < cout; ++co) {
                  acc += upstream.at(n, oy, ox, co) * kernel.at(ky, kx, ci, co);
                }
                out.at(n, iy, ix, ci) += acc;
              }
            }
          }
        }
      }
    }
  }
  return out;
}

// d(conv)/d(kernel) for input x and upstream grad u.
template <typename S>
Tensor<S> conv_dkernel(const Tensor<S>& x, const Tensor<S>& upstream,
                       int kh, int kw, int stride, int pad) {
  const Shape4 in = x.shape();
  const int cout = upstream.shape().c;
  const int oh = upstream.shape().h, ow = upstream.shape().w;
  Tensor<S> dk(Shape4{kh, kw, in.c, cout});
  if constexpr (std::is_same_v<S, float>) {
    const MatrixR<S> cols = im2col(x, kh, kw, stride, pad, oh, ow);
    Eigen::Map<const MatrixR<S>> U(upstream.data(), cols.rows(), cout);
    Eigen::Map<MatrixR<S>> DK(dk.data(), cols.cols(), cout);
    DK.noalias() = cols.transpose() * U;
  } else {
    for (int n = 0; n < in.n; ++n) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          for (int co = 0; co < cout; ++co) {
            const S g = upstream.at(n, oy, ox, co);
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - pad + ky;
              if (iy < 0 || iy >= in.h) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - pad + kx;
                if (ix < 0 || ix >= in.w) continue;
                for (int ci = 0; ci < in.c; ++ci) {
                  dk.at(ky, kx, ci, co) += g * x.at(n, iy, ix, ci);
                }
              }
            }
          }
        }
      }
    }
  }
  return dk;
}

// Per-channel sum of a [n,h,w,c] tensor, ascending (n, y, x) order.
template <typename S>
Tensor<S> channel_sum(const Tensor<S>& t) {
  const Shape4 s = t.shape();
  Tensor<S> out(Shape4{1, 1, 1, s.c});
  const std::int64_t rows = std::int64_t(s.n) * s.h * s.w;
  for (std::int64_t r = 0; r < rows; ++r) {
    const S* src = t.data() + r * s.c;
    for (int c = 0; c < s.c; ++c) out[c] += src[c];
  }
  return out;
}

template <typename S>
void add_channel_bias(Tensor<S>& t, const Tensor<S>& bias) {
  const Shape4 s = t.shape();
  if (bias.size() != s.c) {
    throw ShapeError("bias length " + std::to_string(bias.size()) +
                     " does not match channels of " + s.str());
  }
  const std::int64_t rows = std::int64_t(s.n) * s.h * s.w;
  for (std::int64_t r = 0; r < rows; ++r) {
    S* dst = t.data() + r * s.c;
    for (int c = 0; c < s.c; ++c) dst[c] += bias[c];
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Convolution. kernel layout [kh, kw, cin, cout], bias length cout,
// zero padding, output h' = floor((h + 2p - kh)/s) + 1.

template <typename S>
struct ConvGrads {
  Tensor<S> input;
  Tensor<S> kernel;
  Tensor<S> bias;
};

template <typename S>
Tensor<S> conv2d(const Tensor<S>& input, const Tensor<S>& kernel,
                 const Tensor<S>& bias, int stride, int pad) {
  detail::check_conv(input, kernel, stride, pad, "conv2d");
  Tensor<S> out = detail::conv_fwd(input, kernel, stride, pad);
  detail::add_channel_bias(out, bias);
  return out;
}

template <typename S>
ConvGrads<S> conv2d_backward(const Tensor<S>& input, const Tensor<S>& kernel,
                             int stride, int pad, const Tensor<S>& upstream) {
  detail::check_conv(input, kernel, stride, pad, "conv2d_backward");
  ConvGrads<S> g;
  g.input = detail::conv_dinput(upstream, kernel, stride, pad, input.shape());
  g.kernel = detail::conv_dkernel(input, upstream, kernel.shape().n,
                                  kernel.shape().h, stride, pad);
  g.bias = detail::channel_sum(upstream);
  return g;
}

// ---------------------------------------------------------------------------
// Transposed convolution, the exact adjoint of conv2d under a shared kernel:
// <conv2d(x; K), u> == <x, conv_transpose2d(u; K)>.
// kernel layout [kh, kw, cout, cin]; output spatial dim = s*(h-1) + kh - 2p.

template <typename S>
Tensor<S> conv_transpose2d(const Tensor<S>& input, const Tensor<S>& kernel,
                           const Tensor<S>& bias, int stride, int pad) {
  const Shape4 in = input.shape();
  const int kh = kernel.shape().n, kw = kernel.shape().h;
  if (stride < 1 || pad < 0) {
    throw ShapeError("conv_transpose2d: stride must be >= 1 and pad >= 0");
  }
  if (kernel.shape().c != in.c) {
    throw ShapeError("conv_transpose2d: input channels " + in.str() +
                     " do not match kernel cin " + kernel.shape().str());
  }
  const int oh = stride * (in.h - 1) + kh - 2 * pad;
  const int ow = stride * (in.w - 1) + kw - 2 * pad;
  if (oh < 1 || ow < 1) {
    throw ShapeError("conv_transpose2d: non-positive output for input " + in.str());
  }
  Tensor<S> out = detail::conv_dinput(input, kernel, stride, pad,
                                      Shape4{in.n, oh, ow, kernel.shape().w});
  detail::add_channel_bias(out, bias);
  return out;
}

template <typename S>
ConvGrads<S> conv_transpose2d_backward(const Tensor<S>& input, const Tensor<S>& kernel,
                                       int stride, int pad, const Tensor<S>& upstream) {
  ConvGrads<S> g;
  g.input = detail::conv_fwd(upstream, kernel, stride, pad);
  g.kernel = detail::conv_dkernel(upstream, input, kernel.shape().n,
                                  kernel.shape().h, stride, pad);
  g.bias = detail::channel_sum(upstream);
  return g;
}

// ---------------------------------------------------------------------------
// Batch normalization over (n, h, w) per channel. Train mode normalizes with
// biased batch statistics and updates running stats with the unbiased
// variance; eval mode normalizes with the running stats only.

enum class BnMode { kTrain, kEval };

template <typename S>
struct BnCache {
  BnMode mode = BnMode::kTrain;
  Tensor<S> xhat;
  Eigen::Array<S, Eigen::Dynamic, 1> inv_std;  // per channel
};

template <typename S>
struct BnGrads {
  Tensor<S> input;
  Tensor<S> gamma;
  Tensor<S> beta;
};

template <typename S>
Tensor<S> batch_norm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta,
                     BnMode mode, Tensor<S>& running_mean, Tensor<S>& running_var,
                     S momentum, S eps, BnCache<S>* cache = nullptr) {
  const Shape4 s = x.shape();
  const int C = s.c;
  if (gamma.size() != C || beta.size() != C || running_mean.size() != C ||
      running_var.size() != C) {
    throw ShapeError("batch_norm: per-channel parameter length mismatch for " + s.str());
  }
  if (!(eps > S(0))) {
    throw ShapeError("batch_norm: eps must be positive");
  }
  const std::int64_t rows = std::int64_t(s.n) * s.h * s.w;
  Tensor<S> out(s);
  Eigen::Array<S, Eigen::Dynamic, 1> mean(C), inv_std(C);

  if (mode == BnMode::kTrain) {
    if (rows <= 1) {
      throw ShapeError("batch_norm: n*h*w = " + std::to_string(rows) +
                       " gives an undefined variance estimate in train mode");
    }
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(C), sumsq = Eigen::ArrayXd::Zero(C);
    for (std::int64_t r = 0; r < rows; ++r) {
      const S* p = x.data() + r * C;
      for (int c = 0; c < C; ++c) {
        const double v = double(p[c]);
        sum[c] += v;
        sumsq[c] += v * v;
      }
    }
    const double N = double(rows);
    for (int c = 0; c < C; ++c) {
      const double mu = sum[c] / N;
      const double var = sumsq[c] / N - mu * mu;
      const double var_clamped = var < 0.0 ? 0.0 : var;
      mean[c] = S(mu);
      inv_std[c] = S(1.0 / std::sqrt(var_clamped + double(eps)));
      running_mean[c] = (S(1) - momentum) * running_mean[c] + momentum * S(mu);
      running_var[c] = (S(1) - momentum) * running_var[c] +
                       momentum * S(var_clamped * N / (N - 1.0));
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = running_mean[c];
      inv_std[c] = S(1) / std::sqrt(running_var[c] + eps);
    }
  }

  Tensor<S> xhat(s);
  for (std::int64_t r = 0; r < rows; ++r) {
    const S* p = x.data() + r * C;
    S* ph = xhat.data() + r * C;
    S* po = out.data() + r * C;
    for (int c = 0; c < C; ++c) {
      ph[c] = (p[c] - mean[c]) * inv_std[c];
      po[c] = gamma[c] * ph[c] + beta[c];
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

template <typename S>
BnGrads<S> batch_norm_backward(const BnCache<S>& cache, const Tensor<S>& gamma,
                               const Tensor<S>& upstream) {
  const Shape4 s = upstream.shape();
  const int C = s.c;
  require_shape(cache.xhat, s, "batch_norm_backward");
  const std::int64_t rows = std::int64_t(s.n) * s.h * s.w;

  Eigen::ArrayXd sum_g = Eigen::ArrayXd::Zero(C), sum_gx = Eigen::ArrayXd::Zero(C);
  for (std::int64_t r = 0; r < rows; ++r) {
    const S* g = upstream.data() + r * C;
    const S* xh = cache.xhat.data() + r * C;
    for (int c = 0; c < C; ++c) {
      sum_g[c] += double(g[c]);
      sum_gx[c] += double(g[c]) * double(xh[c]);
    }
  }

  BnGrads<S> out;
  out.gamma = Tensor<S>(Shape4{1, 1, 1, C});
  out.beta = Tensor<S>(Shape4{1, 1, 1, C});
  for (int c = 0; c < C; ++c) {
    out.gamma[c] = S(sum_gx[c]);
    out.beta[c] = S(sum_g[c]);
  }

  out.input = Tensor<S>(s);
  if (cache.mode == BnMode::kTrain) {
    const double N = double(rows);
    for (std::int64_t r = 0; r < rows; ++r) {
      const S* g = upstream.data() + r * C;
      const S* xh = cache.xhat.data() + r * C;
      S* d = out.input.data() + r * C;
      for (int c = 0; c < C; ++c) {
        const double t = double(g[c]) - sum_g[c] / N - double(xh[c]) * sum_gx[c] / N;
        d[c] = S(double(gamma[c]) * double(cache.inv_std[c]) * t);
      }
    }
  } else {
    for (std::int64_t r = 0; r < rows; ++r) {
      const S* g = upstream.data() + r * C;
      S* d = out.input.data() + r * C;
      for (int c = 0; c < C; ++c) d[c] = g[c] * gamma[c] * cache.inv_std[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise activations. Backward takes the forward *input* except tanh and
// sigmoid, which recover the derivative from the forward output.

template <typename S>
Tensor<S> leaky_relu(const Tensor<S>& x, S alpha = S(0.2)) {
  Tensor<S> out(x.shape());
  out.array() = (x.array() > S(0)).select(x.array(), alpha * x.array());
  return out;
}

template <typename S>
Tensor<S> leaky_relu_backward(const Tensor<S>& x, const Tensor<S>& upstream,
                              S alpha = S(0.2)) {
  require_shape(upstream, x.shape(), "leaky_relu_backward");
  Tensor<S> out(x.shape());
  out.array() = (x.array() > S(0)).select(upstream.array(), alpha * upstream.array());
  return out;
}

template <typename S>
Tensor<S> relu(const Tensor<S>& x) {
  Tensor<S> out(x.shape());
  out.array() = x.array().max(S(0));
  return out;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& x, const Tensor<S>& upstream) {
  require_shape(upstream, x.shape(), "relu_backward");
  Tensor<S> out(x.shape());
  out.array() = (x.array() > S(0)).select(upstream.array(), S(0));
  return out;
}

template <typename S>
Tensor<S> tanh_act(const Tensor<S>& x) {
  Tensor<S> out(x.shape());
  out.array() = x.array().tanh();
  return out;
}

// y = tanh(x); derivative from the output.
template <typename S>
Tensor<S> tanh_backward(const Tensor<S>& y, const Tensor<S>& upstream) {
  require_shape(upstream, y.shape(), "tanh_backward");
  Tensor<S> out(y.shape());
  out.array() = upstream.array() * (S(1) - y.array().square());
  return out;
}

template <typename S>
S sigmoid_scalar(S x) {
  if (x >= S(0)) {
    return S(1) / (S(1) + std::exp(-x));
  }
  const S e = std::exp(x);
  return e / (S(1) + e);
}

template <typename S>
Tensor<S> sigmoid(const Tensor<S>& x) {
  Tensor<S> out(x.shape());
  for (std::int64_t i = 0; i < x.size(); ++i) out[i] = sigmoid_scalar(x[i]);
  return out;
}

// y = sigmoid(x); derivative from the output.
template <typename S>
Tensor<S> sigmoid_backward(const Tensor<S>& y, const Tensor<S>& upstream) {
  require_shape(upstream, y.shape(), "sigmoid_backward");
  Tensor<S> out(y.shape());
  out.array() = upstream.array() * y.array() * (S(1) - y.array());
  return out;
}

// log(sigmoid(x)) without overflow: min(x, 0) - log1p(exp(-|x|)).
template <typename S>
S log_sigmoid(S x) {
  const S m = x < S(0) ? x : S(0);
  return m - std::log1p(std::exp(-std::abs(x)));
}

}  // namespace medgan
