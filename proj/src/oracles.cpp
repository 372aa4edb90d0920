#include "medgan/oracles.hpp"

#include <cmath>

namespace medgan::oracle {

Tensor<double> conv2d(const Tensor<double>& input, const Tensor<double>& kernel,
                      const Tensor<double>& bias, int stride, int pad) {
  const Shape4 in = input.shape();
  const int kh = kernel.shape().n, kw = kernel.shape().h;
  const int cin = kernel.shape().w, cout = kernel.shape().c;
  if (cin != in.c) {
    throw ShapeError("oracle conv2d: channel mismatch");
  }
  const int oh = (in.h + 2 * pad - kh) / stride + 1;
  const int ow = (in.w + 2 * pad - kw) / stride + 1;
  Tensor<double> out(Shape4{in.n, oh, ow, cout});
  for (int n = 0; n < in.n; ++n) {
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        for (int co = 0; co < cout; ++co) {
          double acc = bias[co];
          for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy * stride - pad + ky;
              const int ix = ox * stride - pad + kx;
              for (int ci = 0; ci < cin; ++ci) {
                const double v = (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w)
                                     ? 0.0
                                     : input.at(n, iy, ix, ci);
                acc += v * kernel.at(ky, kx, ci, co);
              }
            }
          }
          out.at(n, oy, ox, co) = acc;
        }
      }
    }
  }
  return out;
}

double ssim(const ImageD& ref, const ImageD& test, int window, double sigma,
            double c1, double c2) {
  const int h = int(ref.rows()), w = int(ref.cols());
  std::vector<double> mask(size_t(window) * window);
  const double mid = (window - 1) / 2.0;
  double msum = 0.0;
  for (int i = 0; i < window; ++i) {
    for (int j = 0; j < window; ++j) {
      const double d2 = (i - mid) * (i - mid) + (j - mid) * (j - mid);
      mask[size_t(i) * window + j] = std::exp(-d2 / (2.0 * sigma * sigma));
      msum += mask[size_t(i) * window + j];
    }
  }
  for (double& m : mask) m /= msum;

  double acc = 0.0;
  long count = 0;
  for (int y = 0; y + window <= h; ++y) {
    for (int x = 0; x + window <= w; ++x) {
      double mu_a = 0.0, mu_b = 0.0;
      for (int i = 0; i < window; ++i) {
        for (int j = 0; j < window; ++j) {
          const double m = mask[size_t(i) * window + j];
          mu_a += m * ref(y + i, x + j);
          mu_b += m * test(y + i, x + j);
        }
      }
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (int i = 0; i < window; ++i) {
        for (int j = 0; j < window; ++j) {
          const double m = mask[size_t(i) * window + j];
          const double da = ref(y + i, x + j) - mu_a;
          const double db = test(y + i, x + j) - mu_b;
          va += m * da * da;
          vb += m * db * db;
          cov += m * da * db;
        }
      }
      acc += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
      ++count;
    }
  }
  return acc / double(count);
}

double uqi(const ImageD& ref, const ImageD& test, int window) {
  const int h = int(ref.rows()), w = int(ref.cols());
  const double inv = 1.0 / (double(window) * window);
  double acc = 0.0;
  long included = 0;
  for (int y = 0; y + window <= h; ++y) {
    for (int x = 0; x + window <= w; ++x) {
      double mu_a = 0.0, mu_b = 0.0;
      for (int i = 0; i < window; ++i) {
        for (int j = 0; j < window; ++j) {
          mu_a += inv * ref(y + i, x + j);
          mu_b += inv * test(y + i, x + j);
        }
      }
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (int i = 0; i < window; ++i) {
        for (int j = 0; j < window; ++j) {
          const double da = ref(y + i, x + j) - mu_a;
          const double db = test(y + i, x + j) - mu_b;
          va += inv * da * da;
          vb += inv * db * db;
          cov += inv * da * db;
        }
      }
      const double den1 = va + vb;
      const double den2 = mu_a * mu_a + mu_b * mu_b;
      if (den1 > 0.0 && den2 > 0.0) {
        acc += 4.0 * cov * mu_a * mu_b / (den1 * den2);
        ++included;
      } else if (va == 0.0 && vb == 0.0) {
        if (mu_a == mu_b) {
          acc += 1.0;
          ++included;
        }
      } else if (den2 == 0.0) {
        ++included;  // constant vs nonconstant at zero mean contributes 0
      }
    }
  }
  return included > 0 ? acc / double(included) : 0.0;
}

std::vector<std::vector<double>> gram(const Tensor<double>& v) {
  const Shape4 s = v.shape();
  std::vector<std::vector<double>> g(size_t(s.c), std::vector<double>(size_t(s.c), 0.0));
  const double norm = 1.0 / (double(s.h) * double(s.w) * double(s.c));
  for (int m = 0; m < s.c; ++m) {
    for (int q = 0; q < s.c; ++q) {
      double acc = 0.0;
      for (int n = 0; n < s.n; ++n) {
        double item = 0.0;
        for (int y = 0; y < s.h; ++y) {
          for (int x = 0; x < s.w; ++x) {
            item += v.at(n, y, x, m) * v.at(n, y, x, q);
          }
        }
        acc += item * norm;
      }
      g[size_t(m)][size_t(q)] = acc / double(s.n);
    }
  }
  return g;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= double(values.size());
  return {mean, std::sqrt(var)};
}

double adam_scalar(double theta0, int steps, double lr, double beta1, double beta2,
                   double eps, const std::function<double(double)>& grad) {
  double theta = theta0, m = 0.0, v = 0.0;
  for (int t = 1; t <= steps; ++t) {
    const double g = grad(theta);
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double mhat = m / (1.0 - std::pow(beta1, t));
    const double vhat = v / (1.0 - std::pow(beta2, t));
    theta -= lr * mhat / (std::sqrt(vhat) + eps);
  }
  return theta;
}

}  // namespace medgan::oracle
