#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "medgan/fft.hpp"
#include "medgan/tensor.hpp"

// Independent reference implementations used to verify the fast paths.
// Everything here is written as direct loops over the defining formulas and
// shares no code with the implementations it checks; only the accumulation
// order contract (bias first, then ascending ky, kx, cin per output) is
// common, which is what makes the 64-bit comparison exact.

namespace medgan::oracle {

// Direct nested-loop convolution, zero padding.
Tensor<double> conv2d(const Tensor<double>& input, const Tensor<double>& kernel,
                      const Tensor<double>& bias, int stride, int pad);

// SSIM as the plain per-window formula with an explicitly renormalized
// Gaussian mask; mean over valid positions.
double ssim(const ImageD& ref, const ImageD& test, int window, double sigma,
            double c1, double c2);

// UQI as the plain per-window formula with the same degenerate-window
// conventions the implementation documents.
double uqi(const ImageD& ref, const ImageD& test, int window);

// Gram matrix by the literal double sum, one batch item at a time.
std::vector<std::vector<double>> gram(const Tensor<double>& v);

// Population mean and standard deviation by direct two-pass summation.
std::pair<double, double> mean_std(const std::vector<double>& values);

// The scalar Adam recurrence run directly on d(loss)/d(theta) = grad(theta).
double adam_scalar(double theta0, int steps, double lr, double beta1, double beta2,
                   double eps, const std::function<double(double)>& grad);

}  // namespace medgan::oracle
