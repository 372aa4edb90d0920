#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "medgan/fft.hpp"
#include "medgan/prng.hpp"

// k-space motion simulation. Phase-encode lines are spectrum rows taken in
// acquisition order t = 0..N-1, where line t carries the signed vertical
// frequency t - N/2. The composited spectrum takes each line from the
// transform of a differently-moved copy of the clean image; the magnitude of
// the inverse transform is the corrupted image.

namespace medgan {

struct RigidMotionParams {
  int segments = 6;            // K contiguous blocks of phase-encode lines
  double max_translation = 2.0;  // pixels, per axis
  double max_rotation = 3.0;     // degrees
};

struct NonrigidMotionParams {
  double amplitude = 2.5;       // A, pixels of peak displacement
  double period = 16.0;         // T, phase-encode lines per motion cycle
  double envelope_width = 0.30; // Gaussian envelope sigma, fraction of image side
};

struct MotionParams {
  RigidMotionParams rigid;
  NonrigidMotionParams nonrigid;
  std::uint64_t seed = 1;
};

namespace detail {

// Bilinear rotation about the image center; out-of-bounds samples read 0.
inline ImageD rotate_bilinear(const ImageD& img, double radians) {
  const int n = int(img.rows());
  const double c = std::cos(radians), s = std::sin(radians);
  const double mid = (n - 1) / 2.0;
  ImageD out(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = x - mid, dy = y - mid;
      const double sx = c * dx + s * dy + mid;
      const double sy = -s * dx + c * dy + mid;
      const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
      const double fx = sx - x0, fy = sy - y0;
      auto px = [&](int yy, int xx) -> double {
        return (yy < 0 || yy >= n || xx < 0 || xx >= n) ? 0.0 : img(yy, xx);
      };
      out(y, x) = (1 - fy) * ((1 - fx) * px(y0, x0) + fx * px(y0, x0 + 1)) +
                  fy * ((1 - fx) * px(y0 + 1, x0) + fx * px(y0 + 1, x0 + 1));
    }
  }
  return out;
}

// Vertical warp: output row y samples the input at y - shift * env(y, x).
inline ImageD warp_vertical(const ImageD& img, double shift, double env_sigma_px) {
  const int n = int(img.rows());
  const double mid = (n - 1) / 2.0;
  const double s2 = 2.0 * env_sigma_px * env_sigma_px;
  ImageD out(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double r2 = (x - mid) * (x - mid) + (y - mid) * (y - mid);
      const double sy = y - shift * std::exp(-r2 / s2);
      const int y0 = int(std::floor(sy));
      const double fy = sy - y0;
      auto px = [&](int yy) -> double {
        return (yy < 0 || yy >= n) ? 0.0 : img(yy, x);
      };
      out(y, x) = (1 - fy) * px(y0) + fy * px(y0 + 1);
    }
  }
  return out;
}

// exp(-2*pi*i (fy*dy + fx*dx) / N) per spectrum bin, signed frequencies.
inline void apply_translation_phase(CImage<double>& spec, double dx, double dy) {
  const int n = int(spec.rows());
  for (int u = 0; u < n; ++u) {
    const int fy = u < n / 2 ? u : u - n;
    for (int v = 0; v < n; ++v) {
      const int fx = v < n / 2 ? v : v - n;
      const double ang = -2.0 * M_PI * (fy * dy + fx * dx) / double(n);
      spec(u, v) *= std::complex<double>(std::cos(ang), std::sin(ang));
    }
  }
}

inline void check_square_pow2(const ImageD& img, const char* op) {
  if (img.rows() != img.cols() || !is_pow2(int(img.rows()))) {
    throw ShapeError(std::string(op) + ": image must be square with power-of-two side");
  }
}

// Unshifted spectrum row holding acquisition line t (signed frequency t - N/2).
inline int acquisition_row(int t, int n) { return (t + n / 2) % n; }

inline ImageD magnitude_clamped(const CImage<double>& spec) {
  const int n = int(spec.rows());
  CImage<double> img = ifft2(spec);
  ImageD out(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double m = std::abs(img(y, x));
      out(y, x) = m < 0.0 ? 0.0 : (m > 1.0 ? 1.0 : m);
    }
  }
  return out;
}

}  // namespace detail

// Rigid corruption: the acquisition is split into K contiguous segments of
// phase-encode lines; segment k sees the clean image rotated by theta_k and
// translated by (dx_k, dy_k) (a pure phase ramp in k-space). Draws per
// segment, in order: dx, dy, theta.
inline ImageD corrupt_rigid(const ImageD& clean, const MotionParams& params) {
  detail::check_square_pow2(clean, "corrupt_rigid");
  const int n = int(clean.rows());
  const int k_segments = params.rigid.segments;
  if (k_segments < 1 || k_segments > n) {
    throw ShapeError("corrupt_rigid: segment count " + std::to_string(k_segments) +
                     " outside [1, " + std::to_string(n) + "]");
  }
  if (params.rigid.max_translation < 0 || params.rigid.max_rotation < 0) {
    throw ShapeError("corrupt_rigid: negative motion bounds");
  }

  Prng rng(params.seed);
  CImage<double> composite(n, n);
  for (int k = 0; k < k_segments; ++k) {
    const double dx = rng.uniform(-params.rigid.max_translation,
                                  params.rigid.max_translation);
    const double dy = rng.uniform(-params.rigid.max_translation,
                                  params.rigid.max_translation);
    const double theta = rng.uniform(-params.rigid.max_rotation,
                                     params.rigid.max_rotation) * M_PI / 180.0;
    CImage<double> spec =
        theta == 0.0 ? fft2(clean) : fft2(detail::rotate_bilinear(clean, theta));
    if (dx != 0.0 || dy != 0.0) detail::apply_translation_phase(spec, dx, dy);
    const int t0 = k * n / k_segments;
    const int t1 = (k + 1) * n / k_segments;
    for (int t = t0; t < t1; ++t) {
      const int u = detail::acquisition_row(t, n);
      composite.row(u) = spec.row(u);
    }
  }
  return detail::magnitude_clamped(composite);
}

// Non-rigid corruption: line t sees the clean image warped vertically by
// A * sin(2*pi*t / T) under a centered Gaussian envelope.
inline ImageD corrupt_nonrigid(const ImageD& clean, const MotionParams& params) {
  detail::check_square_pow2(clean, "corrupt_nonrigid");
  const int n = int(clean.rows());
  if (params.nonrigid.amplitude < 0) {
    throw ShapeError("corrupt_nonrigid: negative amplitude");
  }
  if (params.nonrigid.period <= 0 || params.nonrigid.envelope_width <= 0) {
    throw ShapeError("corrupt_nonrigid: period and envelope width must be positive");
  }
  const double env_px = params.nonrigid.envelope_width * n;

  CImage<double> composite(n, n);
  CImage<double> still;  // transform of the unwarped image, computed on demand
  bool have_still = false;
  for (int t = 0; t < n; ++t) {
    const double shift =
        params.nonrigid.amplitude * std::sin(2.0 * M_PI * double(t) / params.nonrigid.period);
    const int u = detail::acquisition_row(t, n);
    if (shift == 0.0) {
      if (!have_still) {
        still = fft2(clean);
        have_still = true;
      }
      composite.row(u) = still.row(u);
    } else {
      const CImage<double> spec = fft2(detail::warp_vertical(clean, shift, env_px));
      composite.row(u) = spec.row(u);
    }
  }
  return detail::magnitude_clamped(composite);
}

}  // namespace medgan
