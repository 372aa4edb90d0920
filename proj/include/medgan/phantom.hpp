#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "medgan/fft.hpp"
#include "medgan/prng.hpp"

// Procedural phantoms standing in for the three body-region classes:
// nested ellipses (head-like), soft blobs (abdomen-like), bilateral rings
// (pelvis-like). Geometry and intensities jitter per seed; values land in
// [0, 1].

namespace medgan {

enum class PhantomClass { kHeadLike, kAbdomenLike, kPelvisLike };

inline std::string to_string(PhantomClass c) {
  switch (c) {
    case PhantomClass::kHeadLike: return "head-like";
    case PhantomClass::kAbdomenLike: return "abdomen-like";
    case PhantomClass::kPelvisLike: return "pelvis-like";
  }
  throw ShapeError("unknown phantom class");
}

inline PhantomClass phantom_class_from(const std::string& s) {
  if (s == "head-like") return PhantomClass::kHeadLike;
  if (s == "abdomen-like") return PhantomClass::kAbdomenLike;
  if (s == "pelvis-like") return PhantomClass::kPelvisLike;
  throw IoError("unknown region class '" + s + "'");
}

namespace detail {

// Soft-edged ellipse, additive. Coordinates and axes are fractions of the
// image side; rotation in radians; edge is the blend width in radius units.
inline void add_ellipse(ImageD& img, double cx, double cy, double ax, double ay,
                        double rot, double intensity, double edge = 0.06) {
  const int n = int(img.rows());
  const double c = std::cos(rot), s = std::sin(rot);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double px = (x + 0.5) / n - cx;
      const double py = (y + 0.5) / n - cy;
      const double rx = (c * px + s * py) / ax;
      const double ry = (-s * px + c * py) / ay;
      const double r = std::sqrt(rx * rx + ry * ry);
      double t = (1.0 - r) / edge + 0.5;
      t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
      img(y, x) += intensity * t * t * (3.0 - 2.0 * t);
    }
  }
}

inline void add_blob(ImageD& img, double cx, double cy, double sigma, double intensity) {
  const int n = int(img.rows());
  const double s2 = 2.0 * sigma * sigma;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double px = (x + 0.5) / n - cx;
      const double py = (y + 0.5) / n - cy;
      img(y, x) += intensity * std::exp(-(px * px + py * py) / s2);
    }
  }
}

inline double jitter(Prng& rng, double base, double rel) {
  return base * (1.0 + rel * (2.0 * rng.uniform() - 1.0));
}

}  // namespace detail

inline ImageD gen_phantom(PhantomClass cls, int size, std::uint64_t seed) {
  if (size != 64 && size != 128 && size != 256) {
    throw ShapeError("gen_phantom: size must be 64, 128 or 256");
  }
  Prng rng(seed);
  ImageD img = ImageD::Zero(size, size);
  const double rot = (2.0 * rng.uniform() - 1.0) * 0.10;  // shared pose wobble

  switch (cls) {
    case PhantomClass::kHeadLike: {
      const double ax = detail::jitter(rng, 0.40, 0.06);
      const double ay = detail::jitter(rng, 0.32, 0.06);
      detail::add_ellipse(img, 0.5, 0.5, ax, ay, rot, 0.85);
      detail::add_ellipse(img, 0.5, 0.5, ax * 0.90, ay * 0.88, rot, -0.42);  // skull ring
      for (int side = -1; side <= 1; side += 2) {
        detail::add_ellipse(img, 0.5 + side * detail::jitter(rng, 0.055, 0.15),
                            detail::jitter(rng, 0.47, 0.04), 0.035, 0.085, rot,
                            -0.20, 0.12);
      }
      const int nodules = 2 + int(rng.next() % 3);
      for (int i = 0; i < nodules; ++i) {
        detail::add_blob(img, rng.uniform(0.35, 0.65), rng.uniform(0.35, 0.65),
                         rng.uniform(0.02, 0.045), rng.uniform(0.10, 0.28));
      }
      break;
    }
    case PhantomClass::kAbdomenLike: {
      detail::add_ellipse(img, 0.5, 0.52, detail::jitter(rng, 0.46, 0.05),
                          detail::jitter(rng, 0.36, 0.05), rot, 0.55, 0.10);
      detail::add_blob(img, detail::jitter(rng, 0.36, 0.08),
                       detail::jitter(rng, 0.42, 0.08), 0.11, 0.30);  // liver-like mass
      for (int side = -1; side <= 1; side += 2) {
        detail::add_blob(img, 0.5 + side * detail::jitter(rng, 0.17, 0.10),
                         detail::jitter(rng, 0.60, 0.06), 0.045, 0.32);
      }
      detail::add_ellipse(img, 0.5, detail::jitter(rng, 0.76, 0.04), 0.055, 0.05,
                          0.0, 0.35, 0.15);  // spine-like disk
      const int loops = 3 + int(rng.next() % 3);
      for (int i = 0; i < loops; ++i) {
        detail::add_blob(img, rng.uniform(0.35, 0.65), rng.uniform(0.40, 0.62),
                         rng.uniform(0.025, 0.05), rng.uniform(-0.15, 0.18));
      }
      break;
    }
    case PhantomClass::kPelvisLike: {
      detail::add_ellipse(img, 0.5, 0.52, detail::jitter(rng, 0.47, 0.05),
                          detail::jitter(rng, 0.30, 0.05), rot, 0.50, 0.10);
      for (int side = -1; side <= 1; side += 2) {
        const double cx = 0.5 + side * detail::jitter(rng, 0.18, 0.08);
        const double cy = detail::jitter(rng, 0.45, 0.05);
        const double wing_ax = detail::jitter(rng, 0.115, 0.10);
        const double wing_ay = detail::jitter(rng, 0.155, 0.10);
        detail::add_ellipse(img, cx, cy, wing_ax, wing_ay, side * 0.35, 0.38);
        detail::add_ellipse(img, cx, cy, wing_ax * 0.72, wing_ay * 0.72,
                            side * 0.35, -0.30);  // iliac ring interior
        detail::add_blob(img, 0.5 + side * 0.26, detail::jitter(rng, 0.72, 0.05),
                         0.045, 0.30);  // femoral head
      }
      detail::add_blob(img, 0.5, detail::jitter(rng, 0.62, 0.05),
                       detail::jitter(rng, 0.07, 0.12), 0.22);  // bladder-like blob
      break;
    }
  }

  img = img.max(0.0).min(1.0);
  return img;
}

}  // namespace medgan
