#include "medgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace medgan {

namespace {

void check_same_shape(const ImageD& a, const ImageD& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                     "x" + std::to_string(b.cols()));
  }
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(size_t(size));
  const double mid = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    w[size_t(i)] = std::exp(-(i - mid) * (i - mid) / (2.0 * sigma * sigma));
    sum += w[size_t(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

struct WindowStats {
  double mu_a, mu_b, var_a, var_b, cov;
};

// Weighted local statistics at window origin (y, x); weights must sum to 1.
WindowStats stats_at(const ImageD& a, const ImageD& b, int y, int x,
                     const std::vector<double>& wy, const std::vector<double>& wx) {
  double mu_a = 0.0, mu_b = 0.0;
  for (size_t i = 0; i < wy.size(); ++i) {
    for (size_t j = 0; j < wx.size(); ++j) {
      const double w = wy[i] * wx[j];
      mu_a += w * a(y + int(i), x + int(j));
      mu_b += w * b(y + int(i), x + int(j));
    }
  }
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (size_t i = 0; i < wy.size(); ++i) {
    for (size_t j = 0; j < wx.size(); ++j) {
      const double w = wy[i] * wx[j];
      const double da = a(y + int(i), x + int(j)) - mu_a;
      const double db = b(y + int(i), x + int(j)) - mu_b;
      var_a += w * da * da;
      var_b += w * db * db;
      cov += w * da * db;
    }
  }
  return {mu_a, mu_b, var_a, var_b, cov};
}

double ssim_windowed(const ImageD& ref, const ImageD& test,
                     const std::vector<double>& win, double c1, double c2) {
  const int n = int(win.size());
  const int ph = int(ref.rows()) - n + 1;
  const int pw = int(ref.cols()) - n + 1;
  if (ph < 1 || pw < 1) {
    throw ShapeError("ssim: image smaller than the window");
  }
  double acc = 0.0;
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      const WindowStats s = stats_at(ref, test, y, x, win, win);
      const double num = (2.0 * s.mu_a * s.mu_b + c1) * (2.0 * s.cov + c2);
      const double den = (s.mu_a * s.mu_a + s.mu_b * s.mu_b + c1) *
                         (s.var_a + s.var_b + c2);
      acc += num / den;
    }
  }
  return acc / (double(ph) * double(pw));
}

}  // namespace

double ssim(const ImageD& ref, const ImageD& test) {
  check_same_shape(ref, test, "ssim");
  static const std::vector<double> win = gaussian_window(11, 1.5);
  const double c1 = 0.01 * 0.01;  // (0.01 * L)^2, L = 1
  const double c2 = 0.03 * 0.03;
  return ssim_windowed(ref, test, win, c1, c2);
}

double ssim_uniform(const ImageD& ref, const ImageD& test, int window,
                    double c1, double c2) {
  check_same_shape(ref, test, "ssim_uniform");
  const std::vector<double> win(size_t(window), 1.0 / double(window));
  return ssim_windowed(ref, test, win, c1, c2);
}

double uqi(const ImageD& ref, const ImageD& test) {
  check_same_shape(ref, test, "uqi");
  const int n = 8;
  const int ph = int(ref.rows()) - n + 1;
  const int pw = int(ref.cols()) - n + 1;
  if (ph < 1 || pw < 1) {
    throw ShapeError("uqi: image smaller than the 8x8 window");
  }
  const std::vector<double> win(size_t(n), 1.0 / double(n));

  double acc = 0.0;
  long included = 0;
  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      const WindowStats s = stats_at(ref, test, y, x, win, win);
      const double den1 = s.var_a + s.var_b;
      const double den2 = s.mu_a * s.mu_a + s.mu_b * s.mu_b;
      if (den1 > 0.0 && den2 > 0.0) {
        acc += 4.0 * s.cov * s.mu_a * s.mu_b / (den1 * den2);
        ++included;
      } else if (s.var_a == 0.0 && s.var_b == 0.0) {
        // two constant patches: full credit when equal, otherwise skipped
        if (s.mu_a == s.mu_b) {
          acc += 1.0;
          ++included;
        }
      } else if (den2 == 0.0) {
        // constant-vs-nonconstant with zero means
        acc += 0.0;
        ++included;
      }
      // den1 == 0 handled above; remaining zero-denominator windows skipped
    }
  }
  return included > 0 ? acc / double(included) : 0.0;
}

namespace {

// 'same' zero-padded separable blur used between VIF scales.
ImageD blur_same(const ImageD& img, const std::vector<double>& win) {
  const int h = int(img.rows()), w = int(img.cols());
  const int n = int(win.size());
  const int off = (n - 1) / 2;
  ImageD tmp = ImageD::Zero(h, w), out = ImageD::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const int xx = x + k - off;
        if (xx >= 0 && xx < w) acc += win[size_t(k)] * img(y, xx);
      }
      tmp(y, x) = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const int yy = y + k - off;
        if (yy >= 0 && yy < h) acc += win[size_t(k)] * tmp(yy, x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

ImageD decimate2(const ImageD& img) {
  const int h = (int(img.rows()) + 1) / 2, w = (int(img.cols()) + 1) / 2;
  ImageD out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out(y, x) = img(2 * y, 2 * x);
  }
  return out;
}

}  // namespace

double vif_p(const ImageD& ref_in, const ImageD& test_in) {
  check_same_shape(ref_in, test_in, "vif_p");
  if (ref_in.rows() < 32 || ref_in.cols() < 32) {
    throw ShapeError("vif_p: image too small for the 4-scale pyramid (need side >= 32)");
  }
  const double sigma_nsq = 2.0;
  const double eps = 1e-10;

  ImageD ref = ref_in * 255.0;
  ImageD test = test_in * 255.0;

  double num = 0.0, den = 0.0;
  for (int scale = 1; scale <= 4; ++scale) {
    const int n = (1 << (4 - scale + 1)) + 1;  // 17, 9, 5, 3
    const std::vector<double> win = gaussian_window(n, double(n) / 5.0);
    if (scale > 1) {
      ref = decimate2(blur_same(ref, win));
      test = decimate2(blur_same(test, win));
    }
    const int ph = int(ref.rows()) - n + 1;
    const int pw = int(ref.cols()) - n + 1;
    if (ph < 1 || pw < 1) {
      throw ShapeError("vif_p: image too small for the 4-scale pyramid");
    }
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        WindowStats s = stats_at(ref, test, y, x, win, win);
        double sigma1 = s.var_a < 0.0 ? 0.0 : s.var_a;
        double sigma2 = s.var_b < 0.0 ? 0.0 : s.var_b;
        double g = s.cov / (sigma1 + eps);
        double sv = sigma2 - g * s.cov;
        if (sigma1 < eps) {
          g = 0.0;
          sv = sigma2;
          sigma1 = 0.0;
        }
        if (sigma2 < eps) {
          g = 0.0;
          sv = 0.0;
        }
        if (g < 0.0) {
          sv = sigma2;
          g = 0.0;
        }
        if (sv < eps) sv = eps;
        num += std::log2(1.0 + g * g * sigma1 / (sv + sigma_nsq));
        den += std::log2(1.0 + sigma1 / sigma_nsq);
      }
    }
  }
  return den > 0.0 ? num / den : 1.0;
}

double fpd(const ImageD& ref, const ImageD& test, const FixedExtractorSpec& spec) {
  check_same_shape(ref, test, "fpd");
  const ParamStore<double> params = init_params<double>(spec);

  auto to_tensor = [](const ImageD& img) {
    Tensor<double> t(Shape4{1, int(img.rows()), int(img.cols()), 1});
    for (Eigen::Index i = 0; i < img.size(); ++i) {
      t[i] = 2.0 * img.data()[i] - 1.0;  // [0,1] -> network domain
    }
    return t;
  };
  const FeatureStack<double> fa = fixed_feature_extract(to_tensor(ref), spec, params);
  const FeatureStack<double> fb = fixed_feature_extract(to_tensor(test), spec, params);

  double total = 0.0;
  for (size_t i = 0; i < fa.layers.size(); ++i) {
    const Tensor<double>& a = fa.layers[i];
    const Tensor<double>& b = fb.layers[i];
    const Shape4 s = a.shape();
    const std::int64_t locs = std::int64_t(s.n) * s.h * s.w;
    double acc = 0.0;
    for (std::int64_t r = 0; r < locs; ++r) {
      const double* pa = a.data() + r * s.c;
      const double* pb = b.data() + r * s.c;
      double na = 0.0, nb = 0.0;
      for (int c = 0; c < s.c; ++c) {
        na += pa[c] * pa[c];
        nb += pb[c] * pb[c];
      }
      na = std::sqrt(na) + 1e-10;
      nb = std::sqrt(nb) + 1e-10;
      for (int c = 0; c < s.c; ++c) {
        const double d = pa[c] / na - pb[c] / nb;
        acc += d * d;
      }
    }
    total += acc / double(locs * s.c);
  }
  return total / double(fa.layers.size());
}

MetricReport aggregate_report(const std::string& method, std::vector<MetricRow> rows) {
  if (rows.empty()) {
    throw ShapeError("aggregate_report: no rows");
  }
  MetricReport rep;
  rep.method = method;
  rep.rows = std::move(rows);

  std::vector<std::string> regions;
  for (const auto& r : rep.rows) {
    if (std::find(regions.begin(), regions.end(), r.region) == regions.end()) {
      regions.push_back(r.region);
    }
  }
  const char* names[4] = {"ssim", "vif", "uqi", "fpd"};
  for (const auto& region : regions) {
    std::vector<double> vals[4];
    for (const auto& r : rep.rows) {
      if (r.region != region) continue;
      vals[0].push_back(r.ssim);
      vals[1].push_back(r.vif);
      vals[2].push_back(r.uqi);
      vals[3].push_back(r.fpd);
    }
    for (int m = 0; m < 4; ++m) {
      double mean = 0.0;
      for (double v : vals[m]) mean += v;
      mean /= double(vals[m].size());
      double var = 0.0;
      for (double v : vals[m]) var += (v - mean) * (v - mean);
      var /= double(vals[m].size());
      rep.aggregates.push_back(AggregateRow{method, region, names[m], mean,
                                            std::sqrt(var), int(vals[m].size())});
    }
  }
  return rep;
}

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string aggregates_csv(const std::vector<MetricReport>& reports) {
  std::string out = "method,region,metric,mean,std,n\n";
  for (const auto& rep : reports) {
    for (const auto& a : rep.aggregates) {
      out += a.method + "," + a.region + "," + a.metric + "," + fmt6(a.mean) + "," +
             fmt6(a.std_dev) + "," + std::to_string(a.n) + "\n";
    }
  }
  return out;
}

std::string rows_csv(const std::string& method, const std::vector<MetricRow>& rows) {
  std::string out = "method,id,region,ssim,uqi,vif,fpd\n";
  for (const auto& r : rows) {
    out += method + "," + std::to_string(r.id) + "," + r.region + "," + fmt6(r.ssim) +
           "," + fmt6(r.uqi) + "," + fmt6(r.vif) + "," + fmt6(r.fpd) + "\n";
  }
  return out;
}

}  // namespace medgan
