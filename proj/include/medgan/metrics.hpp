#pragma once

#include <string>
#include <vector>

#include "medgan/fft.hpp"
#include "medgan/networks.hpp"

// Full-reference quality metrics on [0,1] images, all accumulated in 64-bit:
// SSIM (11x11 Gaussian window, sigma 1.5, C1=(0.01)^2, C2=(0.03)^2, mean over
// valid positions), UQI (sliding 8x8 uniform window), pixel-domain multiscale
// VIF (4 scales, sigma_n^2 = 2 on a [0,255] rescale), and FPD, a fixed-feature
// perceptual distance standing in for LPIPS: the mean squared difference of
// channel-normalized fixed-extractor features, averaged over layers.

namespace medgan {

double ssim(const ImageD& ref, const ImageD& test);

// SSIM with a uniform square window and explicit constants; uqi(a, b) equals
// ssim_uniform(a, b, 8, 0, 0) on images without degenerate windows.
double ssim_uniform(const ImageD& ref, const ImageD& test, int window,
                    double c1, double c2);

double uqi(const ImageD& ref, const ImageD& test);

double vif_p(const ImageD& ref, const ImageD& test);

double fpd(const ImageD& ref, const ImageD& test, const FixedExtractorSpec& spec);

struct MetricRow {
  int id = 0;
  std::string region;
  double ssim = 0.0;
  double uqi = 0.0;
  double vif = 0.0;
  double fpd = 0.0;
};

struct AggregateRow {
  std::string method;
  std::string region;
  std::string metric;
  double mean = 0.0;
  double std_dev = 0.0;  // population
  int n = 0;
};

struct MetricReport {
  std::string method;
  std::vector<MetricRow> rows;
  std::vector<AggregateRow> aggregates;
};

// Per-region mean and population standard deviation for each metric, regions
// ordered by first appearance. Empty input is rejected.
MetricReport aggregate_report(const std::string& method, std::vector<MetricRow> rows);

// CSV with header "method,region,metric,mean,std,n", 6 significant digits.
std::string aggregates_csv(const std::vector<MetricReport>& reports);

// CSV with header "id,region,ssim,uqi,vif,fpd", prefixed by a method column.
std::string rows_csv(const std::string& method, const std::vector<MetricRow>& rows);

}  // namespace medgan
