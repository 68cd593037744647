#pragma once

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace dbcr {
namespace metrics {

// 10 log10(peak^2 / MSE); +inf when the images are identical.
double psnr(const Tensor& pred, const Tensor& ref, double peak = 1.0);

// Windowed SSIM, 11x11 Gaussian window sigma=1.5, stability constants from
// the peak value, averaged over channels and valid window positions.
double ssim(const Tensor& pred, const Tensor& ref, double peak = 1.0);

double mae(const Tensor& pred, const Tensor& ref);

// Mean spectral angle in degrees over pixels where both spectra have nonzero
// norm; NaN when no pixel qualifies.
double sam(const Tensor& pred, const Tensor& ref);

struct ImageMetrics {
  std::string scene_id;
  double psnr = 0.0;
  double ssim = 0.0;
  double mae = 0.0;
  double sam = 0.0;
  double cloud_fraction = 0.0;
};

struct StratumStats {
  double lo = 0.0, hi = 0.0;  // cloud-cover bounds, right-exclusive except the last
  std::size_t count = 0;
  double mean_psnr = 0.0, median_psnr = 0.0;
  double mean_ssim = 0.0, median_ssim = 0.0;
  double mean_mae = 0.0, median_mae = 0.0;
  double mean_sam = 0.0, median_sam = 0.0;
};

struct MetricsReport {
  std::vector<ImageMetrics> per_image;
  StratumStats overall;
  std::vector<StratumStats> strata;  // five cloud-cover buckets
};

MetricsReport stratified_report(const std::vector<ImageMetrics>& results);

// Median as the sorted middle (average of the two middles for even counts).
double median(std::vector<double> values);

}  // namespace metrics
}  // namespace dbcr
