#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dbcr {
namespace metrics {

double psnr(const Tensor& pred, const Tensor& ref, double peak) {
  require_same_shape(pred, ref, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - ref[i];
    mse += d * d;
  }
  mse /= static_cast<double>(pred.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

std::vector<double> gaussian_kernel11(double sigma) {
  std::vector<double> k(11);
  double sum = 0.0;
  for (int i = 0; i < 11; ++i) {
    double d = i - 5.0;
    k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable valid-mode Gaussian filter of a [H,W] plane: output (H-10)x(W-10).
std::vector<double> gauss_filter_valid(const double* img, int h, int w,
                                       const std::vector<double>& k) {
  const int oh = h - 10, ow = w - 10;
  std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < 11; ++i) acc += k[static_cast<std::size_t>(i)] * img[y * w + x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < 11; ++i) acc += k[static_cast<std::size_t>(i)] * tmp[(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const Tensor& pred, const Tensor& ref, double peak) {
  require_same_shape(pred, ref, "ssim");
  if (pred.ndim() != 3) throw std::invalid_argument("ssim: expected [C,H,W]");
  const int c = pred.dim(0), h = pred.dim(1), w = pred.dim(2);
  if (h < 11 || w < 11) {
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const auto k = gaussian_kernel11(1.5);
  const std::size_t p = static_cast<std::size_t>(h) * w;
  const std::size_t wp = static_cast<std::size_t>(h - 10) * (w - 10);

  double total = 0.0;
  for (int ch = 0; ch < c; ++ch) {
    const double* a = pred.data() + ch * p;
    const double* b = ref.data() + ch * p;
    std::vector<double> a2(p), b2(p), ab(p);
    for (std::size_t i = 0; i < p; ++i) {
      a2[i] = a[i] * a[i];
      b2[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    auto mu_a = gauss_filter_valid(a, h, w, k);
    auto mu_b = gauss_filter_valid(b, h, w, k);
    auto m_a2 = gauss_filter_valid(a2.data(), h, w, k);
    auto m_b2 = gauss_filter_valid(b2.data(), h, w, k);
    auto m_ab = gauss_filter_valid(ab.data(), h, w, k);
    double acc = 0.0;
    for (std::size_t i = 0; i < wp; ++i) {
      double va = m_a2[i] - mu_a[i] * mu_a[i];
      double vb = m_b2[i] - mu_b[i] * mu_b[i];
      double cov = m_ab[i] - mu_a[i] * mu_b[i];
      double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
      acc += num / den;
    }
    total += acc / static_cast<double>(wp);
  }
  return total / c;
}

double mae(const Tensor& pred, const Tensor& ref) {
  require_same_shape(pred, ref, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - ref[i]);
  return acc / static_cast<double>(pred.size());
}

double sam(const Tensor& pred, const Tensor& ref) {
  require_same_shape(pred, ref, "sam");
  if (pred.ndim() != 3 || pred.dim(0) < 2) {
    throw std::invalid_argument("sam: expected [C,H,W] with C >= 2");
  }
  const int c = pred.dim(0);
  const std::size_t p = static_cast<std::size_t>(pred.dim(1)) * pred.dim(2);
  double acc = 0.0;
  std::size_t valid = 0;
  for (std::size_t i = 0; i < p; ++i) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int ch = 0; ch < c; ++ch) {
      double a = pred[static_cast<std::size_t>(ch) * p + i];
      double b = ref[static_cast<std::size_t>(ch) * p + i];
      dot += a * b;
      na += a * a;
      nb += b * b;
    }
    if (na == 0.0 || nb == 0.0) continue;  // zero-norm pixels are excluded
    double cosv = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
    acc += std::acos(cosv);
    ++valid;
  }
  if (valid == 0) return std::numeric_limits<double>::quiet_NaN();
  return acc / static_cast<double>(valid) * 180.0 / std::numbers::pi;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

StratumStats summarize(double lo, double hi, const std::vector<ImageMetrics>& items) {
  StratumStats s;
  s.lo = lo;
  s.hi = hi;
  s.count = items.size();
  if (items.empty()) return s;
  std::vector<double> ps, ss, ms, sa;
  for (const auto& m : items) {
    s.mean_psnr += m.psnr;
    s.mean_ssim += m.ssim;
    s.mean_mae += m.mae;
    s.mean_sam += m.sam;
    ps.push_back(m.psnr);
    ss.push_back(m.ssim);
    ms.push_back(m.mae);
    sa.push_back(m.sam);
  }
  double n = static_cast<double>(items.size());
  s.mean_psnr /= n;
  s.mean_ssim /= n;
  s.mean_mae /= n;
  s.mean_sam /= n;
  s.median_psnr = median(std::move(ps));
  s.median_ssim = median(std::move(ss));
  s.median_mae = median(std::move(ms));
  s.median_sam = median(std::move(sa));
  return s;
}

}  // namespace

MetricsReport stratified_report(const std::vector<ImageMetrics>& results) {
  if (results.empty()) throw std::invalid_argument("stratified_report: empty input");
  MetricsReport rep;
  rep.per_image = results;
  rep.overall = summarize(0.0, 1.0, results);
  for (int b = 0; b < 5; ++b) {
    double lo = 0.2 * b;
    double hi = 0.2 * (b + 1);
    std::vector<ImageMetrics> bucket;
    for (const auto& m : results) {
      bool in = b == 4 ? (m.cloud_fraction >= lo && m.cloud_fraction <= hi)
                       : (m.cloud_fraction >= lo && m.cloud_fraction < hi);
      if (in) bucket.push_back(m);
    }
    rep.strata.push_back(summarize(lo, hi, bucket));
  }
  return rep;
}

}  // namespace metrics
}  // namespace dbcr
