#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "metrics/metrics.hpp"

using dbcr::Tensor;
namespace m = dbcr::metrics;

namespace {

// Independent reference implementations, written directly from the metric
// definitions with no shared code with the library versions.

double ref_psnr(const Tensor& a, const Tensor& b, double peak) {
  long double se = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double d = a[i] - b[i];
    se += d * d;
  }
  const long double mse = se / a.size();
  return static_cast<double>(10.0L * std::log10(peak * (long double)peak / mse));
}

double ref_mae(const Tensor& a, const Tensor& b) {
  long double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs((long double)a[i] - b[i]);
  return static_cast<double>(acc / a.size());
}

double ref_sam_deg(const Tensor& a, const Tensor& b) {
  const int c = a.dim(0);
  const std::size_t p = static_cast<std::size_t>(a.dim(1)) * a.dim(2);
  long double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < p; ++i) {
    long double dot = 0, na = 0, nb = 0;
    for (int ch = 0; ch < c; ++ch) {
      const long double va = a[ch * p + i], vb = b[ch * p + i];
      dot += va * vb;
      na += va * va;
      nb += vb * vb;
    }
    if (na == 0 || nb == 0) continue;
    long double cosv = dot / std::sqrt(na * nb);
    cosv = std::min((long double)1, std::max((long double)-1, cosv));
    acc += std::acos(cosv);
    ++n;
  }
  return static_cast<double>(acc / n * 180.0L / std::numbers::pi_v<long double>);
}

// Direct (non-separable) windowed structural similarity over valid positions.
double ref_ssim(const Tensor& a, const Tensor& b, double peak) {
  const int c = a.dim(0), h = a.dim(1), w = a.dim(2);
  std::vector<double> win(121);
  double wsum = 0.0;
  for (int dy = 0; dy < 11; ++dy) {
    for (int dx = 0; dx < 11; ++dx) {
      const double r2 = (dy - 5.0) * (dy - 5.0) + (dx - 5.0) * (dx - 5.0);
      win[static_cast<std::size_t>(dy) * 11 + dx] = std::exp(-r2 / (2.0 * 1.5 * 1.5));
      wsum += win[static_cast<std::size_t>(dy) * 11 + dx];
    }
  }
  for (double& v : win) v /= wsum;
  const double c1 = 0.0001 * peak * peak, c2 = 0.0009 * peak * peak;
  double total = 0.0;
  for (int ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    int count = 0;
    for (int y = 0; y + 11 <= h; ++y) {
      for (int x = 0; x + 11 <= w; ++x) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int dy = 0; dy < 11; ++dy) {
          for (int dx = 0; dx < 11; ++dx) {
            const double wv = win[static_cast<std::size_t>(dy) * 11 + dx];
            const double va = a.at(ch, y + dy, x + dx), vb = b.at(ch, y + dy, x + dx);
            ma += wv * va;
            mb += wv * vb;
            maa += wv * va * va;
            mbb += wv * vb * vb;
            mab += wv * va * vb;
          }
        }
        const double va = maa - ma * ma, vb = mbb - mb * mb, cov = mab - ma * mb;
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
    total += acc / count;
  }
  return total / c;
}

}  // namespace

TEST_CASE("pixel metrics agree with reference implementations on random pairs") {
  for (int trial = 0; trial < 25; ++trial) {
    Tensor a = testutil::random_tensor({4, 16, 16}, 1000 + static_cast<std::uint64_t>(trial));
    Tensor b = testutil::random_tensor({4, 16, 16}, 2000 + static_cast<std::uint64_t>(trial));
    CHECK(std::abs(m::psnr(a, b) - ref_psnr(a, b, 1.0)) < 1e-6);
    CHECK(std::abs(m::mae(a, b) - ref_mae(a, b)) < 1e-9);
    CHECK(std::abs(m::sam(a, b) - ref_sam_deg(a, b)) < 1e-6);
    CHECK(std::abs(m::ssim(a, b) - ref_ssim(a, b, 1.0)) < 1e-4);
  }
}

TEST_CASE("identical images score perfectly") {
  Tensor a = testutil::random_tensor({3, 16, 16}, 5);
  CHECK(std::isinf(m::psnr(a, a)));
  CHECK(m::mae(a, a) == 0.0);
  CHECK(m::ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(m::sam(a, a) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("spectral angle excludes zero-norm pixels") {
  Tensor a({2, 1, 2}), b({2, 1, 2});
  // pixel 0: zero in prediction -> excluded; pixel 1: orthogonal -> 90 deg.
  a[0] = 0.0;
  a[2] = 0.0;  // pred pixel 0 = (0,0)
  a[1] = 1.0;
  a[3] = 0.0;  // pred pixel 1 = (1,0)
  b[0] = 1.0;
  b[2] = 1.0;  // ref pixel 0 = (1,1)
  b[1] = 0.0;
  b[3] = 1.0;  // ref pixel 1 = (0,1)
  CHECK(m::sam(a, b) == doctest::Approx(90.0).epsilon(1e-9));
}

TEST_CASE("median averages the middle pair for even counts") {
  CHECK(m::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(m::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("stratified report buckets by cloud fraction") {
  std::vector<m::ImageMetrics> items;
  for (int i = 0; i < 10; ++i) {
    m::ImageMetrics im;
    im.scene_id = "s" + std::to_string(i);
    im.psnr = 20.0 + i;
    im.ssim = 0.5;
    im.mae = 0.1;
    im.sam = 5.0;
    im.cloud_fraction = 0.1 * i;  // 0.0 .. 0.9
    items.push_back(im);
  }
  m::MetricsReport rep = m::stratified_report(items);
  REQUIRE(rep.strata.size() == 5);
  CHECK(rep.overall.count == 10);
  // 0.2-wide buckets, right-exclusive: two items each.
  for (const auto& s : rep.strata) CHECK(s.count == 2);
  CHECK(rep.overall.mean_psnr == doctest::Approx(24.5));
  CHECK(rep.overall.median_psnr == doctest::Approx(24.5));

  // The upper boundary belongs to the last bucket.
  items[9].cloud_fraction = 1.0;
  rep = m::stratified_report(items);
  CHECK(rep.strata[4].count == 2);
}
