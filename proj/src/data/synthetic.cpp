#include "data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "core/rng.hpp"

namespace dbcr {

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Multi-octave value noise: random lattices bilinearly upsampled and summed
// with halving amplitudes, min-max normalized to [0,1].
Tensor smooth_noise(Rng& rng, int h, int w, int octaves) {
  Tensor field({h, w});
  double amp = 1.0;
  for (int o = 0; o < octaves; ++o) {
    int gh = std::max(2, (2 << o));
    int gw = gh;
    std::vector<double> lattice(static_cast<std::size_t>(gh) * gw);
    for (double& v : lattice) v = rng.uniform();
    for (int yy = 0; yy < h; ++yy) {
      double fy = static_cast<double>(yy) / h * (gh - 1);
      int y0 = static_cast<int>(fy);
      int y1 = std::min(y0 + 1, gh - 1);
      double ty = fy - y0;
      ty = ty * ty * (3.0 - 2.0 * ty);
      for (int xx = 0; xx < w; ++xx) {
        double fx = static_cast<double>(xx) / w * (gw - 1);
        int x0 = static_cast<int>(fx);
        int x1 = std::min(x0 + 1, gw - 1);
        double tx = fx - x0;
        tx = tx * tx * (3.0 - 2.0 * tx);
        double v00 = lattice[static_cast<std::size_t>(y0) * gw + x0];
        double v01 = lattice[static_cast<std::size_t>(y0) * gw + x1];
        double v10 = lattice[static_cast<std::size_t>(y1) * gw + x0];
        double v11 = lattice[static_cast<std::size_t>(y1) * gw + x1];
        double v = (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
        field[static_cast<std::size_t>(yy) * w + xx] += amp * v;
      }
    }
    amp *= 0.5;
  }
  double lo = field[0], hi = field[0];
  for (std::size_t i = 0; i < field.size(); ++i) {
    lo = std::min(lo, field[i]);
    hi = std::max(hi, field[i]);
  }
  double span = hi - lo;
  if (span <= 0.0) span = 1.0;
  for (std::size_t i = 0; i < field.size(); ++i) field[i] = (field[i] - lo) / span;
  return field;
}

Tensor box_blur3(const Tensor& img) {  // per channel, [C,H,W]
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  Tensor out({c, h, w});
  for (int ch = 0; ch < c; ++ch) {
    for (int yy = 0; yy < h; ++yy) {
      for (int xx = 0; xx < w; ++xx) {
        double acc = 0.0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            int sy = yy + dy, sx = xx + dx;
            if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
            acc += img.at(ch, sy, sx);
            ++n;
          }
        }
        out.at(ch, yy, xx) = acc / n;
      }
    }
  }
  return out;
}

}  // namespace

void SyntheticSceneParams::validate() const {
  if (!power_of_two(height) || !power_of_two(width) || height < 16 || width < 16) {
    throw std::invalid_argument("SyntheticSceneParams: H and W must be powers of two >= 16");
  }
  if (opt_channels < 1) throw std::invalid_argument("SyntheticSceneParams: opt_channels >= 1");
  if (terrain_octaves < 1) throw std::invalid_argument("SyntheticSceneParams: octaves >= 1");
  if (cloud_coverage_target < 0.0 || cloud_coverage_target > 1.0) {
    throw std::invalid_argument("SyntheticSceneParams: coverage target outside [0,1]");
  }
  if (cloud_opacity_min > cloud_opacity_max || cloud_opacity_min < 0.0 ||
      cloud_opacity_max > 1.0) {
    throw std::invalid_argument("SyntheticSceneParams: bad opacity range");
  }
  if (sar_noise_level < 0.0) throw std::invalid_argument("SyntheticSceneParams: negative noise");
}

SyntheticScene generate_scene(const SyntheticSceneParams& params) {
  params.validate();
  const int h = params.height, w = params.width, c = params.opt_channels;
  Rng terrain_rng(mix_seed(params.seed, 1));
  Rng cloud_rng(mix_seed(params.seed, 2));
  Rng sar_rng(mix_seed(params.seed, 3));

  // Terrain with per-channel spectral correlation: every band is a convex
  // mix of one base and one detail field, so bands are correlated but not
  // identical. Values stay in [0.05, 0.55], well below the cloud brightness.
  Tensor base = smooth_noise(terrain_rng, h, w, params.terrain_octaves);
  Tensor detail = smooth_noise(terrain_rng, h, w, params.terrain_octaves + 2);
  Tensor x0({c, h, w});
  const std::size_t p = static_cast<std::size_t>(h) * w;
  for (int ch = 0; ch < c; ++ch) {
    double mix = terrain_rng.uniform(0.3, 0.9);
    double gain = terrain_rng.uniform(0.7, 1.0);
    for (std::size_t i = 0; i < p; ++i) {
      double v = mix * base[i] + (1.0 - mix) * detail[i];
      x0[ch * p + i] = 0.05 + 0.5 * gain * v;
    }
  }

  // Cloud opacity: smooth field thresholded so that exactly
  // round(coverage * H * W) pixels end up with opacity > 0.5.
  Tensor m({h, w});
  if (params.cloud_coverage_target > 0.0) {
    Tensor field = smooth_noise(cloud_rng, h, w, 3);
    double peak = cloud_rng.uniform(params.cloud_opacity_min, params.cloud_opacity_max);
    std::vector<double> sorted(field.data(), field.data() + field.size());
    std::sort(sorted.begin(), sorted.end());
    // Exactly k = round(coverage * pixels) values must exceed the cutoff, so
    // place it between the two adjacent order statistics.
    auto k = static_cast<std::size_t>(
        std::llround(params.cloud_coverage_target * static_cast<double>(p)));
    k = std::min(k, p);
    const std::size_t idx = p - k;
    double cutoff;
    if (idx == 0) {
      cutoff = sorted.front() - 1.0;
    } else if (idx == p) {
      cutoff = sorted.back() + 1.0;
    } else {
      cutoff = 0.5 * (sorted[idx - 1] + sorted[idx]);
    }
    const double width = 0.06;
    double half = 0.5 / peak;
    double bias = std::log(half / (1.0 - half));  // logit so m*peak crosses 0.5 at the cutoff
    for (std::size_t i = 0; i < p; ++i) {
      double raw = 1.0 / (1.0 + std::exp(-((field[i] - cutoff) / width + bias)));
      m[i] = raw * peak;
    }
  }

  // Cloudy image: blur the terrain under the cloud, then composite a bright
  // cloud texture on top. All blends are convex, so values stay in [0,1].
  Tensor cloud_tex = smooth_noise(cloud_rng, h, w, 2);
  Tensor x0_blur = box_blur3(x0);
  Tensor y({c, h, w});
  for (int ch = 0; ch < c; ++ch) {
    double tint = 0.88 + 0.04 * cloud_rng.uniform();
    for (std::size_t i = 0; i < p; ++i) {
      double mm = m[i];
      double under = (1.0 - 0.5 * mm) * x0[ch * p + i] + 0.5 * mm * x0_blur[ch * p + i];
      double cc = std::min(1.0, tint + 0.08 * cloud_tex[i]);
      y[ch * p + i] = (1.0 - mm) * under + mm * cc;
    }
  }

  // SAR: structural signal from the terrain only. Channel 0 is an edge map
  // of the band mean, channel 1 the inverted smoothed height, both with
  // multiplicative speckle.
  Tensor gmean({1, h, w});
  for (std::size_t i = 0; i < p; ++i) {
    double acc = 0.0;
    for (int ch = 0; ch < c; ++ch) acc += x0[ch * p + i];
    gmean[i] = acc / c;
  }
  Tensor z({2, h, w});
  double max_edge = 1e-12;
  for (int yy = 0; yy < h; ++yy) {
    for (int xx = 0; xx < w; ++xx) {
      auto g = [&](int sy, int sx) {
        sy = std::clamp(sy, 0, h - 1);
        sx = std::clamp(sx, 0, w - 1);
        return gmean[static_cast<std::size_t>(sy) * w + sx];
      };
      double gx = (g(yy - 1, xx + 1) + 2 * g(yy, xx + 1) + g(yy + 1, xx + 1)) -
                  (g(yy - 1, xx - 1) + 2 * g(yy, xx - 1) + g(yy + 1, xx - 1));
      double gy = (g(yy + 1, xx - 1) + 2 * g(yy + 1, xx) + g(yy + 1, xx + 1)) -
                  (g(yy - 1, xx - 1) + 2 * g(yy - 1, xx) + g(yy - 1, xx + 1));
      double mag = std::sqrt(gx * gx + gy * gy);
      z.at(0, yy, xx) = mag;
      max_edge = std::max(max_edge, mag);
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    z[i] /= max_edge;
    z[p + i] = 1.0 - gmean[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    double speckle = 1.0 + params.sar_noise_level * sar_rng.normal();
    z[i] = std::clamp(z[i] * speckle, 0.0, 1.0);
  }

  SyntheticScene scene;
  scene.triplet.x0 = std::move(x0);
  scene.triplet.y = params.cloud_coverage_target > 0.0 ? std::move(y) : scene.triplet.x0;
  scene.triplet.z = std::move(z);
  scene.triplet.cloud_fraction = cloud_mask_from_opacity(m).fraction;
  scene.opacity = std::move(m);
  return scene;
}

ImageTriplet generate_triplet(const SyntheticSceneParams& params) {
  return generate_scene(params).triplet;
}

CloudMask cloud_mask(const Tensor& y, double threshold, const std::vector<int>& visible_bands) {
  if (y.ndim() != 3) throw std::invalid_argument("cloud_mask: expected [C,H,W]");
  const int c = y.dim(0), h = y.dim(1), w = y.dim(2);
  std::vector<int> bands;
  for (int b : visible_bands) {
    if (b >= 0 && b < c) bands.push_back(b);
  }
  if (bands.empty()) {
    bands.resize(static_cast<std::size_t>(c));
    std::iota(bands.begin(), bands.end(), 0);
  }
  const std::size_t p = static_cast<std::size_t>(h) * w;
  CloudMask out;
  out.mask = Tensor({h, w});
  std::size_t count = 0;
  for (std::size_t i = 0; i < p; ++i) {
    double acc = 0.0;
    for (int b : bands) acc += y[static_cast<std::size_t>(b) * p + i];
    bool cloud = acc / static_cast<double>(bands.size()) > threshold;
    out.mask[i] = cloud ? 1.0 : 0.0;
    count += cloud ? 1 : 0;
  }
  out.fraction = static_cast<double>(count) / static_cast<double>(p);
  return out;
}

CloudMask cloud_mask_from_opacity(const Tensor& opacity) {
  CloudMask out;
  out.mask = Tensor(opacity.shape());
  std::size_t count = 0;
  for (std::size_t i = 0; i < opacity.size(); ++i) {
    bool cloud = opacity[i] > 0.5;
    out.mask[i] = cloud ? 1.0 : 0.0;
    count += cloud ? 1 : 0;
  }
  out.fraction = static_cast<double>(count) / static_cast<double>(opacity.size());
  return out;
}

}  // namespace dbcr
