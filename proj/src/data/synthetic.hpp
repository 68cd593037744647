#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace dbcr {

// Aligned cloud-free optical / cloudy optical / SAR images for one scene.
struct ImageTriplet {
  Tensor x0;  // [C_opt, H, W] in [0,1]
  Tensor y;   // same shape as x0
  Tensor z;   // [C_sar, H, W] in [0,1]
  std::string scene_id;
  double cloud_fraction = 0.0;
};

struct SyntheticSceneParams {
  std::uint64_t seed = 0;
  int height = 64;
  int width = 64;
  int opt_channels = 13;
  int terrain_octaves = 4;
  double cloud_opacity_min = 0.7;
  double cloud_opacity_max = 1.0;
  double cloud_coverage_target = 0.5;
  double sar_noise_level = 0.15;

  void validate() const;  // H, W powers of two >= 16
};

struct SyntheticScene {
  ImageTriplet triplet;
  Tensor opacity;  // [H,W] cloud opacity field used for compositing
};

// Deterministic per seed. The SAR image depends only on the terrain and the
// SAR noise stream, never on the cloud field.
SyntheticScene generate_scene(const SyntheticSceneParams& params);
ImageTriplet generate_triplet(const SyntheticSceneParams& params);

struct CloudMask {
  Tensor mask;  // [H,W], values 0 or 1
  double fraction = 0.0;
};

// Brightness-threshold proxy: a pixel is cloud when the mean over the visible
// bands exceeds the threshold. Band indices default to the Sentinel-2 RGB
// bands and fall back to all bands for narrower images.
CloudMask cloud_mask(const Tensor& y, double threshold = 0.6,
                     const std::vector<int>& visible_bands = {3, 2, 1});

// Ground-truth path for synthetic scenes: mask = (opacity > 0.5).
CloudMask cloud_mask_from_opacity(const Tensor& opacity);

}  // namespace dbcr
