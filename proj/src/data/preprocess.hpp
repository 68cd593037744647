#pragma once

#include "core/tensor.hpp"

namespace dbcr {

// Sentinel-2 optical: clip to [0, 10000], scale to [0, 1]. Total function,
// idempotent on already-scaled data only in the [0,1] subrange; callers
// normalize raw digital numbers exactly once.
Tensor preprocess_s2(const Tensor& raw);

// Sentinel-1 SAR backscatter in dB: VV clipped to [-25, 0], VH to [-32.5, 0],
// each shifted and scaled per channel into [0, 1], stacked as [2,H,W].
Tensor preprocess_s1(const Tensor& raw_vv, const Tensor& raw_vh);

}  // namespace dbcr
