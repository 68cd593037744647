#include "data/preprocess.hpp"

#include <algorithm>

namespace dbcr {

namespace {

bool all_in_unit_range(const Tensor& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.0 || t[i] > 1.0) return false;
  }
  return true;
}

}  // namespace

Tensor preprocess_s2(const Tensor& raw) {
  // Already-normalized inputs pass through unchanged, making the transform
  // idempotent.
  if (all_in_unit_range(raw)) return raw;
  Tensor out(raw.shape());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = std::clamp(raw[i], 0.0, 10000.0) / 10000.0;
  }
  return out;
}

Tensor preprocess_s1(const Tensor& raw_vv, const Tensor& raw_vh) {
  require_same_shape(raw_vv, raw_vh, "preprocess_s1");
  if (raw_vv.ndim() != 2) {
    throw std::invalid_argument("preprocess_s1: bands must be [H,W], got " + raw_vv.shape_str());
  }
  const int h = raw_vv.dim(0), w = raw_vv.dim(1);
  Tensor out({2, h, w});
  const bool vv_done = all_in_unit_range(raw_vv);
  const bool vh_done = all_in_unit_range(raw_vh);
  const std::size_t p = static_cast<std::size_t>(h) * w;
  for (std::size_t i = 0; i < p; ++i) {
    out[i] = vv_done ? raw_vv[i] : (std::clamp(raw_vv[i], -25.0, 0.0) + 25.0) / 25.0;
    out[p + i] = vh_done ? raw_vh[i] : (std::clamp(raw_vh[i], -32.5, 0.0) + 32.5) / 32.5;
  }
  return out;
}

}  // namespace dbcr
