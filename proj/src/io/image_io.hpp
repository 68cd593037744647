#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace dbcr {

// Writes a binary PPM (P6, 8-bit). Bands are picked from the [C,H,W] tensor
// (default Sentinel-2 true-color order red,green,blue = bands 3,2,1); values
// are clamped to [0,1] only at emission. The comment line carries `tag` so a
// rendering can be traced back to the run that produced it.
void write_ppm(const std::filesystem::path& file, const Tensor& image,
               const std::vector<int>& rgb_bands = {3, 2, 1}, const std::string& tag = "");

// Side-by-side panels (same shape) separated by a 2-pixel white gutter.
void write_ppm_grid(const std::filesystem::path& file, const std::vector<Tensor>& panels,
                    const std::vector<int>& rgb_bands = {3, 2, 1}, const std::string& tag = "");

}  // namespace dbcr
