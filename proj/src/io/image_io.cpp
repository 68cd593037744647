#include "io/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "core/errors.hpp"

namespace dbcr {

namespace {

unsigned char to_byte(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(v * 255.0));
}

std::vector<int> effective_bands(const Tensor& image, const std::vector<int>& rgb_bands) {
  if (image.ndim() != 3) throw std::invalid_argument("write_ppm: expected [C,H,W]");
  const int c = image.dim(0);
  std::vector<int> bands = rgb_bands;
  if (bands.size() != 3) throw std::invalid_argument("write_ppm: need exactly 3 band indices");
  for (int b : bands) {
    if (b < 0 || b >= c) {
      // Narrow images (for example SAR or grayscale) fall back to band 0.
      bands = {std::min(2, c - 1), std::min(1, c - 1), 0};
      break;
    }
  }
  return bands;
}

void emit(std::ofstream& out, const Tensor& image, const std::vector<int>& bands, int y, int x) {
  for (int k = 0; k < 3; ++k) out.put(static_cast<char>(to_byte(image.at(bands[k], y, x))));
}

}  // namespace

void write_ppm(const std::filesystem::path& file, const Tensor& image,
               const std::vector<int>& rgb_bands, const std::string& tag) {
  write_ppm_grid(file, {image}, rgb_bands, tag);
}

void write_ppm_grid(const std::filesystem::path& file, const std::vector<Tensor>& panels,
                    const std::vector<int>& rgb_bands, const std::string& tag) {
  if (panels.empty()) throw std::invalid_argument("write_ppm_grid: no panels");
  for (const Tensor& p : panels) require_same_shape(panels.front(), p, "write_ppm_grid");
  const auto bands = effective_bands(panels.front(), rgb_bands);
  const int h = panels.front().dim(1);
  const int w = panels.front().dim(2);
  const int gutter = panels.size() > 1 ? 2 : 0;
  const int total_w =
      static_cast<int>(panels.size()) * w + (static_cast<int>(panels.size()) - 1) * gutter;

  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + file.string());
  out << "P6\n";
  if (!tag.empty()) out << "# " << tag << "\n";
  out << total_w << " " << h << "\n255\n";
  for (int y = 0; y < h; ++y) {
    for (std::size_t p = 0; p < panels.size(); ++p) {
      if (p > 0) {
        for (int g = 0; g < gutter; ++g) {
          out.put(static_cast<char>(255));
          out.put(static_cast<char>(255));
          out.put(static_cast<char>(255));
        }
      }
      for (int x = 0; x < w; ++x) emit(out, panels[p], bands, y, x);
    }
  }
  if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace dbcr
