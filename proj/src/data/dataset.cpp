#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace dbcr {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifestHeader = "DBCR-DATASET v1";

void write_raw(const fs::path& file, const void* data, std::size_t bytes) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw IoError("write failed: " + file.string());
}

std::vector<char> read_raw(const fs::path& file) {
  std::ifstream in(file, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open for reading: " + file.string());
  std::streamsize n = in.tellg();
  in.seekg(0);
  std::vector<char> buf(static_cast<std::size_t>(n));
  in.read(buf.data(), n);
  if (!in) throw IoError("read failed: " + file.string());
  return buf;
}

std::string shape_line(const Tensor& t) {
  std::ostringstream os;
  os << "shape";
  for (int i = 0; i < t.ndim(); ++i) os << " " << t.dim(i);
  return os.str();
}

}  // namespace

void write_tensor_f32(const fs::path& file, const Tensor& t) {
  std::vector<float> buf(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) buf[i] = static_cast<float>(t[i]);
  write_raw(file, buf.data(), buf.size() * sizeof(float));
}

Tensor read_tensor_f32(const fs::path& file, const std::vector<int>& shape) {
  Tensor t(shape);
  auto buf = read_raw(file);
  if (buf.size() != t.size() * sizeof(float)) {
    throw IoError("size mismatch in " + file.string() + ": expected " +
                  std::to_string(t.size() * sizeof(float)) + " bytes, got " +
                  std::to_string(buf.size()));
  }
  const float* f = reinterpret_cast<const float*>(buf.data());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(f[i]);
  return t;
}

void write_tensor_f64(const fs::path& file, const Tensor& t) {
  write_raw(file, t.data(), t.size() * sizeof(double));
}

Tensor read_tensor_f64(const fs::path& file, const std::vector<int>& shape) {
  Tensor t(shape);
  auto buf = read_raw(file);
  if (buf.size() != t.size() * sizeof(double)) {
    throw IoError("size mismatch in " + file.string());
  }
  std::copy(buf.begin(), buf.end(), reinterpret_cast<char*>(t.data()));
  return t;
}

void save_triplet(const fs::path& scene_dir, const ImageTriplet& t, std::uint64_t seed) {
  std::error_code ec;
  fs::create_directories(scene_dir, ec);
  if (ec) throw IoError("cannot create " + scene_dir.string() + ": " + ec.message());
  write_tensor_f32(scene_dir / "x0.bin", t.x0);
  write_tensor_f32(scene_dir / "y.bin", t.y);
  write_tensor_f32(scene_dir / "z.bin", t.z);
  std::ofstream meta(scene_dir / "meta.txt");
  if (!meta) throw IoError("cannot write meta in " + scene_dir.string());
  meta << "scene_id " << t.scene_id << "\n";
  meta << "optical_" << shape_line(t.x0) << "\n";
  meta << "sar_" << shape_line(t.z) << "\n";
  meta << "dtype float32\n";
  meta << "range 0 1\n";
  meta << "cloud_fraction " << t.cloud_fraction << "\n";
  meta << "seed " << seed << "\n";
}

ImageTriplet load_triplet(const fs::path& scene_dir) {
  std::ifstream meta(scene_dir / "meta.txt");
  if (!meta) throw IoError("missing meta.txt in " + scene_dir.string());
  ImageTriplet t;
  std::vector<int> opt_shape, sar_shape;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream is(line);
    std::string key;
    is >> key;
    if (key == "scene_id") {
      is >> t.scene_id;
    } else if (key == "optical_shape") {
      int v;
      while (is >> v) opt_shape.push_back(v);
    } else if (key == "sar_shape") {
      int v;
      while (is >> v) sar_shape.push_back(v);
    } else if (key == "cloud_fraction") {
      is >> t.cloud_fraction;
    }
  }
  if (opt_shape.size() != 3 || sar_shape.size() != 3) {
    throw IoError("malformed meta.txt in " + scene_dir.string());
  }
  t.x0 = read_tensor_f32(scene_dir / "x0.bin", opt_shape);
  t.y = read_tensor_f32(scene_dir / "y.bin", opt_shape);
  t.z = read_tensor_f32(scene_dir / "z.bin", sar_shape);
  return t;
}

void write_manifest(const fs::path& root, const std::vector<DatasetEntry>& entries) {
  std::ofstream out(root / "manifest.txt");
  if (!out) throw IoError("cannot write manifest under " + root.string());
  out << kManifestHeader << "\n";
  for (const auto& e : entries) {
    std::ostringstream frac;
    frac.precision(6);
    frac << std::fixed << e.cloud_fraction;
    out << e.scene_id << " " << e.split << " " << frac.str() << " " << e.seed << "\n";
  }
}

std::vector<DatasetEntry> read_manifest(const fs::path& root) {
  std::ifstream in(root / "manifest.txt");
  if (!in) throw IoError("missing manifest.txt under " + root.string());
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw IoError("unsupported manifest header in " + root.string() + ": '" + line + "'");
  }
  std::vector<DatasetEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    DatasetEntry e;
    if (!(is >> e.scene_id >> e.split >> e.cloud_fraction >> e.seed)) {
      throw IoError("malformed manifest line: '" + line + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n, double train, double val,
                                                      double test, std::uint64_t seed) {
  if (std::abs(train + val + test - 1.0) > 1e-9 || train < 0 || val < 0 || test < 0) {
    throw std::invalid_argument("split_indices: ratios must be nonnegative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 7));
  std::shuffle(order.begin(), order.end(), rng.engine());
  auto n_train = static_cast<std::size_t>(std::llround(train * static_cast<double>(n)));
  auto n_val = static_cast<std::size_t>(std::llround(val * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  std::array<std::vector<std::size_t>, 3> out;
  out[0].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out[1].assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out[2].assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

std::vector<DatasetEntry> generate_dataset(const DataGenConfig& cfg, const fs::path& root) {
  const int total = cfg.count_train + cfg.count_val + cfg.count_test;
  if (cfg.count_train <= 0 || cfg.count_val < 0 || cfg.count_test < 0 || total <= 0) {
    throw std::invalid_argument("generate_dataset: empty dataset refused");
  }
  std::error_code ec;
  fs::create_directories(root / "scenes", ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());

  Rng cov_rng(mix_seed(cfg.seed, 11));
  std::vector<DatasetEntry> entries;
  for (int i = 0; i < total; ++i) {
    SyntheticSceneParams params;
    params.seed = mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i));
    params.height = cfg.height;
    params.width = cfg.width;
    params.opt_channels = cfg.opt_channels;
    params.terrain_octaves = cfg.terrain_octaves;
    params.cloud_opacity_min = cfg.opacity_min;
    params.cloud_opacity_max = cfg.opacity_max;
    params.cloud_coverage_target = cov_rng.uniform(cfg.coverage_min, cfg.coverage_max);
    params.sar_noise_level = cfg.sar_noise;

    ImageTriplet t = generate_triplet(params);
    std::ostringstream id;
    id << "scene_" << std::setw(5) << std::setfill('0') << i;
    t.scene_id = id.str();

    DatasetEntry e;
    e.scene_id = t.scene_id;
    e.split = i < cfg.count_train ? "train" : (i < cfg.count_train + cfg.count_val ? "val" : "test");
    e.cloud_fraction = t.cloud_fraction;
    e.seed = params.seed;
    save_triplet(root / "scenes" / e.scene_id, t, params.seed);
    entries.push_back(std::move(e));
  }
  write_manifest(root, entries);
  return entries;
}

std::vector<DatasetEntry> entries_for_split(const std::vector<DatasetEntry>& all,
                                            const std::string& split) {
  std::vector<DatasetEntry> out;
  for (const auto& e : all) {
    if (e.split == split) out.push_back(e);
  }
  return out;
}

}  // namespace dbcr
