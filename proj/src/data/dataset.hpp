#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "data/synthetic.hpp"

namespace dbcr {

struct DatasetEntry {
  std::string scene_id;
  std::string split;  // "train" | "val" | "test"
  double cloud_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct DataGenConfig {
  int count_train = 256;
  int count_val = 32;
  int count_test = 32;
  int height = 64;
  int width = 64;
  int opt_channels = 13;
  int terrain_octaves = 4;
  double coverage_min = 0.05;
  double coverage_max = 0.95;
  double opacity_min = 0.7;
  double opacity_max = 1.0;
  double sar_noise = 0.15;
  std::uint64_t seed = 1234;
};

// Scene directory layout: <root>/scenes/<id>/{x0.bin,y.bin,z.bin,meta.txt}.
// Binary tensors are raw little-endian float32.
void save_triplet(const std::filesystem::path& scene_dir, const ImageTriplet& t,
                  std::uint64_t seed);
ImageTriplet load_triplet(const std::filesystem::path& scene_dir);

// Raw tensor files (float32 with a small text sidecar is not needed here;
// shape travels in meta.txt / the caller).
void write_tensor_f32(const std::filesystem::path& file, const Tensor& t);
Tensor read_tensor_f32(const std::filesystem::path& file, const std::vector<int>& shape);
void write_tensor_f64(const std::filesystem::path& file, const Tensor& t);
Tensor read_tensor_f64(const std::filesystem::path& file, const std::vector<int>& shape);

void write_manifest(const std::filesystem::path& root, const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> read_manifest(const std::filesystem::path& root);

// Seeded shuffle then partition; ratios must sum to 1.
std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n, double train, double val,
                                                      double test, std::uint64_t seed);

// Generates count_train+count_val+count_test scenes under root and writes the
// manifest. Per-scene coverage targets are drawn uniformly from the config
// range so the cloud-cover strata are all populated.
std::vector<DatasetEntry> generate_dataset(const DataGenConfig& cfg,
                                           const std::filesystem::path& root);

std::vector<DatasetEntry> entries_for_split(const std::vector<DatasetEntry>& all,
                                            const std::string& split);

}  // namespace dbcr
