#pragma once

#include <cstdint>
#include <random>

#include "core/tensor.hpp"

namespace dbcr {

// Mixes a root seed with a stream tag so per-scene / per-purpose generators
// are decorrelated but fully reproducible.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  Tensor normal_tensor(std::vector<int> shape, double mean = 0.0, double stddev = 1.0) {
    Tensor t(std::move(shape));
    std::normal_distribution<double> dist(mean, stddev);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(gen_);
    return t;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace dbcr
