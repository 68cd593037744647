#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nn/adam.hpp"
#include "nn/backbone.hpp"

namespace dbcr {

struct CheckpointMeta {
  nn::BackboneConfig backbone;
  int schedule_T = 1000;
  std::string schedule_kind = "sine";
  std::optional<double> sde_beta_max;
  long long step = 0;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Single-file checkpoint: a text header (format line + JSON metadata with a
// named tensor index), a BINARY marker, then the raw float64 parameter blob in
// collection order, optionally followed by optimizer moments.
void save_checkpoint(const std::filesystem::path& file, nn::Backbone& model,
                     const CheckpointMeta& meta, const nn::Adam* optimizer = nullptr);

// Restores parameters into a model built from the stored backbone config.
// When `expect_config_hash` is nonempty it must match the stored hash.
CheckpointMeta load_checkpoint(const std::filesystem::path& file, nn::Backbone& model,
                               nn::Adam* optimizer = nullptr,
                               const std::string& expect_config_hash = "");

// Reads only the metadata header (cheap; no parameter blob).
CheckpointMeta peek_checkpoint(const std::filesystem::path& file);

}  // namespace dbcr
