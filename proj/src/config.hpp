#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "data/dataset.hpp"
#include "nn/backbone.hpp"

namespace dbcr {

struct TrainConfig {
  int epochs = 14;
  int batch_size = 4;
  double learning_rate = 1e-3;
  int T = 1000;
  std::string optimizer = "adam";
  std::uint64_t seed = 42;
  std::optional<double> sde_beta_max;  // set => SDE-mode training
  int checkpoint_every = 1;            // epochs between periodic checkpoints

  void validate() const;
};

struct InferenceConfig {
  int nfe = 1;
  std::string mode = "ode";
  std::uint64_t seed = 0;  // used only in sde mode

  void validate() const;
};

struct EvalConfig {
  std::vector<int> rgb_bands = {3, 2, 1};
  bool ssim_rgb_only = false;
  double cloud_threshold = 0.6;

  void validate() const;
};

struct RunConfig {
  DataGenConfig data;
  nn::BackboneConfig backbone = nn::BackboneConfig::desk();
  TrainConfig train;
  InferenceConfig inference;
  EvalConfig eval;

  void validate() const;

  // Strict parse: unknown keys anywhere are rejected.
  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text() const;

  // Applies a single "section.key" override with a JSON-encoded value.
  void set(const std::string& dotted_key, const std::string& json_value);

  // FNV-1a hash of the canonical JSON, as 16 hex digits.
  std::string hash() const;
};

std::string default_data_root();  // $DBCR_DATA_ROOT or "./data"

std::string fnv1a_hex(const std::string& text);

}  // namespace dbcr
