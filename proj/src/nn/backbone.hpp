#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "nn/nafblock.hpp"
#include "nn/sfblock.hpp"

namespace dbcr {
namespace nn {

struct BackboneConfig {
  int opt_channels_in = 13;
  int sar_channels_in = 2;
  std::vector<int> widths = {22, 44, 88, 176};
  std::vector<int> enc_blocks = {1, 1, 1, 28};
  std::vector<int> dec_blocks = {1, 1, 1, 1};
  std::vector<int> fusion_heads = {1, 1, 2, 4};
  int time_embed_dim = 176;

  int levels() const { return static_cast<int>(widths.size()); }
  void validate() const;

  // Full-scale configuration used for the reported parameter budget.
  static BackboneConfig full();
  // Small configuration sized for CPU-scale training on 64x64 scenes.
  static BackboneConfig desk();

  bool operator==(const BackboneConfig&) const = default;
};

// Two-branch restoration network: a NAFBlock U-Net over the optical input,
// a NAFBlock encoder over SAR, with SFBlock fusion at every encoder level
// and a global residual from the input to the output.
class Backbone {
 public:
  explicit Backbone(const BackboneConfig& cfg);

  // Predicts the clean image from (x_t, t, z).
  Tensor forward(const Tensor& x_t, int t, const Tensor& z);
  // Backprop of the last forward; returns grad w.r.t. x_t.
  Tensor backward(const Tensor& gout);

  void collect_params(ParamList& out);
  const ParamList& params() { return params_; }
  std::size_t param_count();

  void init(std::uint64_t seed);
  void zero_grad();

  const BackboneConfig& config() const { return cfg_; }

 private:
  BackboneConfig cfg_;
  TimeEmbedding temb_;
  Conv1x1 intro_opt_, intro_sar_;
  std::vector<std::vector<std::unique_ptr<NafBlock>>> enc_opt_, enc_sar_, dec_;
  std::vector<std::unique_ptr<SfBlock>> fusion_;
  std::vector<std::unique_ptr<ConvDown2x2>> down_opt_, down_sar_;
  std::vector<std::unique_ptr<PixelShuffleUp>> up_;
  std::vector<std::unique_ptr<Conv1x1>> up_fix_;  // only when widths do not halve
  std::vector<std::unique_ptr<Conv1x1>> skip_;
  Conv1x1 head_;

  ParamList params_;
  Tensor temb_cache_;
};

}  // namespace nn
}  // namespace dbcr
