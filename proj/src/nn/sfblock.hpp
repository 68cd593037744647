#pragma once

#include <memory>
#include <vector>

#include "nn/layers.hpp"

namespace dbcr {
namespace nn {

// Cross-modal fusion: optical features query SAR keys/values through
// channel-wise attention (scores are (c/heads) x (c/heads)), followed by a
// per-head residual MLP, head concatenation, and a final 1x1 projection.
class SfBlock {
 public:
  SfBlock(std::string name, int channels, int heads);

  Tensor forward(const Tensor& opt, const Tensor& sar);
  // Returns grad w.r.t. opt; writes grad w.r.t. sar.
  Tensor backward(const Tensor& gy, Tensor& gsar);

  void collect_params(ParamList& out);
  void init(Rng& rng);

  int channels() const { return c_; }
  int heads() const { return heads_; }

  // Column-normalized softmax attention weights of the last forward pass,
  // one (c/heads)^2 matrix per head. Exposed for verification.
  const std::vector<Tensor>& last_attention() const { return attn_; }

 private:
  int c_, heads_, ch_;  // ch_ = channels per head
  ChannelLayerNorm ln_opt_, ln_sar_;
  Conv1x1 q_, k_, v_;
  std::vector<std::unique_ptr<Conv1x1>> mlp1_, mlp2_;  // per-head, applied per pixel
  std::vector<Gelu> mlp_act_;
  Conv1x1 proj_;

  // caches
  Tensor qv_, kv_, vv_;       // projected Q/K/V, full channel maps
  std::vector<Tensor> attn_;  // per-head [ch, ch] weights (A[i][j], columns sum to 1)
};

}  // namespace nn
}  // namespace dbcr
