#pragma once

#include "nn/layers.hpp"

namespace dbcr {
namespace nn {

// Sinusoidal embedding of the integer timestep followed by a two-layer MLP.
class TimeEmbedding {
 public:
  TimeEmbedding(std::string name, int dim);

  // Raw sinusoidal part: first dim/2 sines, then dim/2 cosines.
  static Tensor sinusoidal(int t, int dim);

  Tensor forward(int t);
  void backward(const Tensor& g);
  void collect_params(ParamList& out);
  void init(Rng& rng);

  int dim() const { return dim_; }

 private:
  int dim_;
  Linear l1_, l2_;
  Silu act_;
};

// Nonlinear-activation-free block: LN -> (time scale/shift) -> MBConv residual,
// then LN -> FFN residual. SimpleGate replaces activations throughout; a
// simplified channel attention (global pool + 1x1 conv) sits inside MBConv.
class NafBlock {
 public:
  NafBlock(std::string name, int channels, int time_dim);

  Tensor forward(const Tensor& x, const Tensor& temb);
  // Returns grad w.r.t. x; accumulates grad w.r.t. temb into gtemb.
  Tensor backward(const Tensor& gy, Tensor& gtemb);

  void collect_params(ParamList& out);
  void init(Rng& rng);

  int channels() const { return c_; }

 private:
  int c_;
  ChannelLayerNorm ln1_, ln2_;
  Linear tmod_;  // time_dim -> 2c (scale, shift)
  Conv1x1 conv1_;
  DwConv3x3 dw_;
  Conv1x1 sca_;
  Conv1x1 conv3_;
  Conv1x1 conv4_;
  Conv1x1 conv5_;
  SimpleGate sg1_, sg2_;
  Param res_a_, res_b_;  // per-channel residual scales, zero-init

  // forward caches
  Tensor h0_, scale_, h4_, m_, h6_, y1_, g3_;
};

}  // namespace nn
}  // namespace dbcr
