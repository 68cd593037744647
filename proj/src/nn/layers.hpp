#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace dbcr {
namespace nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(shape) {}
};

using ParamList = std::vector<Param*>;

// Variance-scaling normal init, std = sqrt(1/fan_in).
void vs_init(Tensor& w, int fan_in, Rng& rng);

// Pointwise (1x1) convolution: [cin,H,W] -> [cout,H,W].
class Conv1x1 {
 public:
  Conv1x1(std::string name, int cin, int cout, bool bias = true);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(ParamList& out);
  void init(Rng& rng);
  void zero_weights();

  int cin() const { return cin_; }
  int cout() const { return cout_; }

 private:
  int cin_, cout_;
  bool has_bias_;
  Param w_, b_;
  Tensor x_cache_;
};

// Depthwise 3x3 convolution, zero padding, stride 1.
class DwConv3x3 {
 public:
  DwConv3x3(std::string name, int channels);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(ParamList& out);
  void init(Rng& rng);

 private:
  int c_;
  Param w_, b_;
  Tensor x_cache_;
};

// 2x2 stride-2 convolution: halves spatial dims, cin -> cout.
class ConvDown2x2 {
 public:
  ConvDown2x2(std::string name, int cin, int cout);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(ParamList& out);
  void init(Rng& rng);

 private:
  int cin_, cout_;
  Param w_, b_;
  Tensor x_cache_;
};

// 1x1 conv c -> 2c (no bias) followed by 2x pixel shuffle: [c,H,W] -> [c/2,2H,2W].
class PixelShuffleUp {
 public:
  PixelShuffleUp(std::string name, int cin);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(ParamList& out);
  void init(Rng& rng);

 private:
  Conv1x1 conv_;
  int cin_;
};

// Layer normalization over the channel dimension at each spatial location,
// with per-channel affine parameters.
class ChannelLayerNorm {
 public:
  ChannelLayerNorm(std::string name, int channels);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(ParamList& out);

 private:
  int c_;
  Param gamma_, beta_;
  Tensor xhat_cache_;
  std::vector<double> inv_sigma_;
};

// Channel split followed by elementwise product: [2k,H,W] -> [k,H,W].
class SimpleGate {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);

 private:
  Tensor x_cache_;
};

// Fully connected layer on flat vectors.
class Linear {
 public:
  Linear(std::string name, int in, int out, bool bias = true);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);
  void collect_params(ParamList& out);
  void init(Rng& rng);
  void zero_weights();

 private:
  int in_, out_;
  bool has_bias_;
  Param w_, b_;
  Tensor x_cache_;
};

// Elementwise activations with cached inputs.
class Silu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);

 private:
  Tensor x_cache_;
};

class Gelu {
 public:
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& gy);

 private:
  Tensor x_cache_;
};

}  // namespace nn
}  // namespace dbcr
