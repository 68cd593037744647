#pragma once

#include <vector>

#include "nn/layers.hpp"

namespace dbcr {
namespace nn {

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(ParamList params, AdamConfig cfg);

  void step();
  void zero_grad();

  long long step_count() const { return step_; }

  // Flat moment vectors in parameter order, for checkpointing.
  std::vector<double> serialize_state() const;
  void restore_state(const std::vector<double>& state, long long step_count);

 private:
  ParamList params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  long long step_ = 0;
};

}  // namespace nn
}  // namespace dbcr
