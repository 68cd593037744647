#include "nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dbcr {
namespace nn {

Adam::Adam(ParamList params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Param* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Param& p = *params_[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->grad.zero();
}

std::vector<double> Adam::serialize_state() const {
  std::vector<double> out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    out.insert(out.end(), m_[k].data(), m_[k].data() + m_[k].size());
    out.insert(out.end(), v_[k].data(), v_[k].data() + v_[k].size());
  }
  return out;
}

void Adam::restore_state(const std::vector<double>& state, long long step_count) {
  std::size_t pos = 0;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const std::size_t n = m_[k].size();
    if (pos + 2 * n > state.size()) {
      throw std::invalid_argument("Adam::restore_state: state vector too short");
    }
    std::copy(state.begin() + pos, state.begin() + pos + n, m_[k].data());
    pos += n;
    std::copy(state.begin() + pos, state.begin() + pos + n, v_[k].data());
    pos += n;
  }
  if (pos != state.size()) {
    throw std::invalid_argument("Adam::restore_state: state vector size mismatch");
  }
  step_ = step_count;
}

}  // namespace nn
}  // namespace dbcr
