#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace dbcr {

// Mixing coefficients of the bridge process over T discrete timesteps.
// alpha[0] == 0, alpha[T] == 1, strictly increasing. beta is the optional
// stochastic-perturbation scale; empty means the deterministic (ODE) bridge.
struct Schedule {
  int T = 0;
  std::vector<double> alpha;  // size T+1
  std::vector<double> beta;   // size T+1 when present, empty otherwise

  bool has_beta() const { return !beta.empty(); }
};

struct BridgeState {
  Tensor x;
  int t = 0;
};

// Descending timesteps visited during inference: [T, T-s, ..., s, 0].
struct TimestepPlan {
  std::vector<int> steps;
  int s = 0;
};

// alpha[t] = sin^2(pi t / 2T); beta[t] = beta_max sin(pi t / T) when requested.
Schedule make_schedule(int T, const std::string& kind = "sine",
                       std::optional<double> sde_beta_max = std::nullopt);

// x_t = (1 - alpha[t]) x0 + alpha[t] y
BridgeState forward_mix(const Tensor& x0, const Tensor& y, int t, const Schedule& sched);

// x_t = (1 - alpha[t]) x0 + alpha[t] y + beta[t] noise
BridgeState forward_mix_sde(const Tensor& x0, const Tensor& y, int t, const Schedule& sched,
                            const Tensor& noise);

// x_{t-s} = (1 - alpha[t-s]/alpha[t]) x0_hat + (alpha[t-s]/alpha[t]) x_t
Tensor reverse_step(const Tensor& x0_hat, const Tensor& x_t, int t, int s,
                    const Schedule& sched);

// Adds (beta[t] alpha[t-s]/alpha[t] - beta[t-s]) noise to the deterministic step.
Tensor reverse_step_sde(const Tensor& x0_hat, const Tensor& x_t, int t, int s,
                        const Schedule& sched, const Tensor& noise);

// Requires N to divide T exactly; no silent rounding.
TimestepPlan plan_timesteps(int T, int N);

}  // namespace dbcr
