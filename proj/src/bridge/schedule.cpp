#include "bridge/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "core/errors.hpp"

namespace dbcr {

namespace {

void check_t_range(int t, const Schedule& sched, const char* where) {
  if (t < 0 || t > sched.T) {
    throw std::invalid_argument(std::string(where) + ": timestep " + std::to_string(t) +
                                " outside [0, " + std::to_string(sched.T) + "]");
  }
}

}  // namespace

Schedule make_schedule(int T, const std::string& kind, std::optional<double> sde_beta_max) {
  if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
  if (kind != "sine") throw std::invalid_argument("make_schedule: unknown kind '" + kind + "'");
  if (sde_beta_max && *sde_beta_max < 0.0) {
    throw std::invalid_argument("make_schedule: sde_beta_max must be >= 0");
  }

  Schedule sched;
  sched.T = T;
  sched.alpha.resize(static_cast<std::size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    double s = std::sin(std::numbers::pi * t / (2.0 * T));
    sched.alpha[static_cast<std::size_t>(t)] = s * s;
  }
  sched.alpha.front() = 0.0;  // exact endpoints
  sched.alpha.back() = 1.0;

  if (sde_beta_max) {
    sched.beta.resize(static_cast<std::size_t>(T) + 1);
    for (int t = 0; t <= T; ++t) {
      sched.beta[static_cast<std::size_t>(t)] =
          *sde_beta_max * std::sin(std::numbers::pi * t / static_cast<double>(T));
    }
    sched.beta.front() = 0.0;
    sched.beta.back() = 0.0;
  }
  return sched;
}

BridgeState forward_mix(const Tensor& x0, const Tensor& y, int t, const Schedule& sched) {
  require_same_shape(x0, y, "forward_mix");
  check_t_range(t, sched, "forward_mix");
  if (t == 0) return {x0, 0};
  if (t == sched.T) return {y, sched.T};
  double a = sched.alpha[static_cast<std::size_t>(t)];
  return {lerp(x0, y, 1.0 - a, a), t};
}

BridgeState forward_mix_sde(const Tensor& x0, const Tensor& y, int t, const Schedule& sched,
                            const Tensor& noise) {
  if (!sched.has_beta()) {
    throw std::logic_error("forward_mix_sde: schedule has no beta (SDE) component");
  }
  require_same_shape(x0, noise, "forward_mix_sde");
  BridgeState st = forward_mix(x0, y, t, sched);
  double b = sched.beta[static_cast<std::size_t>(t)];
  if (b != 0.0) {
    for (std::size_t i = 0; i < st.x.size(); ++i) st.x[i] += b * noise[i];
  }
  return st;
}

Tensor reverse_step(const Tensor& x0_hat, const Tensor& x_t, int t, int s,
                    const Schedule& sched) {
  require_same_shape(x0_hat, x_t, "reverse_step");
  check_t_range(t, sched, "reverse_step");
  if (s <= 0 || s > t) {
    throw std::invalid_argument("reverse_step: step size " + std::to_string(s) +
                                " invalid for t=" + std::to_string(t));
  }
  double at = sched.alpha[static_cast<std::size_t>(t)];
  if (at == 0.0) throw std::invalid_argument("reverse_step: alpha[t] == 0");
  double r = sched.alpha[static_cast<std::size_t>(t - s)] / at;
  return lerp(x0_hat, x_t, 1.0 - r, r);
}

Tensor reverse_step_sde(const Tensor& x0_hat, const Tensor& x_t, int t, int s,
                        const Schedule& sched, const Tensor& noise) {
  if (!sched.has_beta()) {
    throw std::logic_error("reverse_step_sde: schedule has no beta (SDE) component");
  }
  require_same_shape(x0_hat, noise, "reverse_step_sde");
  Tensor out = reverse_step(x0_hat, x_t, t, s, sched);
  double at = sched.alpha[static_cast<std::size_t>(t)];
  double r = sched.alpha[static_cast<std::size_t>(t - s)] / at;
  double coef = sched.beta[static_cast<std::size_t>(t)] * r -
                sched.beta[static_cast<std::size_t>(t - s)];
  if (coef != 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += coef * noise[i];
  }
  return out;
}

TimestepPlan plan_timesteps(int T, int N) {
  if (N < 1 || N > T) throw std::invalid_argument("plan_timesteps: need 1 <= N <= T");
  if (T % N != 0) {
    throw std::invalid_argument("plan_timesteps: N=" + std::to_string(N) +
                                " does not divide T=" + std::to_string(T));
  }
  TimestepPlan plan;
  plan.s = T / N;
  for (int t = T; t >= 0; t -= plan.s) plan.steps.push_back(t);
  return plan;
}

}  // namespace dbcr
