#include "infer/sampler.hpp"

#include <stdexcept>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace dbcr {

InferenceResult run_inference_fn(const Predictor& predict, const Tensor& y, const Schedule& sched,
                                 int nfe, const std::string& mode, std::uint64_t seed,
                                 bool keep_trace) {
  const bool stochastic = mode == "sde";
  if (!stochastic && mode != "ode") {
    throw ConfigError("inference mode must be 'ode' or 'sde', got '" + mode + "'");
  }
  if (stochastic && !sched.has_beta()) {
    throw ConfigError("sde inference requires a schedule with a noise scale");
  }
  TimestepPlan plan = plan_timesteps(sched.T, nfe);

  Rng rng(mix_seed(seed, 0x5DE));
  InferenceResult result;
  Tensor x = y;
  Tensor x0_hat;
  for (std::size_t i = 0; i + 1 < plan.steps.size(); ++i) {
    const int t = plan.steps[i];
    x0_hat = predict(x, t);
    ++result.network_calls;
    if (!x0_hat.all_finite()) {
      throw NumericError("non-finite prediction at timestep " + std::to_string(t));
    }
    if (stochastic) {
      Tensor noise = rng.normal_tensor(x.shape());
      x = reverse_step_sde(x0_hat, x, t, plan.s, sched, noise);
    } else {
      x = reverse_step(x0_hat, x, t, plan.s, sched);
    }
    if (keep_trace) result.trace.push_back(x);
  }
  result.restored = std::move(x0_hat);
  if (keep_trace) result.trace.push_back(result.restored);
  return result;
}

InferenceResult run_inference(nn::Backbone& model, const Tensor& y, const Tensor& z,
                              const Schedule& sched, int nfe, const std::string& mode,
                              std::uint64_t seed, bool keep_trace) {
  Predictor predict = [&model, &z](const Tensor& x_t, int t) { return model.forward(x_t, t, z); };
  return run_inference_fn(predict, y, sched, nfe, mode, seed, keep_trace);
}

std::vector<InferenceResult> batch_inference(nn::Backbone& model, const std::vector<Tensor>& ys,
                                             const std::vector<Tensor>& zs, const Schedule& sched,
                                             int nfe, const std::string& mode,
                                             std::uint64_t seed) {
  if (ys.size() != zs.size()) {
    throw std::invalid_argument("batch_inference: optical/SAR count mismatch");
  }
  std::vector<InferenceResult> out;
  out.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    try {
      out.push_back(run_inference(model, ys[i], zs[i], sched, nfe, mode, mix_seed(seed, i)));
    } catch (const NumericError& e) {
      throw NumericError("item " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dbcr
