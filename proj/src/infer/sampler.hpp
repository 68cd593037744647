#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bridge/schedule.hpp"
#include "nn/backbone.hpp"

namespace dbcr {

struct InferenceResult {
  Tensor restored;            // final clean-image prediction
  int network_calls = 0;      // equals the requested step count
  std::vector<Tensor> trace;  // when requested: x after each step, then restored
};

// Clean-image predictor evaluated at (x_t, t); the SAR conditioning is bound
// by the caller. Exposed so the sampler can be tested against closed-form
// predictors independent of the network.
using Predictor = std::function<Tensor(const Tensor& x_t, int t)>;

// Multi-step bridge reversal: start from the cloudy image, predict the clean
// image at each planned timestep, and re-mix towards t=0. Returns the last
// prediction. `mode` is "ode" or "sde"; the stochastic mode requires the
// schedule to carry beta and uses `seed` for its noise stream.
InferenceResult run_inference_fn(const Predictor& predict, const Tensor& y, const Schedule& sched,
                                 int nfe, const std::string& mode = "ode", std::uint64_t seed = 0,
                                 bool keep_trace = false);

InferenceResult run_inference(nn::Backbone& model, const Tensor& y, const Tensor& z,
                              const Schedule& sched, int nfe, const std::string& mode = "ode",
                              std::uint64_t seed = 0, bool keep_trace = false);

// Sequential batch; output order matches input order, failures carry the
// item index in their message.
std::vector<InferenceResult> batch_inference(nn::Backbone& model, const std::vector<Tensor>& ys,
                                             const std::vector<Tensor>& zs, const Schedule& sched,
                                             int nfe, const std::string& mode = "ode",
                                             std::uint64_t seed = 0);

}  // namespace dbcr
