#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "nn/layers.hpp"

namespace testutil {

inline dbcr::Tensor random_tensor(std::vector<int> shape, std::uint64_t seed, double lo = 0.0,
                                  double hi = 1.0) {
  dbcr::Tensor t(std::move(shape));
  dbcr::Rng rng(seed);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

inline double weighted_sum(const dbcr::Tensor& x, const dbcr::Tensor& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * w[i];
  return acc;
}

inline double max_abs_diff(const dbcr::Tensor& a, const dbcr::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Relative error with an absolute floor so near-zero gradients do not blow up
// the ratio.
inline double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

struct GradCheckStats {
  double max_rel_err = 0.0;
  int checked = 0;
};

// Central finite differences over up to `max_probes` entries of each
// parameter, compared against the accumulated analytic gradient. `loss` must
// re-run the forward pass and return the scalar objective.
template <typename LossFn>
GradCheckStats fd_check_params(const dbcr::nn::ParamList& params, LossFn&& loss,
                               double eps = 1e-5, int max_probes = 4,
                               std::uint64_t seed = 99) {
  dbcr::Rng rng(seed);
  GradCheckStats stats;
  for (dbcr::nn::Param* p : params) {
    const int probes =
        std::min<std::size_t>(static_cast<std::size_t>(max_probes), p->value.size());
    for (int k = 0; k < probes; ++k) {
      const std::size_t idx =
          static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(p->value.size()) - 1));
      const double orig = p->value[idx];
      p->value[idx] = orig + eps;
      const double lp = loss();
      p->value[idx] = orig - eps;
      const double lm = loss();
      p->value[idx] = orig;
      const double numeric = (lp - lm) / (2.0 * eps);
      stats.max_rel_err = std::max(stats.max_rel_err, rel_err(p->grad[idx], numeric));
      ++stats.checked;
    }
  }
  return stats;
}

}  // namespace testutil
