#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bridge/schedule.hpp"
#include "core/rng.hpp"
#include "helpers.hpp"

using dbcr::Schedule;
using dbcr::Tensor;

TEST_CASE("mixing coefficients follow the sine schedule with exact endpoints") {
  const int T = 1000;
  Schedule s = dbcr::make_schedule(T);
  REQUIRE(static_cast<int>(s.alpha.size()) == T + 1);
  CHECK(s.alpha[0] == 0.0);
  CHECK(s.alpha[static_cast<std::size_t>(T)] == 1.0);
  CHECK_FALSE(s.has_beta());
  for (int t = 0; t <= T; ++t) {
    const double phase = std::sin(std::numbers::pi * t / (2.0 * T));
    CHECK(s.alpha[static_cast<std::size_t>(t)] == doctest::Approx(phase * phase).epsilon(1e-12));
    if (t > 0) CHECK(s.alpha[static_cast<std::size_t>(t)] > s.alpha[static_cast<std::size_t>(t - 1)]);
  }
}

TEST_CASE("noise scale vanishes at both endpoints") {
  const int T = 100;
  const double bmax = 0.3;
  Schedule s = dbcr::make_schedule(T, "sine", bmax);
  REQUIRE(s.has_beta());
  CHECK(s.beta[0] == 0.0);
  CHECK(s.beta[static_cast<std::size_t>(T)] == 0.0);
  for (int t = 0; t <= T; ++t) {
    CHECK(s.beta[static_cast<std::size_t>(t)] ==
          doctest::Approx(bmax * std::sin(std::numbers::pi * t / T)).epsilon(1e-12));
  }
}

TEST_CASE("forward mixing hits the endpoints bit-exactly") {
  Schedule s = dbcr::make_schedule(50);
  Tensor x0 = testutil::random_tensor({3, 8, 8}, 1);
  Tensor y = testutil::random_tensor({3, 8, 8}, 2);
  CHECK(testutil::max_abs_diff(dbcr::forward_mix(x0, y, 0, s).x, x0) == 0.0);
  CHECK(testutil::max_abs_diff(dbcr::forward_mix(x0, y, 50, s).x, y) == 0.0);
}

TEST_CASE("reversing one mixing step reproduces the earlier mixture") {
  // 1000 randomized (x0, y, t, s) cases; reverse_step applied to the true
  // clean image must land exactly on the forward mixture at t - s.
  const int T = 200;
  Schedule sched = dbcr::make_schedule(T);
  dbcr::Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor x0 = testutil::random_tensor({2, 4, 4}, 100 + static_cast<std::uint64_t>(trial));
    Tensor y = testutil::random_tensor({2, 4, 4}, 5000 + static_cast<std::uint64_t>(trial));
    const int t = rng.uniform_int(1, T);
    const int s = rng.uniform_int(1, t);
    Tensor x_t = dbcr::forward_mix(x0, y, t, sched).x;
    Tensor stepped = dbcr::reverse_step(x0, x_t, t, s, sched);
    Tensor expect = dbcr::forward_mix(x0, y, t - s, sched).x;
    CHECK(testutil::max_abs_diff(stepped, expect) < 1e-6);
  }
}

TEST_CASE("zero noise scale degenerates to the deterministic bridge exactly") {
  const int T = 40;
  Schedule det = dbcr::make_schedule(T);
  Schedule sde = dbcr::make_schedule(T, "sine", 0.0);
  Tensor x0 = testutil::random_tensor({2, 6, 6}, 11);
  Tensor y = testutil::random_tensor({2, 6, 6}, 12);
  Tensor noise = dbcr::Rng(13).normal_tensor({2, 6, 6});
  for (int t : {1, 7, 20, 39, 40}) {
    Tensor a = dbcr::forward_mix(x0, y, t, det).x;
    Tensor b = dbcr::forward_mix_sde(x0, y, t, sde, noise).x;
    CHECK(testutil::max_abs_diff(a, b) == 0.0);
  }
  Tensor x_t = dbcr::forward_mix(x0, y, 20, det).x;
  Tensor r1 = dbcr::reverse_step(x0, x_t, 20, 5, det);
  Tensor r2 = dbcr::reverse_step_sde(x0, x_t, 20, 5, sde, noise);
  CHECK(testutil::max_abs_diff(r1, r2) == 0.0);
}

TEST_CASE("timestep plans require an exact divisor") {
  dbcr::TimestepPlan p = dbcr::plan_timesteps(1000, 4);
  CHECK(p.s == 250);
  REQUIRE(p.steps.size() == 5);
  CHECK(p.steps.front() == 1000);
  CHECK(p.steps[1] == 750);
  CHECK(p.steps.back() == 0);
  CHECK_THROWS_AS(dbcr::plan_timesteps(1000, 3), std::invalid_argument);
  CHECK_THROWS_AS(dbcr::plan_timesteps(10, 0), std::invalid_argument);
}

TEST_CASE("degenerate reverse steps are rejected") {
  Schedule s = dbcr::make_schedule(10);
  Tensor a = testutil::random_tensor({1, 2, 2}, 1);
  CHECK_THROWS_AS(dbcr::reverse_step(a, a, 5, 0, s), std::invalid_argument);
  CHECK_THROWS_AS(dbcr::reverse_step(a, a, 5, 6, s), std::invalid_argument);
}
