#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "nn/backbone.hpp"
#include "nn/nafblock.hpp"
#include "nn/sfblock.hpp"

using dbcr::Tensor;
using namespace dbcr::nn;

TEST_CASE("full configuration stays within 10% of the published parameter budget") {
  Backbone net(BackboneConfig::full());
  const double count = static_cast<double>(net.param_count());
  const double target = 18.06e6;
  INFO("parameter count ", count);
  CHECK(std::abs(count - target) / target <= 0.10);
}

TEST_CASE("network output matches input shape and is identity at initialization") {
  Backbone net(BackboneConfig::desk());
  net.init(77);
  Tensor x = testutil::random_tensor({13, 16, 16}, 1);
  Tensor z = testutil::random_tensor({2, 16, 16}, 2);
  Tensor out = net.forward(x, 100, z);
  REQUIRE(out.shape() == x.shape());
  // Zero-initialized output head plus the global residual: prediction == input.
  CHECK(testutil::max_abs_diff(out, x) == 0.0);
}

TEST_CASE("same seed gives identical networks, different seeds differ") {
  BackboneConfig cfg = BackboneConfig::desk();
  Backbone a(cfg), b(cfg), c(cfg);
  a.init(5);
  b.init(5);
  c.init(6);
  ParamList pa, pb, pc;
  a.collect_params(pa);
  b.collect_params(pb);
  c.collect_params(pc);
  REQUIRE(pa.size() == pb.size());
  double diff_ab = 0.0, diff_ac = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    diff_ab = std::max(diff_ab, testutil::max_abs_diff(pa[i]->value, pb[i]->value));
    diff_ac = std::max(diff_ac, testutil::max_abs_diff(pa[i]->value, pc[i]->value));
  }
  CHECK(diff_ab == 0.0);
  CHECK(diff_ac > 0.0);
}

TEST_CASE("timestep embedding matches the sinusoidal formula") {
  const int dim = 8;
  const int t = 37;
  Tensor e = TimeEmbedding::sinusoidal(t, dim);
  REQUIRE(static_cast<int>(e.size()) == dim);
  for (int i = 0; i < dim / 2; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / (dim / 2));
    CHECK(e[static_cast<std::size_t>(i)] == doctest::Approx(std::sin(t * freq)).epsilon(1e-12));
    CHECK(e[static_cast<std::size_t>(i + dim / 2)] ==
          doctest::Approx(std::cos(t * freq)).epsilon(1e-12));
  }
}

TEST_CASE("attention weights normalize over keys") {
  dbcr::Rng rng(3);
  SfBlock block("sf", 8, 2);
  block.init(rng);
  Tensor opt = testutil::random_tensor({8, 4, 4}, 1);
  Tensor sar = testutil::random_tensor({8, 4, 4}, 2);
  block.forward(opt, sar);
  const auto& attn = block.last_attention();
  REQUIRE(attn.size() == 2);
  for (const Tensor& a : attn) {
    REQUIRE(a.ndim() == 2);
    const int ch = a.dim(0);
    REQUIRE(ch == 4);
    for (int j = 0; j < ch; ++j) {
      double col = 0.0;
      for (int i = 0; i < ch; ++i) col += a[static_cast<std::size_t>(i) * ch + j];
      CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
      for (int i = 0; i < ch; ++i) CHECK(a[static_cast<std::size_t>(i) * ch + j] >= 0.0);
    }
  }
}

TEST_CASE("invalid configurations are rejected") {
  BackboneConfig cfg = BackboneConfig::desk();
  cfg.enc_blocks.pop_back();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = BackboneConfig::desk();
  cfg.widths[0] = 13;  // odd width cannot feed the channel-splitting gate
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = BackboneConfig::desk();
  cfg.fusion_heads[0] = 5;  // must divide the level width
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("mismatched inputs are rejected") {
  Backbone net(BackboneConfig::desk());
  net.init(1);
  Tensor x = testutil::random_tensor({13, 16, 16}, 1);
  Tensor z_bad = testutil::random_tensor({2, 8, 8}, 2);
  CHECK_THROWS_AS(net.forward(x, 1, z_bad), std::invalid_argument);
  Tensor x_bad = testutil::random_tensor({12, 16, 16}, 1);
  Tensor z = testutil::random_tensor({2, 16, 16}, 2);
  CHECK_THROWS_AS(net.forward(x_bad, 1, z), std::invalid_argument);
}
