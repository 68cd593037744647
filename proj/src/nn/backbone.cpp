#include "nn/backbone.hpp"

#include <stdexcept>
#include <string>

namespace dbcr {
namespace nn {

void BackboneConfig::validate() const {
  const std::size_t L = widths.size();
  if (L == 0) throw std::invalid_argument("BackboneConfig: empty widths");
  if (enc_blocks.size() != L || dec_blocks.size() != L || fusion_heads.size() != L) {
    throw std::invalid_argument("BackboneConfig: widths/enc_blocks/dec_blocks/fusion_heads "
                                "must have equal length");
  }
  for (std::size_t i = 0; i < L; ++i) {
    if (widths[i] <= 0 || widths[i] % 2 != 0) {
      throw std::invalid_argument("BackboneConfig: widths must be positive and even");
    }
    if (enc_blocks[i] < 0 || dec_blocks[i] < 0) {
      throw std::invalid_argument("BackboneConfig: negative block count");
    }
    if (fusion_heads[i] < 1 || widths[i] % fusion_heads[i] != 0) {
      throw std::invalid_argument("BackboneConfig: fusion_heads[" + std::to_string(i) +
                                  "] must divide widths[" + std::to_string(i) + "]");
    }
  }
  if (opt_channels_in < 1 || sar_channels_in < 1) {
    throw std::invalid_argument("BackboneConfig: channel counts must be positive");
  }
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw std::invalid_argument("BackboneConfig: time_embed_dim must be even and >= 2");
  }
}

BackboneConfig BackboneConfig::full() {
  BackboneConfig cfg;
  cfg.widths = {22, 44, 88, 176};
  cfg.enc_blocks = {1, 1, 1, 28};
  cfg.dec_blocks = {1, 1, 1, 1};
  cfg.fusion_heads = {1, 1, 2, 4};
  cfg.time_embed_dim = 176;
  return cfg;
}

BackboneConfig BackboneConfig::desk() {
  BackboneConfig cfg;
  cfg.widths = {12, 24};
  cfg.enc_blocks = {1, 1};
  cfg.dec_blocks = {1, 1};
  cfg.fusion_heads = {1, 2};
  cfg.time_embed_dim = 16;
  return cfg;
}

Backbone::Backbone(const BackboneConfig& cfg)
    : cfg_(cfg),
      temb_("temb", (cfg.validate(), cfg.time_embed_dim)),
      intro_opt_("intro_opt", cfg.opt_channels_in, cfg.widths[0]),
      intro_sar_("intro_sar", cfg.sar_channels_in, cfg.widths[0]),
      head_("head", cfg.widths[0], cfg.opt_channels_in) {
  const int L = cfg_.levels();
  enc_opt_.resize(static_cast<std::size_t>(L));
  enc_sar_.resize(static_cast<std::size_t>(L));
  dec_.resize(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    const int w = cfg_.widths[static_cast<std::size_t>(i)];
    std::string lvl = std::to_string(i);
    for (int b = 0; b < cfg_.enc_blocks[static_cast<std::size_t>(i)]; ++b) {
      enc_opt_[static_cast<std::size_t>(i)].push_back(std::make_unique<NafBlock>(
          "enc_opt." + lvl + "." + std::to_string(b), w, cfg_.time_embed_dim));
      enc_sar_[static_cast<std::size_t>(i)].push_back(std::make_unique<NafBlock>(
          "enc_sar." + lvl + "." + std::to_string(b), w, cfg_.time_embed_dim));
    }
    for (int b = 0; b < cfg_.dec_blocks[static_cast<std::size_t>(i)]; ++b) {
      dec_[static_cast<std::size_t>(i)].push_back(std::make_unique<NafBlock>(
          "dec." + lvl + "." + std::to_string(b), w, cfg_.time_embed_dim));
    }
    fusion_.push_back(std::make_unique<SfBlock>("fusion." + lvl, w,
                                                cfg_.fusion_heads[static_cast<std::size_t>(i)]));
    if (i < L - 1) {
      const int wn = cfg_.widths[static_cast<std::size_t>(i) + 1];
      down_opt_.push_back(std::make_unique<ConvDown2x2>("down_opt." + lvl, w, wn));
      down_sar_.push_back(std::make_unique<ConvDown2x2>("down_sar." + lvl, w, wn));
      up_.push_back(std::make_unique<PixelShuffleUp>("up." + lvl, wn));
      if (wn / 2 != w) {
        up_fix_.push_back(std::make_unique<Conv1x1>("up_fix." + lvl, wn / 2, w));
      } else {
        up_fix_.push_back(nullptr);
      }
      skip_.push_back(std::make_unique<Conv1x1>("skip." + lvl, w, w));
    }
  }
  head_.zero_weights();  // global residual makes the initial network the identity
  collect_params(params_);
}

Tensor Backbone::forward(const Tensor& x_t, int t, const Tensor& z) {
  const int L = cfg_.levels();
  if (x_t.ndim() != 3 || x_t.dim(0) != cfg_.opt_channels_in) {
    throw std::invalid_argument("Backbone: optical input must be [" +
                                std::to_string(cfg_.opt_channels_in) + ",H,W], got " +
                                x_t.shape_str());
  }
  if (z.ndim() != 3 || z.dim(0) != cfg_.sar_channels_in || z.dim(1) != x_t.dim(1) ||
      z.dim(2) != x_t.dim(2)) {
    throw std::invalid_argument("Backbone: SAR input shape " + z.shape_str() +
                                " inconsistent with optical " + x_t.shape_str());
  }
  const int div = 1 << (L - 1);
  if (x_t.dim(1) % div != 0 || x_t.dim(2) % div != 0) {
    throw std::invalid_argument("Backbone: spatial dims " + x_t.shape_str() +
                                " not divisible by 2^" + std::to_string(L - 1));
  }

  temb_cache_ = temb_.forward(t);

  Tensor o = intro_opt_.forward(x_t);
  Tensor s = intro_sar_.forward(z);
  std::vector<Tensor> fused(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) {
    for (auto& b : enc_opt_[static_cast<std::size_t>(i)]) o = b->forward(o, temb_cache_);
    for (auto& b : enc_sar_[static_cast<std::size_t>(i)]) s = b->forward(s, temb_cache_);
    fused[static_cast<std::size_t>(i)] = fusion_[static_cast<std::size_t>(i)]->forward(o, s);
    if (i < L - 1) {
      o = down_opt_[static_cast<std::size_t>(i)]->forward(fused[static_cast<std::size_t>(i)]);
      s = down_sar_[static_cast<std::size_t>(i)]->forward(s);
    }
  }

  Tensor d = fused[static_cast<std::size_t>(L - 1)];
  for (auto& b : dec_[static_cast<std::size_t>(L - 1)]) d = b->forward(d, temb_cache_);
  for (int i = L - 2; i >= 0; --i) {
    d = up_[static_cast<std::size_t>(i)]->forward(d);
    if (up_fix_[static_cast<std::size_t>(i)]) {
      d = up_fix_[static_cast<std::size_t>(i)]->forward(d);
    }
    d += skip_[static_cast<std::size_t>(i)]->forward(fused[static_cast<std::size_t>(i)]);
    for (auto& b : dec_[static_cast<std::size_t>(i)]) d = b->forward(d, temb_cache_);
  }

  Tensor out = head_.forward(d);
  out += x_t;
  return out;
}

Tensor Backbone::backward(const Tensor& gout) {
  const int L = cfg_.levels();
  Tensor gtemb({cfg_.time_embed_dim});

  Tensor gd = head_.backward(gout);

  // Decoder backward, mirroring the forward order (levels 0 .. L-2, then bottleneck).
  std::vector<Tensor> gskip_f(static_cast<std::size_t>(L));  // grads on fused enc features
  for (int i = 0; i <= L - 2; ++i) {
    for (auto it = dec_[static_cast<std::size_t>(i)].rbegin();
         it != dec_[static_cast<std::size_t>(i)].rend(); ++it) {
      gd = (*it)->backward(gd, gtemb);
    }
    gskip_f[static_cast<std::size_t>(i)] = skip_[static_cast<std::size_t>(i)]->backward(gd);
    if (up_fix_[static_cast<std::size_t>(i)]) {
      gd = up_fix_[static_cast<std::size_t>(i)]->backward(gd);
    }
    gd = up_[static_cast<std::size_t>(i)]->backward(gd);
  }
  for (auto it = dec_[static_cast<std::size_t>(L - 1)].rbegin();
       it != dec_[static_cast<std::size_t>(L - 1)].rend(); ++it) {
    gd = (*it)->backward(gd, gtemb);
  }

  // Encoder backward from the deepest level up.
  Tensor gf = gd;  // grad on fused[L-1]
  Tensor go, gs;
  for (int i = L - 1; i >= 0; --i) {
    Tensor gs_extra;
    if (i < L - 1) {
      gf = gskip_f[static_cast<std::size_t>(i)];
      gf += down_opt_[static_cast<std::size_t>(i)]->backward(go);
      gs_extra = down_sar_[static_cast<std::size_t>(i)]->backward(gs);
    }
    go = fusion_[static_cast<std::size_t>(i)]->backward(gf, gs);
    if (i < L - 1) gs += gs_extra;
    for (auto it = enc_sar_[static_cast<std::size_t>(i)].rbegin();
         it != enc_sar_[static_cast<std::size_t>(i)].rend(); ++it) {
      gs = (*it)->backward(gs, gtemb);
    }
    for (auto it = enc_opt_[static_cast<std::size_t>(i)].rbegin();
         it != enc_opt_[static_cast<std::size_t>(i)].rend(); ++it) {
      go = (*it)->backward(go, gtemb);
    }
  }

  intro_sar_.backward(gs);
  Tensor gx = intro_opt_.backward(go);
  gx += gout;  // global residual
  temb_.backward(gtemb);
  return gx;
}

void Backbone::collect_params(ParamList& out) {
  temb_.collect_params(out);
  intro_opt_.collect_params(out);
  intro_sar_.collect_params(out);
  const int L = cfg_.levels();
  for (int i = 0; i < L; ++i) {
    for (auto& b : enc_opt_[static_cast<std::size_t>(i)]) b->collect_params(out);
    for (auto& b : enc_sar_[static_cast<std::size_t>(i)]) b->collect_params(out);
    fusion_[static_cast<std::size_t>(i)]->collect_params(out);
    if (i < L - 1) {
      down_opt_[static_cast<std::size_t>(i)]->collect_params(out);
      down_sar_[static_cast<std::size_t>(i)]->collect_params(out);
      up_[static_cast<std::size_t>(i)]->collect_params(out);
      if (up_fix_[static_cast<std::size_t>(i)]) {
        up_fix_[static_cast<std::size_t>(i)]->collect_params(out);
      }
      skip_[static_cast<std::size_t>(i)]->collect_params(out);
    }
  }
  for (int i = 0; i < L; ++i) {
    for (auto& b : dec_[static_cast<std::size_t>(i)]) b->collect_params(out);
  }
  head_.collect_params(out);
}

std::size_t Backbone::param_count() {
  std::size_t n = 0;
  for (const Param* p : params_) n += p->value.size();
  return n;
}

void Backbone::init(std::uint64_t seed) {
  Rng rng(mix_seed(seed, /*stream=*/0xB0DE));
  temb_.init(rng);
  intro_opt_.init(rng);
  intro_sar_.init(rng);
  const int L = cfg_.levels();
  for (int i = 0; i < L; ++i) {
    for (auto& b : enc_opt_[static_cast<std::size_t>(i)]) b->init(rng);
    for (auto& b : enc_sar_[static_cast<std::size_t>(i)]) b->init(rng);
    fusion_[static_cast<std::size_t>(i)]->init(rng);
    if (i < L - 1) {
      down_opt_[static_cast<std::size_t>(i)]->init(rng);
      down_sar_[static_cast<std::size_t>(i)]->init(rng);
      up_[static_cast<std::size_t>(i)]->init(rng);
      if (up_fix_[static_cast<std::size_t>(i)]) up_fix_[static_cast<std::size_t>(i)]->init(rng);
      skip_[static_cast<std::size_t>(i)]->init(rng);
    }
    for (auto& b : dec_[static_cast<std::size_t>(i)]) b->init(rng);
  }
  head_.zero_weights();
}

void Backbone::zero_grad() {
  for (Param* p : params_) p->grad.zero();
}

}  // namespace nn
}  // namespace dbcr
