#include "nn/sfblock.hpp"

#include <cmath>
#include <stdexcept>

namespace dbcr {
namespace nn {

SfBlock::SfBlock(std::string name, int channels, int heads)
    : c_(channels),
      heads_(heads),
      ch_(heads > 0 ? channels / heads : 0),
      ln_opt_(name + ".ln_opt", channels),
      ln_sar_(name + ".ln_sar", channels),
      q_(name + ".q", channels, channels),
      k_(name + ".k", channels, channels),
      v_(name + ".v", channels, channels),
      proj_(name + ".proj", channels, channels) {
  if (heads < 1 || channels % heads != 0) {
    throw std::invalid_argument("SfBlock: heads=" + std::to_string(heads) +
                                " must divide channels=" + std::to_string(channels));
  }
  mlp_act_.resize(static_cast<std::size_t>(heads));
  for (int hh = 0; hh < heads; ++hh) {
    std::string hname = name + ".mlp" + std::to_string(hh);
    mlp1_.push_back(std::make_unique<Conv1x1>(hname + ".fc1", ch_, 2 * ch_));
    mlp2_.push_back(std::make_unique<Conv1x1>(hname + ".fc2", 2 * ch_, ch_));
  }
}

namespace {

Tensor slice_channels(const Tensor& x, int c0, int n) {
  const int h = x.dim(1), w = x.dim(2);
  const std::size_t p = static_cast<std::size_t>(h) * w;
  Tensor out({n, h, w});
  std::copy(x.data() + c0 * p, x.data() + (c0 + n) * p, out.data());
  return out;
}

void add_into_channels(Tensor& dst, const Tensor& src, int c0) {
  const std::size_t p = static_cast<std::size_t>(src.dim(1)) * src.dim(2);
  const std::size_t n = static_cast<std::size_t>(src.dim(0)) * p;
  double* d = dst.data() + c0 * p;
  for (std::size_t i = 0; i < n; ++i) d[i] += src[i];
}

}  // namespace

Tensor SfBlock::forward(const Tensor& opt, const Tensor& sar) {
  require_same_shape(opt, sar, "SfBlock::forward");
  if (opt.dim(0) != c_) throw std::invalid_argument("SfBlock: channel mismatch");
  const int h = opt.dim(1), w = opt.dim(2);
  const std::size_t p = static_cast<std::size_t>(h) * w;
  const double inv_sqrt_ch = 1.0 / std::sqrt(static_cast<double>(ch_));

  qv_ = q_.forward(ln_opt_.forward(opt));
  Tensor sn = ln_sar_.forward(sar);
  kv_ = k_.forward(sn);
  vv_ = v_.forward(sn);

  attn_.assign(static_cast<std::size_t>(heads_), Tensor());
  Tensor concat({c_, h, w});

  for (int hh = 0; hh < heads_; ++hh) {
    const int base = hh * ch_;
    // Scores S[i][j] = <Q_i, K_j> / sqrt(ch); softmax per column j over i.
    Tensor scores({ch_, ch_});
    for (int i = 0; i < ch_; ++i) {
      const double* qi = qv_.data() + (base + i) * p;
      for (int j = 0; j < ch_; ++j) {
        const double* kj = kv_.data() + (base + j) * p;
        double acc = 0.0;
        for (std::size_t pp = 0; pp < p; ++pp) acc += qi[pp] * kj[pp];
        scores[static_cast<std::size_t>(i) * ch_ + j] = acc * inv_sqrt_ch;
      }
    }
    Tensor a({ch_, ch_});
    for (int j = 0; j < ch_; ++j) {
      double mx = scores[static_cast<std::size_t>(j)];
      for (int i = 0; i < ch_; ++i) {
        mx = std::max(mx, scores[static_cast<std::size_t>(i) * ch_ + j]);
      }
      double denom = 0.0;
      for (int i = 0; i < ch_; ++i) {
        double e = std::exp(scores[static_cast<std::size_t>(i) * ch_ + j] - mx);
        a[static_cast<std::size_t>(i) * ch_ + j] = e;
        denom += e;
      }
      for (int i = 0; i < ch_; ++i) a[static_cast<std::size_t>(i) * ch_ + j] /= denom;
    }
    attn_[static_cast<std::size_t>(hh)] = a;

    // Attended features plus the raw optical input of this head.
    Tensor zs({ch_, h, w});
    for (int j = 0; j < ch_; ++j) {
      double* zj = zs.data() + j * p;
      const double* oj = opt.data() + (base + j) * p;
      for (std::size_t pp = 0; pp < p; ++pp) zj[pp] = oj[pp];
      for (int i = 0; i < ch_; ++i) {
        double aij = a[static_cast<std::size_t>(i) * ch_ + j];
        if (aij == 0.0) continue;
        const double* vi = vv_.data() + (base + i) * p;
        for (std::size_t pp = 0; pp < p; ++pp) zj[pp] += aij * vi[pp];
      }
    }
    Tensor zout = zs;
    zout += mlp2_[static_cast<std::size_t>(hh)]->forward(
        mlp_act_[static_cast<std::size_t>(hh)].forward(
            mlp1_[static_cast<std::size_t>(hh)]->forward(zs)));
    std::copy(zout.data(), zout.data() + zout.size(), concat.data() + base * p);
  }
  return proj_.forward(concat);
}

Tensor SfBlock::backward(const Tensor& gy, Tensor& gsar) {
  const int h = gy.dim(1), w = gy.dim(2);
  const std::size_t p = static_cast<std::size_t>(h) * w;
  const double inv_sqrt_ch = 1.0 / std::sqrt(static_cast<double>(ch_));

  Tensor gcat = proj_.backward(gy);
  Tensor gopt({c_, h, w});
  Tensor gq({c_, h, w}), gk({c_, h, w}), gv({c_, h, w});

  for (int hh = 0; hh < heads_; ++hh) {
    const int base = hh * ch_;
    Tensor gzout = slice_channels(gcat, base, ch_);
    Tensor gzsum = gzout;
    gzsum += mlp1_[static_cast<std::size_t>(hh)]->backward(
        mlp_act_[static_cast<std::size_t>(hh)].backward(
            mlp2_[static_cast<std::size_t>(hh)]->backward(gzout)));

    add_into_channels(gopt, gzsum, base);  // direct input-feature add

    const Tensor& a = attn_[static_cast<std::size_t>(hh)];
    // gA[i][j] = sum_p V_i gzsum_j ; gV_i += sum_j A[i][j] gzsum_j
    Tensor ga({ch_, ch_});
    for (int i = 0; i < ch_; ++i) {
      const double* vi = vv_.data() + (base + i) * p;
      double* gvi = gv.data() + (base + i) * p;
      for (int j = 0; j < ch_; ++j) {
        const double* gzj = gzsum.data() + j * p;
        double aij = a[static_cast<std::size_t>(i) * ch_ + j];
        double acc = 0.0;
        for (std::size_t pp = 0; pp < p; ++pp) {
          acc += vi[pp] * gzj[pp];
          gvi[pp] += aij * gzj[pp];
        }
        ga[static_cast<std::size_t>(i) * ch_ + j] = acc;
      }
    }
    // Column softmax backward.
    Tensor gs({ch_, ch_});
    for (int j = 0; j < ch_; ++j) {
      double dot = 0.0;
      for (int i = 0; i < ch_; ++i) {
        dot += a[static_cast<std::size_t>(i) * ch_ + j] * ga[static_cast<std::size_t>(i) * ch_ + j];
      }
      for (int i = 0; i < ch_; ++i) {
        gs[static_cast<std::size_t>(i) * ch_ + j] =
            a[static_cast<std::size_t>(i) * ch_ + j] *
            (ga[static_cast<std::size_t>(i) * ch_ + j] - dot);
      }
    }
    for (int i = 0; i < ch_; ++i) {
      double* gqi = gq.data() + (base + i) * p;
      for (int j = 0; j < ch_; ++j) {
        double g = gs[static_cast<std::size_t>(i) * ch_ + j] * inv_sqrt_ch;
        if (g == 0.0) continue;
        const double* kj = kv_.data() + (base + j) * p;
        double* gkj = gk.data() + (base + j) * p;
        const double* qi = qv_.data() + (base + i) * p;
        for (std::size_t pp = 0; pp < p; ++pp) {
          gqi[pp] += g * kj[pp];
          gkj[pp] += g * qi[pp];
        }
      }
    }
  }

  gopt += ln_opt_.backward(q_.backward(gq));
  Tensor gsn = k_.backward(gk);
  gsn += v_.backward(gv);
  gsar = ln_sar_.backward(gsn);
  return gopt;
}

void SfBlock::collect_params(ParamList& out) {
  ln_opt_.collect_params(out);
  ln_sar_.collect_params(out);
  q_.collect_params(out);
  k_.collect_params(out);
  v_.collect_params(out);
  for (int hh = 0; hh < heads_; ++hh) {
    mlp1_[static_cast<std::size_t>(hh)]->collect_params(out);
    mlp2_[static_cast<std::size_t>(hh)]->collect_params(out);
  }
  proj_.collect_params(out);
}

void SfBlock::init(Rng& rng) {
  q_.init(rng);
  k_.init(rng);
  v_.init(rng);
  for (int hh = 0; hh < heads_; ++hh) {
    mlp1_[static_cast<std::size_t>(hh)]->init(rng);
    mlp2_[static_cast<std::size_t>(hh)]->init(rng);
  }
  proj_.init(rng);
}

}  // namespace nn
}  // namespace dbcr
