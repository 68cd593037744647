#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "core/errors.hpp"
#include "infer/sampler.hpp"
#include "io/checkpoint.hpp"
#include "metrics/metrics.hpp"

namespace dbcr {

namespace fs = std::filesystem;

Trainer::Trainer(const RunConfig& cfg, nn::Backbone& model)
    : cfg_(cfg),
      model_(model),
      sched_(make_schedule(cfg.train.T, "sine", cfg.train.sde_beta_max)),
      adam_([&] {
        nn::ParamList params;
        model.collect_params(params);
        return params;
      }(),
            nn::AdamConfig{cfg.train.learning_rate, 0.9, 0.999, 1e-8}) {}

TrainStepResult Trainer::train_step(const std::vector<const ImageTriplet*>& batch, int t,
                                    Rng& noise_rng) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  if (t < 1 || t > sched_.T) throw std::invalid_argument("train_step: t outside [1, T]");

  adam_.zero_grad();
  double loss = 0.0;
  const double batch_n = static_cast<double>(batch.size());
  for (const ImageTriplet* item : batch) {
    Tensor x_t;
    if (sched_.has_beta()) {
      Tensor noise = noise_rng.normal_tensor(item->x0.shape());
      x_t = forward_mix_sde(item->x0, item->y, t, sched_, noise).x;
    } else {
      x_t = forward_mix(item->x0, item->y, t, sched_).x;
    }
    Tensor pred = model_.forward(x_t, t, item->z);

    const double inv_n = 1.0 / (static_cast<double>(pred.size()) * batch_n);
    Tensor gout(pred.shape());
    double item_loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const double d = pred[i] - item->x0[i];
      item_loss += std::abs(d);
      gout[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_n;
    }
    loss += item_loss / static_cast<double>(pred.size()) / batch_n;
    model_.backward(gout);
  }
  ++step_;
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite training loss at step " + std::to_string(step_));
  }
  adam_.step();
  return {loss, t, step_};
}

double validate_psnr(nn::Backbone& model, const Schedule& sched,
                     const std::vector<ImageTriplet>& scenes) {
  if (scenes.empty()) return 0.0;
  double acc = 0.0;
  for (const ImageTriplet& s : scenes) {
    InferenceResult r = run_inference(model, s.y, s.z, sched, 1);
    acc += metrics::psnr(r.restored, s.x0);
  }
  return acc / static_cast<double>(scenes.size());
}

TrainResult Trainer::train_loop(const fs::path& data_root, const fs::path& out_dir,
                                std::ostream* log) {
  auto manifest = read_manifest(data_root);
  auto train_entries = entries_for_split(manifest, "train");
  auto val_entries = entries_for_split(manifest, "val");
  if (train_entries.empty()) throw ConfigError("train split is empty under " + data_root.string());

  std::vector<ImageTriplet> train_set, val_set;
  train_set.reserve(train_entries.size());
  for (const auto& e : train_entries) {
    train_set.push_back(load_triplet(data_root / "scenes" / e.scene_id));
  }
  for (const auto& e : val_entries) {
    val_set.push_back(load_triplet(data_root / "scenes" / e.scene_id));
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  CheckpointMeta meta;
  meta.schedule_T = cfg_.train.T;
  meta.sde_beta_max = cfg_.train.sde_beta_max;
  meta.seed = cfg_.train.seed;
  meta.config_hash = cfg_.hash();

  int start_epoch = 0;
  const fs::path last_path = out_dir / "last.ckpt";
  const fs::path best_path = out_dir / "best.ckpt";
  if (fs::exists(last_path)) {
    // The full config hash may legitimately differ on resume (for example a
    // raised epoch count); what must match is the model architecture (checked
    // inside load_checkpoint) and the bridge schedule.
    CheckpointMeta prev = load_checkpoint(last_path, model_, &adam_);
    if (prev.schedule_T != cfg_.train.T || prev.sde_beta_max != cfg_.train.sde_beta_max) {
      throw ConfigError("cannot resume: checkpoint was trained with a different schedule");
    }
    start_epoch = prev.epoch;
    step_ = prev.step;
    if (log) *log << "# resumed from " << last_path.string() << " at epoch " << start_epoch << "\n";
  } else {
    model_.init(cfg_.train.seed);
  }

  TrainResult result;
  result.best_val_psnr = -1.0;
  result.best_checkpoint = best_path;
  result.last_checkpoint = last_path;

  Rng t_rng(mix_seed(cfg_.train.seed, 0x7EA));
  Rng noise_rng(mix_seed(cfg_.train.seed, 0x015E));
  // Replay timestep/noise draws consumed before the resume point so a resumed
  // run continues the same stream.
  const long long steps_per_epoch =
      (static_cast<long long>(train_set.size()) + cfg_.train.batch_size - 1) /
      cfg_.train.batch_size;
  for (long long i = 0; i < static_cast<long long>(start_epoch) * steps_per_epoch; ++i) {
    (void)t_rng.uniform_int(1, sched_.T);
  }

  for (int epoch = start_epoch; epoch < cfg_.train.epochs; ++epoch) {
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(mix_seed(cfg_.train.seed, 0xE90C + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());

    double loss_sum = 0.0;
    long long epoch_steps = 0;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg_.train.batch_size) {
      std::vector<const ImageTriplet*> batch;
      for (std::size_t k = pos; k < std::min(order.size(), pos + cfg_.train.batch_size); ++k) {
        batch.push_back(&train_set[order[k]]);
      }
      const int t = t_rng.uniform_int(1, sched_.T);
      TrainStepResult sr = train_step(batch, t, noise_rng);
      loss_sum += sr.loss;
      ++epoch_steps;
      if (log) *log << sr.step << " " << sr.t << " " << sr.loss << "\n";
    }

    EpochResult er;
    er.epoch = epoch + 1;
    er.mean_loss = epoch_steps > 0 ? loss_sum / static_cast<double>(epoch_steps) : 0.0;
    er.val_psnr = validate_psnr(model_, sched_, val_set);
    result.epochs.push_back(er);
    if (log) {
      *log << "# epoch " << er.epoch << " mean_loss " << er.mean_loss << " val_psnr "
           << er.val_psnr << "\n";
    }

    meta.step = step_;
    meta.epoch = er.epoch;
    if (er.val_psnr > result.best_val_psnr || val_set.empty()) {
      result.best_val_psnr = er.val_psnr;
      save_checkpoint(best_path, model_, meta, &adam_);
    }
    if (er.epoch % cfg_.train.checkpoint_every == 0 || er.epoch == cfg_.train.epochs) {
      save_checkpoint(last_path, model_, meta, &adam_);
    }
  }
  meta.step = step_;
  meta.epoch = cfg_.train.epochs;
  save_checkpoint(last_path, model_, meta, &adam_);
  if (!fs::exists(best_path)) save_checkpoint(best_path, model_, meta, &adam_);
  result.steps = step_;
  return result;
}

}  // namespace dbcr
