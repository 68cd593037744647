#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "bridge/schedule.hpp"
#include "config.hpp"
#include "data/dataset.hpp"
#include "nn/adam.hpp"
#include "nn/backbone.hpp"

namespace dbcr {

struct TrainStepResult {
  double loss = 0.0;
  int t = 0;
  long long step = 0;
};

struct EpochResult {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_psnr = 0.0;
};

struct TrainResult {
  long long steps = 0;
  std::vector<EpochResult> epochs;
  double best_val_psnr = 0.0;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
};

class Trainer {
 public:
  // The model must already be constructed from cfg.backbone; init(seed) is
  // applied here unless the caller resumes from a checkpoint afterwards.
  Trainer(const RunConfig& cfg, nn::Backbone& model);

  // One optimizer update on a batch sharing the timestep t. Noise is consumed
  // only when the config requests the stochastic bridge.
  TrainStepResult train_step(const std::vector<const ImageTriplet*>& batch, int t, Rng& noise_rng);

  // Full run over the train split with per-epoch validation, loss logging
  // ("step t loss" lines), and best/last checkpoints under out_dir. Resumes
  // from out_dir/last.ckpt when present.
  TrainResult train_loop(const std::filesystem::path& data_root,
                         const std::filesystem::path& out_dir, std::ostream* log);

  const Schedule& schedule() const { return sched_; }
  nn::Adam& optimizer() { return adam_; }
  long long step_count() const { return step_; }

 private:
  RunConfig cfg_;
  nn::Backbone& model_;
  Schedule sched_;
  nn::Adam adam_;
  long long step_ = 0;
};

// Mean PSNR of single-pass restorations over a list of scenes.
double validate_psnr(nn::Backbone& model, const Schedule& sched,
                     const std::vector<ImageTriplet>& scenes);

}  // namespace dbcr
