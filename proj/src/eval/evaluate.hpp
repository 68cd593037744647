#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "metrics/metrics.hpp"
#include "nn/backbone.hpp"

namespace dbcr {

struct EvalOptions {
  std::string split = "test";
  std::vector<int> nfe_sweep;  // empty => just cfg.inference.nfe
  bool compare_sde = false;    // additionally run the stochastic sampler
  bool write_images = true;    // cloudy/restored/reference grids for a few scenes
  int max_image_grids = 4;
};

struct EvalRun {
  int nfe = 0;
  std::string mode;
  metrics::MetricsReport report;
  double mean_input_psnr = 0.0;  // cloudy-vs-reference baseline
  double improved_fraction = 0.0;
};

struct EvalSummary {
  std::vector<EvalRun> runs;
  std::string report_json;
};

// Evaluates the model over one dataset split: restores every scene, computes
// PSNR/SSIM/MAE/SAM per image, stratifies by cloud fraction, and writes
// report.json (plus optional preview grids) under out_dir.
EvalSummary run_eval(nn::Backbone& model, const RunConfig& cfg,
                     const std::filesystem::path& data_root,
                     const std::filesystem::path& out_dir, const EvalOptions& opts);

}  // namespace dbcr
