#include "eval/evaluate.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "data/dataset.hpp"
#include "infer/sampler.hpp"
#include "io/image_io.hpp"

namespace dbcr {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json stratum_to_json(const metrics::StratumStats& s) {
  return json{{"lo", s.lo},
              {"hi", s.hi},
              {"count", s.count},
              {"mean_psnr", s.mean_psnr},
              {"median_psnr", s.median_psnr},
              {"mean_ssim", s.mean_ssim},
              {"median_ssim", s.median_ssim},
              {"mean_mae", s.mean_mae},
              {"median_mae", s.median_mae},
              {"mean_sam", s.mean_sam},
              {"median_sam", s.median_sam}};
}

json run_to_json(const EvalRun& r) {
  json per_image = json::array();
  for (const auto& m : r.report.per_image) {
    per_image.push_back({{"scene_id", m.scene_id},
                         {"psnr", m.psnr},
                         {"ssim", m.ssim},
                         {"mae", m.mae},
                         {"sam", m.sam},
                         {"cloud_fraction", m.cloud_fraction}});
  }
  json strata = json::array();
  for (const auto& s : r.report.strata) strata.push_back(stratum_to_json(s));
  return json{{"nfe", r.nfe},
              {"mode", r.mode},
              {"mean_input_psnr", r.mean_input_psnr},
              {"improved_fraction", r.improved_fraction},
              {"overall", stratum_to_json(r.report.overall)},
              {"strata", strata},
              {"per_image", per_image}};
}

}  // namespace

EvalSummary run_eval(nn::Backbone& model, const RunConfig& cfg, const fs::path& data_root,
                     const fs::path& out_dir, const EvalOptions& opts) {
  auto manifest = read_manifest(data_root);
  auto entries = entries_for_split(manifest, opts.split);
  if (entries.empty()) {
    throw ConfigError("split '" + opts.split + "' is empty under " + data_root.string());
  }

  std::vector<ImageTriplet> scenes;
  scenes.reserve(entries.size());
  for (const auto& e : entries) {
    scenes.push_back(load_triplet(data_root / "scenes" / e.scene_id));
    scenes.back().scene_id = e.scene_id;
    scenes.back().cloud_fraction = e.cloud_fraction;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  Schedule sched = make_schedule(cfg.train.T, "sine", cfg.train.sde_beta_max);

  std::vector<int> nfes = opts.nfe_sweep;
  if (nfes.empty()) nfes.push_back(cfg.inference.nfe);
  std::vector<std::string> modes = {cfg.inference.mode};
  if (opts.compare_sde) {
    modes = {"ode", "sde"};
    if (!sched.has_beta()) {
      throw ConfigError("SDE comparison requested but train.sde_beta_max is unset");
    }
  }

  EvalSummary summary;
  for (const std::string& mode : modes) {
    for (int nfe : nfes) {
      EvalRun run;
      run.nfe = nfe;
      run.mode = mode;
      std::vector<metrics::ImageMetrics> per_image;
      double input_psnr_sum = 0.0;
      std::size_t improved = 0;
      int grids = 0;
      for (const ImageTriplet& s : scenes) {
        InferenceResult r =
            run_inference(model, s.y, s.z, sched, nfe, mode, cfg.inference.seed);
        metrics::ImageMetrics m;
        m.scene_id = s.scene_id;
        m.psnr = metrics::psnr(r.restored, s.x0);
        m.ssim = metrics::ssim(r.restored, s.x0);
        m.mae = metrics::mae(r.restored, s.x0);
        m.sam = metrics::sam(r.restored, s.x0);
        m.cloud_fraction = s.cloud_fraction;
        per_image.push_back(m);
        const double base = metrics::psnr(s.y, s.x0);
        input_psnr_sum += base;
        if (m.psnr > base) ++improved;
        if (opts.write_images && grids < opts.max_image_grids) {
          const std::string name =
              s.scene_id + "_" + mode + "_nfe" + std::to_string(nfe) + ".ppm";
          write_ppm_grid(out_dir / "previews" / name, {s.y, r.restored, s.x0}, cfg.eval.rgb_bands,
                         "config " + cfg.hash());
          ++grids;
        }
      }
      run.report = metrics::stratified_report(per_image);
      run.mean_input_psnr = input_psnr_sum / static_cast<double>(scenes.size());
      run.improved_fraction =
          static_cast<double>(improved) / static_cast<double>(scenes.size());
      summary.runs.push_back(std::move(run));
    }
  }

  json j;
  j["config_hash"] = cfg.hash();
  j["split"] = opts.split;
  j["scene_count"] = scenes.size();
  json runs = json::array();
  for (const auto& r : summary.runs) runs.push_back(run_to_json(r));
  j["runs"] = runs;
  summary.report_json = j.dump(2);

  std::ofstream out(out_dir / "report.json");
  if (!out) throw IoError("cannot write report under " + out_dir.string());
  out << summary.report_json << "\n";
  return summary;
}

}  // namespace dbcr
