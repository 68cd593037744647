#include "dbcr/dbcr.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "config.hpp"
#include "core/errors.hpp"
#include "data/dataset.hpp"
#include "eval/evaluate.hpp"
#include "infer/sampler.hpp"
#include "io/checkpoint.hpp"
#include "io/image_io.hpp"
#include "train/trainer.hpp"

namespace {

thread_local std::string g_last_error = "";

struct Ctx {
  dbcr::RunConfig cfg;
};

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DBCR_OK;
  } catch (const dbcr::ConfigError& e) {
    return fail(DBCR_ERR_CONFIG, e.what());
  } catch (const dbcr::NumericError& e) {
    return fail(DBCR_ERR_NUMERIC, e.what());
  } catch (const dbcr::IoError& e) {
    return fail(DBCR_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DBCR_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(DBCR_ERR_NUMERIC, e.what());
  }
}

Ctx* as_ctx(dbcr_ctx* ctx) { return reinterpret_cast<Ctx*>(ctx); }

std::vector<int> parse_sweep(const char* text) {
  std::vector<int> out;
  if (!text || !*text) return out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1) {
      throw dbcr::ConfigError("bad step-count list entry: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

// Builds the model from the checkpoint's stored architecture so a checkpoint
// is usable regardless of the context's backbone section.
std::unique_ptr<dbcr::nn::Backbone> model_from_checkpoint(const std::filesystem::path& file,
                                                          dbcr::CheckpointMeta* meta_out) {
  dbcr::CheckpointMeta meta = dbcr::peek_checkpoint(file);
  auto model = std::make_unique<dbcr::nn::Backbone>(meta.backbone);
  dbcr::load_checkpoint(file, *model);
  if (meta_out) *meta_out = meta;
  return model;
}

}  // namespace

extern "C" {

dbcr_ctx* dbcr_ctx_create(void) {
  try {
    return reinterpret_cast<dbcr_ctx*>(new Ctx());
  } catch (...) {
    return nullptr;
  }
}

void dbcr_ctx_free(dbcr_ctx* ctx) { delete as_ctx(ctx); }

int dbcr_load_config(dbcr_ctx* ctx, const char* path) {
  if (!ctx || !path) return fail(DBCR_ERR_CONFIG, "null argument");
  return guarded([&] { as_ctx(ctx)->cfg = dbcr::RunConfig::from_file(path); });
}

int dbcr_set(dbcr_ctx* ctx, const char* dotted_key, const char* json_value) {
  if (!ctx || !dotted_key || !json_value) return fail(DBCR_ERR_CONFIG, "null argument");
  return guarded([&] { as_ctx(ctx)->cfg.set(dotted_key, json_value); });
}

int dbcr_get_config(dbcr_ctx* ctx, char* buf, size_t bufsize, size_t* needed) {
  if (!ctx) return fail(DBCR_ERR_CONFIG, "null context");
  return guarded([&] {
    std::string text = as_ctx(ctx)->cfg.to_json_text();
    if (needed) *needed = text.size() + 1;
    if (buf && bufsize > 0) {
      std::size_t n = std::min(bufsize - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

int dbcr_make_data(dbcr_ctx* ctx, const char* out_dir) {
  if (!ctx || !out_dir) return fail(DBCR_ERR_CONFIG, "null argument");
  return guarded([&] {
    const dbcr::RunConfig& cfg = as_ctx(ctx)->cfg;
    cfg.validate();
    dbcr::generate_dataset(cfg.data, out_dir);
  });
}

int dbcr_train(dbcr_ctx* ctx, const char* data_root, const char* out_dir) {
  if (!ctx || !data_root || !out_dir) return fail(DBCR_ERR_CONFIG, "null argument");
  return guarded([&] {
    const dbcr::RunConfig& cfg = as_ctx(ctx)->cfg;
    cfg.validate();
    dbcr::nn::Backbone model(cfg.backbone);
    dbcr::Trainer trainer(cfg, model);
    std::filesystem::create_directories(out_dir);
    std::ofstream log(std::filesystem::path(out_dir) / "train_log.txt", std::ios::app);
    if (!log) throw dbcr::IoError(std::string("cannot open training log under ") + out_dir);
    trainer.train_loop(data_root, out_dir, &log);
  });
}

int dbcr_infer(dbcr_ctx* ctx, const char* checkpoint, const char* scene_dir,
               const char* out_dir, int trace) {
  if (!ctx || !checkpoint || !scene_dir || !out_dir) {
    return fail(DBCR_ERR_CONFIG, "null argument");
  }
  return guarded([&] {
    const dbcr::RunConfig& cfg = as_ctx(ctx)->cfg;
    cfg.inference.validate();

    dbcr::CheckpointMeta meta;
    auto model = model_from_checkpoint(checkpoint, &meta);
    dbcr::Schedule sched =
        dbcr::make_schedule(meta.schedule_T, meta.schedule_kind, meta.sde_beta_max);

    dbcr::ImageTriplet scene = dbcr::load_triplet(scene_dir);
    dbcr::InferenceResult r =
        dbcr::run_inference(*model, scene.y, scene.z, sched, cfg.inference.nfe,
                            cfg.inference.mode, cfg.inference.seed, trace != 0);

    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    dbcr::write_tensor_f32(out / "restored.bin", r.restored);
    const std::string tag = "config " + cfg.hash();
    dbcr::write_ppm(out / "restored.ppm", r.restored, cfg.eval.rgb_bands, tag);
    dbcr::write_ppm_grid(out / "comparison.ppm", {scene.y, r.restored, scene.x0},
                         cfg.eval.rgb_bands, tag);
    if (trace) {
      for (std::size_t i = 0; i < r.trace.size(); ++i) {
        dbcr::write_ppm(out / ("trace_" + std::to_string(i) + ".ppm"), r.trace[i],
                        cfg.eval.rgb_bands, tag);
      }
    }
  });
}

int dbcr_eval(dbcr_ctx* ctx, const char* checkpoint, const char* data_root,
              const char* split, const char* out_dir, const char* nfe_sweep,
              int compare_sde) {
  if (!ctx || !checkpoint || !data_root || !split || !out_dir) {
    return fail(DBCR_ERR_CONFIG, "null argument");
  }
  return guarded([&] {
    dbcr::RunConfig cfg = as_ctx(ctx)->cfg;
    cfg.inference.validate();
    cfg.eval.validate();

    dbcr::CheckpointMeta meta;
    auto model = model_from_checkpoint(checkpoint, &meta);
    // The schedule must match the one the checkpoint was trained with.
    cfg.train.T = meta.schedule_T;
    cfg.train.sde_beta_max = meta.sde_beta_max;
    cfg.backbone = meta.backbone;

    dbcr::EvalOptions opts;
    opts.split = split;
    opts.nfe_sweep = parse_sweep(nfe_sweep);
    opts.compare_sde = compare_sde != 0;
    dbcr::run_eval(*model, cfg, data_root, out_dir, opts);
  });
}

const char* dbcr_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
