// Command-line front end for the cloud-removal library. Talks to the shared
// library exclusively through its C interface.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbcr/dbcr.h"

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> overrides;  // section.key=json_value
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config_file, "JSON configuration file");
  cmd->add_option("--set", c.overrides,
                  "Configuration override section.key=value (repeatable; applied after --config)");
}

int apply_common(dbcr_ctx* ctx, const Common& c) {
  if (!c.config_file.empty()) {
    int rc = dbcr_load_config(ctx, c.config_file.c_str());
    if (rc != DBCR_OK) return rc;
  }
  for (const std::string& kv : c.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n", kv.c_str());
      return DBCR_ERR_CONFIG;
    }
    int rc = dbcr_set(ctx, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (rc != DBCR_OK) return rc;
  }
  return DBCR_OK;
}

int finish(int rc) {
  if (rc != DBCR_OK) std::fprintf(stderr, "error: %s\n", dbcr_last_error());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-bridge cloud removal for optical satellite imagery"};
  app.require_subcommand(1);

  Common c_data, c_train, c_infer, c_eval;

  // make-data
  auto* make_data = app.add_subcommand("make-data", "Generate the synthetic dataset");
  std::string data_out = "data";
  make_data->add_option("-o,--out", data_out, "Dataset output directory");
  add_common(make_data, c_data);

  // train
  auto* train = app.add_subcommand("train", "Train a restoration model");
  std::string train_data = "data", train_out = "runs/train";
  train->add_option("-d,--data", train_data, "Dataset root");
  train->add_option("-o,--out", train_out, "Checkpoint/log output directory");
  add_common(train, c_train);

  // infer
  auto* infer = app.add_subcommand("infer", "Restore a single scene");
  std::string infer_ckpt, infer_scene, infer_out = "runs/infer";
  int infer_nfe = 0;
  std::string infer_mode;
  bool infer_trace = false;
  infer->add_option("-k,--checkpoint", infer_ckpt, "Model checkpoint")->required();
  infer->add_option("-i,--scene", infer_scene, "Scene directory (x0/y/z/meta layout)")->required();
  infer->add_option("-o,--out", infer_out, "Output directory");
  infer->add_option("-n,--nfe", infer_nfe, "Sampling step count");
  infer->add_option("-m,--mode", infer_mode, "Sampler: ode or sde");
  infer->add_flag("--trace", infer_trace, "Also write every intermediate state");
  add_common(infer, c_infer);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint over a dataset split");
  std::string eval_ckpt, eval_data = "data", eval_split = "test", eval_out = "runs/eval";
  std::string eval_sweep;
  bool eval_compare_sde = false;
  eval->add_option("-k,--checkpoint", eval_ckpt, "Model checkpoint")->required();
  eval->add_option("-d,--data", eval_data, "Dataset root");
  eval->add_option("-s,--split", eval_split, "Split: train, val, or test");
  eval->add_option("-o,--out", eval_out, "Output directory");
  eval->add_option("--nfe-sweep", eval_sweep, "Comma-separated step counts, e.g. 1,5,10");
  eval->add_flag("--compare-sde", eval_compare_sde, "Evaluate both samplers");
  add_common(eval, c_eval);

  CLI11_PARSE(app, argc, argv);

  dbcr_ctx* ctx = dbcr_ctx_create();
  if (!ctx) {
    std::fprintf(stderr, "error: cannot create context\n");
    return DBCR_ERR_NUMERIC;
  }
  int rc = DBCR_OK;
  if (make_data->parsed()) {
    rc = apply_common(ctx, c_data);
    if (rc == DBCR_OK) rc = dbcr_make_data(ctx, data_out.c_str());
  } else if (train->parsed()) {
    rc = apply_common(ctx, c_train);
    if (rc == DBCR_OK) rc = dbcr_train(ctx, train_data.c_str(), train_out.c_str());
  } else if (infer->parsed()) {
    rc = apply_common(ctx, c_infer);
    if (rc == DBCR_OK && infer_nfe > 0) {
      rc = dbcr_set(ctx, "inference.nfe", std::to_string(infer_nfe).c_str());
    }
    if (rc == DBCR_OK && !infer_mode.empty()) {
      rc = dbcr_set(ctx, "inference.mode", infer_mode.c_str());
    }
    if (rc == DBCR_OK) {
      rc = dbcr_infer(ctx, infer_ckpt.c_str(), infer_scene.c_str(), infer_out.c_str(),
                      infer_trace ? 1 : 0);
    }
  } else if (eval->parsed()) {
    rc = apply_common(ctx, c_eval);
    if (rc == DBCR_OK) {
      rc = dbcr_eval(ctx, eval_ckpt.c_str(), eval_data.c_str(), eval_split.c_str(),
                     eval_out.c_str(), eval_sweep.empty() ? nullptr : eval_sweep.c_str(),
                     eval_compare_sde ? 1 : 0);
    }
  }
  rc = finish(rc);
  dbcr_ctx_free(ctx);
  return rc;
}
