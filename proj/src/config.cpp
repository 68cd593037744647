#include "config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace dbcr {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known) {
      if (it.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("unknown config key '" + where + "." + it.key() + "'");
  }
}

template <typename T>
void get_to(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(dst);
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

void parse_data(const json& j, DataGenConfig& c) {
  reject_unknown(j,
                 {"count_train", "count_val", "count_test", "height", "width", "opt_channels",
                  "terrain_octaves", "coverage_min", "coverage_max", "opacity_min", "opacity_max",
                  "sar_noise", "seed"},
                 "data");
  get_to(j, "count_train", c.count_train, "data");
  get_to(j, "count_val", c.count_val, "data");
  get_to(j, "count_test", c.count_test, "data");
  get_to(j, "height", c.height, "data");
  get_to(j, "width", c.width, "data");
  get_to(j, "opt_channels", c.opt_channels, "data");
  get_to(j, "terrain_octaves", c.terrain_octaves, "data");
  get_to(j, "coverage_min", c.coverage_min, "data");
  get_to(j, "coverage_max", c.coverage_max, "data");
  get_to(j, "opacity_min", c.opacity_min, "data");
  get_to(j, "opacity_max", c.opacity_max, "data");
  get_to(j, "sar_noise", c.sar_noise, "data");
  get_to(j, "seed", c.seed, "data");
}

void parse_backbone(const json& j, nn::BackboneConfig& c) {
  reject_unknown(j,
                 {"opt_channels_in", "sar_channels_in", "widths", "enc_blocks", "dec_blocks",
                  "fusion_heads", "time_embed_dim"},
                 "backbone");
  get_to(j, "opt_channels_in", c.opt_channels_in, "backbone");
  get_to(j, "sar_channels_in", c.sar_channels_in, "backbone");
  get_to(j, "widths", c.widths, "backbone");
  get_to(j, "enc_blocks", c.enc_blocks, "backbone");
  get_to(j, "dec_blocks", c.dec_blocks, "backbone");
  get_to(j, "fusion_heads", c.fusion_heads, "backbone");
  get_to(j, "time_embed_dim", c.time_embed_dim, "backbone");
}

void parse_train(const json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"epochs", "batch_size", "learning_rate", "T", "optimizer", "seed",
                  "sde_beta_max", "checkpoint_every"},
                 "train");
  get_to(j, "epochs", c.epochs, "train");
  get_to(j, "batch_size", c.batch_size, "train");
  get_to(j, "learning_rate", c.learning_rate, "train");
  get_to(j, "T", c.T, "train");
  get_to(j, "optimizer", c.optimizer, "train");
  get_to(j, "seed", c.seed, "train");
  get_to(j, "checkpoint_every", c.checkpoint_every, "train");
  if (j.contains("sde_beta_max")) {
    if (j.at("sde_beta_max").is_null()) {
      c.sde_beta_max.reset();
    } else {
      double v;
      get_to(j, "sde_beta_max", v, "train");
      c.sde_beta_max = v;
    }
  }
}

void parse_inference(const json& j, InferenceConfig& c) {
  reject_unknown(j, {"nfe", "mode", "seed"}, "inference");
  get_to(j, "nfe", c.nfe, "inference");
  get_to(j, "mode", c.mode, "inference");
  get_to(j, "seed", c.seed, "inference");
}

void parse_eval(const json& j, EvalConfig& c) {
  reject_unknown(j, {"rgb_bands", "ssim_rgb_only", "cloud_threshold"}, "eval");
  get_to(j, "rgb_bands", c.rgb_bands, "eval");
  get_to(j, "ssim_rgb_only", c.ssim_rgb_only, "eval");
  get_to(j, "cloud_threshold", c.cloud_threshold, "eval");
}

json dump_config(const RunConfig& c) {
  json j;
  j["data"] = {{"count_train", c.data.count_train},
               {"count_val", c.data.count_val},
               {"count_test", c.data.count_test},
               {"height", c.data.height},
               {"width", c.data.width},
               {"opt_channels", c.data.opt_channels},
               {"terrain_octaves", c.data.terrain_octaves},
               {"coverage_min", c.data.coverage_min},
               {"coverage_max", c.data.coverage_max},
               {"opacity_min", c.data.opacity_min},
               {"opacity_max", c.data.opacity_max},
               {"sar_noise", c.data.sar_noise},
               {"seed", c.data.seed}};
  j["backbone"] = {{"opt_channels_in", c.backbone.opt_channels_in},
                   {"sar_channels_in", c.backbone.sar_channels_in},
                   {"widths", c.backbone.widths},
                   {"enc_blocks", c.backbone.enc_blocks},
                   {"dec_blocks", c.backbone.dec_blocks},
                   {"fusion_heads", c.backbone.fusion_heads},
                   {"time_embed_dim", c.backbone.time_embed_dim}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"T", c.train.T},
                {"optimizer", c.train.optimizer},
                {"seed", c.train.seed},
                {"sde_beta_max", c.train.sde_beta_max ? json(*c.train.sde_beta_max) : json()},
                {"checkpoint_every", c.train.checkpoint_every}};
  j["inference"] = {{"nfe", c.inference.nfe}, {"mode", c.inference.mode},
                    {"seed", c.inference.seed}};
  j["eval"] = {{"rgb_bands", c.eval.rgb_bands},
               {"ssim_rgb_only", c.eval.ssim_rgb_only},
               {"cloud_threshold", c.eval.cloud_threshold}};
  return j;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || T < 1 || checkpoint_every < 1) {
    throw ConfigError("train: epochs, batch_size, T, checkpoint_every must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
  if (optimizer != "adam") throw ConfigError("train: unsupported optimizer '" + optimizer + "'");
  if (sde_beta_max && *sde_beta_max < 0.0) throw ConfigError("train: sde_beta_max must be >= 0");
}

void InferenceConfig::validate() const {
  if (nfe < 1) throw ConfigError("inference: nfe must be >= 1");
  if (mode != "ode" && mode != "sde") {
    throw ConfigError("inference: mode must be 'ode' or 'sde', got '" + mode + "'");
  }
}

void EvalConfig::validate() const {
  if (cloud_threshold < 0.0 || cloud_threshold > 1.0) {
    throw ConfigError("eval: cloud_threshold outside [0,1]");
  }
}

void RunConfig::validate() const {
  try {
    backbone.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("backbone: ") + e.what());
  }
  train.validate();
  inference.validate();
  eval.validate();
  DataGenConfig d = data;
  if (d.count_train + d.count_val + d.count_test <= 0 || d.count_train < 0 || d.count_val < 0 ||
      d.count_test < 0) {
    throw ConfigError("data: scene counts must be nonnegative and nonzero in total");
  }
  SyntheticSceneParams probe;
  probe.height = d.height;
  probe.width = d.width;
  probe.opt_channels = d.opt_channels;
  probe.terrain_octaves = d.terrain_octaves;
  probe.cloud_opacity_min = d.opacity_min;
  probe.cloud_opacity_max = d.opacity_max;
  probe.cloud_coverage_target = std::clamp(d.coverage_min, 0.0, 1.0);
  probe.sar_noise_level = d.sar_noise;
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("data: ") + e.what());
  }
  if (d.coverage_min < 0.0 || d.coverage_max > 1.0 || d.coverage_min > d.coverage_max) {
    throw ConfigError("data: bad coverage range");
  }
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(j, {"data", "backbone", "train", "inference", "eval"}, "<root>");
  RunConfig c;
  if (j.contains("data")) parse_data(j.at("data"), c.data);
  if (j.contains("backbone")) parse_backbone(j.at("backbone"), c.backbone);
  if (j.contains("train")) parse_train(j.at("train"), c.train);
  if (j.contains("inference")) parse_inference(j.at("inference"), c.inference);
  if (j.contains("eval")) parse_eval(j.at("eval"), c.eval);
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const { return dump_config(*this).dump(2); }

void RunConfig::set(const std::string& dotted_key, const std::string& json_value) {
  auto dot = dotted_key.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("config key must be 'section.key', got '" + dotted_key + "'");
  }
  json value;
  try {
    value = json::parse(json_value);
  } catch (const json::exception&) {
    value = json(json_value);  // bare strings are accepted as-is
  }
  json full = dump_config(*this);
  std::string section = dotted_key.substr(0, dot);
  std::string key = dotted_key.substr(dot + 1);
  if (!full.contains(section) || !full.at(section).contains(key)) {
    throw ConfigError("unknown config key '" + dotted_key + "'");
  }
  full[section][key] = value;
  *this = from_json_text(full.dump());
}

std::string RunConfig::hash() const { return fnv1a_hex(dump_config(*this).dump()); }

std::string default_data_root() {
  const char* env = std::getenv("DBCR_DATA_ROOT");
  return env && *env ? std::string(env) : std::string("./data");
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace dbcr
