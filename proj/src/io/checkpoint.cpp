#include "io/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace dbcr {

using nlohmann::json;

namespace {

constexpr const char* kHeader = "DBCR-CKPT v1";
constexpr const char* kBinaryMarker = "BINARY";

json backbone_to_json(const nn::BackboneConfig& c) {
  return json{{"opt_channels_in", c.opt_channels_in},
              {"sar_channels_in", c.sar_channels_in},
              {"widths", c.widths},
              {"enc_blocks", c.enc_blocks},
              {"dec_blocks", c.dec_blocks},
              {"fusion_heads", c.fusion_heads},
              {"time_embed_dim", c.time_embed_dim}};
}

nn::BackboneConfig backbone_from_json(const json& j) {
  nn::BackboneConfig c;
  j.at("opt_channels_in").get_to(c.opt_channels_in);
  j.at("sar_channels_in").get_to(c.sar_channels_in);
  j.at("widths").get_to(c.widths);
  j.at("enc_blocks").get_to(c.enc_blocks);
  j.at("dec_blocks").get_to(c.dec_blocks);
  j.at("fusion_heads").get_to(c.fusion_heads);
  j.at("time_embed_dim").get_to(c.time_embed_dim);
  return c;
}

struct ParsedHeader {
  CheckpointMeta meta;
  std::vector<std::pair<std::string, std::vector<int>>> index;
  bool has_optimizer = false;
  long long opt_step = 0;
  std::streampos blob_start = 0;
};

ParsedHeader read_header(const std::filesystem::path& file, std::ifstream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw IoError("not a checkpoint file: " + file.string());
  }
  if (!std::getline(in, line)) throw IoError("truncated checkpoint header: " + file.string());
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw IoError("bad checkpoint metadata in " + file.string() + ": " + e.what());
  }
  ParsedHeader h;
  try {
    h.meta.backbone = backbone_from_json(j.at("backbone"));
    j.at("schedule").at("T").get_to(h.meta.schedule_T);
    j.at("schedule").at("kind").get_to(h.meta.schedule_kind);
    if (j.at("schedule").contains("beta_max") && !j.at("schedule").at("beta_max").is_null()) {
      h.meta.sde_beta_max = j.at("schedule").at("beta_max").get<double>();
    }
    j.at("step").get_to(h.meta.step);
    j.at("epoch").get_to(h.meta.epoch);
    j.at("seed").get_to(h.meta.seed);
    j.at("config_hash").get_to(h.meta.config_hash);
    for (const auto& entry : j.at("tensors")) {
      h.index.emplace_back(entry.at("name").get<std::string>(),
                           entry.at("shape").get<std::vector<int>>());
    }
    j.at("has_optimizer").get_to(h.has_optimizer);
    if (h.has_optimizer) j.at("opt_step").get_to(h.opt_step);
  } catch (const json::exception& e) {
    throw IoError("incomplete checkpoint metadata in " + file.string() + ": " + e.what());
  }
  if (!std::getline(in, line) || line != kBinaryMarker) {
    throw IoError("missing binary marker in " + file.string());
  }
  h.blob_start = in.tellg();
  return h;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& file, nn::Backbone& model,
                     const CheckpointMeta& meta, const nn::Adam* optimizer) {
  if (file.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
  }
  nn::ParamList params;
  model.collect_params(params);

  json j;
  j["backbone"] = backbone_to_json(model.config());
  j["schedule"] = {{"T", meta.schedule_T},
                   {"kind", meta.schedule_kind},
                   {"beta_max", meta.sde_beta_max ? json(*meta.sde_beta_max) : json()}};
  j["step"] = meta.step;
  j["epoch"] = meta.epoch;
  j["seed"] = meta.seed;
  j["config_hash"] = meta.config_hash;
  json index = json::array();
  for (const nn::Param* p : params) {
    std::vector<int> shape;
    for (int i = 0; i < p->value.ndim(); ++i) shape.push_back(p->value.dim(i));
    index.push_back({{"name", p->name}, {"shape", shape}});
  }
  j["tensors"] = index;
  j["has_optimizer"] = optimizer != nullptr;
  if (optimizer) j["opt_step"] = optimizer->step_count();

  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + file.string());
  out << kHeader << "\n" << j.dump() << "\n" << kBinaryMarker << "\n";
  for (const nn::Param* p : params) {
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (optimizer) {
    std::vector<double> state = optimizer->serialize_state();
    out.write(reinterpret_cast<const char*>(state.data()),
              static_cast<std::streamsize>(state.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed: " + file.string());
}

CheckpointMeta load_checkpoint(const std::filesystem::path& file, nn::Backbone& model,
                               nn::Adam* optimizer, const std::string& expect_config_hash) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + file.string());
  ParsedHeader h = read_header(file, in);

  if (!expect_config_hash.empty() && h.meta.config_hash != expect_config_hash) {
    throw ConfigError("checkpoint config hash mismatch: file has " + h.meta.config_hash +
                      ", expected " + expect_config_hash);
  }
  if (!(model.config() == h.meta.backbone)) {
    throw ConfigError("checkpoint backbone configuration does not match the model: " +
                      file.string());
  }

  nn::ParamList params;
  model.collect_params(params);
  if (params.size() != h.index.size()) {
    throw IoError("checkpoint tensor count mismatch in " + file.string());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->name != h.index[i].first) {
      throw IoError("checkpoint tensor order mismatch at '" + h.index[i].first + "' vs '" +
                    params[i]->name + "'");
    }
    Tensor expect(h.index[i].second);
    if (expect.size() != params[i]->value.size()) {
      throw IoError("checkpoint tensor shape mismatch for '" + params[i]->name + "'");
    }
  }
  for (nn::Param* p : params) {
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!in) throw IoError("truncated parameter blob in " + file.string());
  }
  if (optimizer) {
    if (!h.has_optimizer) {
      throw IoError("checkpoint has no optimizer state: " + file.string());
    }
    std::size_t n = 0;
    for (const nn::Param* p : params) n += p->value.size();
    std::vector<double> state(2 * n);
    in.read(reinterpret_cast<char*>(state.data()),
            static_cast<std::streamsize>(state.size() * sizeof(double)));
    if (!in) throw IoError("truncated optimizer state in " + file.string());
    optimizer->restore_state(state, h.opt_step);
  }
  return h.meta;
}

CheckpointMeta peek_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + file.string());
  return read_header(file, in).meta;
}

}  // namespace dbcr
