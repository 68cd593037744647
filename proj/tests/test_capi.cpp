#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "dbcr/dbcr.h"

namespace fs = std::filesystem;

TEST_CASE("context configuration surface") {
  dbcr_ctx* ctx = dbcr_ctx_create();
  REQUIRE(ctx != nullptr);

  SUBCASE("defaults serialize as JSON") {
    size_t needed = 0;
    REQUIRE(dbcr_get_config(ctx, nullptr, 0, &needed) == DBCR_OK);
    CHECK(needed > 2);
    std::vector<char> buf(needed);
    REQUIRE(dbcr_get_config(ctx, buf.data(), buf.size(), nullptr) == DBCR_OK);
    std::string text(buf.data());
    CHECK(text.find("\"train\"") != std::string::npos);
    CHECK(text.find("\"inference\"") != std::string::npos);
  }

  SUBCASE("overrides apply and are validated") {
    CHECK(dbcr_set(ctx, "train.epochs", "3") == DBCR_OK);
    CHECK(dbcr_set(ctx, "inference.mode", "sde") == DBCR_OK);
    CHECK(dbcr_set(ctx, "inference.mode", "banana") == DBCR_ERR_CONFIG);
    CHECK(std::strlen(dbcr_last_error()) > 0);
    CHECK(dbcr_set(ctx, "train.no_such_key", "1") == DBCR_ERR_CONFIG);
    CHECK(dbcr_set(ctx, "nodot", "1") == DBCR_ERR_CONFIG);
    CHECK(dbcr_set(ctx, "train.epochs", "-4") == DBCR_ERR_CONFIG);
  }

  SUBCASE("null arguments are rejected") {
    CHECK(dbcr_load_config(nullptr, "x") == DBCR_ERR_CONFIG);
    CHECK(dbcr_set(ctx, nullptr, "1") == DBCR_ERR_CONFIG);
    CHECK(dbcr_make_data(ctx, nullptr) == DBCR_ERR_CONFIG);
  }

  SUBCASE("missing config file is an I/O error") {
    CHECK(dbcr_load_config(ctx, "/nonexistent/config.json") == DBCR_ERR_IO);
  }

  dbcr_ctx_free(ctx);
}

TEST_CASE("end-to-end through the C interface on a miniature run") {
  fs::path root = fs::temp_directory_path() / "dbcr_test_capi";
  fs::remove_all(root);
  fs::create_directories(root);

  dbcr_ctx* ctx = dbcr_ctx_create();
  REQUIRE(ctx != nullptr);
  // Miniature setup so this stays fast: tiny network, tiny dataset.
  REQUIRE(dbcr_set(ctx, "data.count_train", "4") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "data.count_val", "2") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "data.count_test", "2") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "data.height", "16") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "data.width", "16") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "backbone.widths", "[4,8]") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "backbone.enc_blocks", "[1,1]") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "backbone.dec_blocks", "[1,1]") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "backbone.fusion_heads", "[1,2]") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "backbone.time_embed_dim", "4") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "train.epochs", "1") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "train.batch_size", "2") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "train.T", "50") == DBCR_OK);
  REQUIRE(dbcr_set(ctx, "train.sde_beta_max", "0.1") == DBCR_OK);

  const std::string data = (root / "data").string();
  const std::string run = (root / "run").string();
  REQUIRE(dbcr_make_data(ctx, data.c_str()) == DBCR_OK);
  CHECK(fs::exists(root / "data" / "manifest.txt"));

  REQUIRE(dbcr_train(ctx, data.c_str(), run.c_str()) == DBCR_OK);
  const fs::path ckpt = root / "run" / "best.ckpt";
  CHECK(fs::exists(ckpt));
  CHECK(fs::exists(root / "run" / "train_log.txt"));

  const std::string scene = (root / "data" / "scenes" / "scene_00006").string();
  const std::string infer_out = (root / "infer").string();
  REQUIRE(dbcr_set(ctx, "inference.nfe", "2") == DBCR_OK);
  REQUIRE(dbcr_infer(ctx, ckpt.string().c_str(), scene.c_str(), infer_out.c_str(), 1) ==
          DBCR_OK);
  CHECK(fs::exists(root / "infer" / "restored.bin"));
  CHECK(fs::exists(root / "infer" / "restored.ppm"));
  CHECK(fs::exists(root / "infer" / "comparison.ppm"));
  CHECK(fs::exists(root / "infer" / "trace_0.ppm"));

  const std::string eval_out = (root / "eval").string();
  REQUIRE(dbcr_eval(ctx, ckpt.string().c_str(), data.c_str(), "test", eval_out.c_str(), "1,2",
                    1) == DBCR_OK);
  CHECK(fs::exists(root / "eval" / "report.json"));

  // Unknown split fails cleanly.
  CHECK(dbcr_eval(ctx, ckpt.string().c_str(), data.c_str(), "nope", eval_out.c_str(), nullptr,
                  0) == DBCR_ERR_CONFIG);
  // Malformed sweep list fails cleanly.
  CHECK(dbcr_eval(ctx, ckpt.string().c_str(), data.c_str(), "test", eval_out.c_str(), "1,x",
                  0) == DBCR_ERR_CONFIG);

  dbcr_ctx_free(ctx);
  fs::remove_all(root);
}
