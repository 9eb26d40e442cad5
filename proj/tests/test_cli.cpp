#include <cstdlib>

#include <json.hpp>

#include "atnet/cli/cli.hpp"
#include "atnet/cli/config.hpp"
#include "atnet/common/error.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace atnet;
using namespace atnet::cli;
using test_util::slurp;
using test_util::TempDir;

namespace {

const char* kSmallConfig = R"({
  "synth": {"subjects": 3, "clips_per_subject": 3},
  "train": {"epochs": 2}
})";

int run(std::vector<std::string> args) {
  args.push_back("--quiet");
  return run_cli(args);
}

}  // namespace

TEST_CASE("binary without arguments prints usage and fails") {
  TempDir tmp("cli_usage");
  const auto err = tmp / "err.txt";
  const std::string cmd = std::string(ATNET_CLI_BINARY) + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CHECK(status != 0);
  CHECK(slurp(err).find("synth") != std::string::npos);
}

TEST_CASE("unknown subcommands and flags are usage errors") {
  CHECK(run({"frobnicate"}) == kUsage);
  CHECK(run({"synth", "--no-such-flag"}) == kUsage);
  CHECK(run({"synth", "--protocol", "xyz"}) == kUsage);
  CHECK(run({"report"}) == kUsage);
}

TEST_CASE("config file keys are checked") {
  RunConfig c;
  CHECK_THROWS_AS(apply_config_json(c, R"({"trian": {}})"), ConfigError);
  CHECK_THROWS_AS(apply_config_json(c, R"({"train": {"epochs": "ten"}})"), ConfigError);
  CHECK_THROWS_AS(apply_config_json(c, "{"), ConfigError);
  apply_config_json(c, R"({"seed": 3, "train": {"epochs": 4}, "adm": {"grid": 4}, "half_width": 8})");
  c.finalize();
  CHECK(c.seed == 3);
  CHECK(c.train.epochs == 4);
  CHECK(c.model.temporal.input_dim == 32);
  CHECK(c.model.temporal.steps == 16);
}

TEST_CASE("resolved config round trips through json") {
  RunConfig a;
  apply_config_json(a, kSmallConfig);
  a.finalize();
  RunConfig b;
  apply_config_json(b, config_to_json(a));
  b.finalize();
  CHECK(config_to_json(a) == config_to_json(b));
}

TEST_CASE("paper scale switches the network size") {
  RunConfig c;
  c.apply_paper_scale();
  c.finalize();
  CHECK(c.model.spatial.input_size == 224);
  CHECK(c.model.embed_dim == 512);
  CHECK(c.train.augment.max_shift_px == 10);
}

TEST_CASE("incompatible frame size and grid is a config error") {
  RunConfig c;
  c.frame_size = 30;
  CHECK_THROWS_AS(c.finalize(), ConfigError);
}

TEST_CASE("synth is deterministic and refuses to overwrite") {
  TempDir a("cli_synth_a"), b("cli_synth_b");
  test_util::spit(a / "small.json", kSmallConfig);
  const auto cfg = (a / "small.json").string();
  REQUIRE(run({"synth", "--config", cfg, "--seed", "7", "--out", a.path().string()}) == kOk);
  REQUIRE(run({"synth", "--config", cfg, "--seed", "7", "--out", b.path().string()}) == kOk);
  CHECK(slurp(a / "data/manifest.csv") == slurp(b / "data/manifest.csv"));
  CHECK(slurp(a / "data/frames/SYNTH-A/s01_c01/0000.png") == slurp(b / "data/frames/SYNTH-A/s01_c01/0000.png"));
  CHECK(run({"synth", "--config", cfg, "--out", a.path().string()}) == kUsage);
  CHECK(run({"synth", "--config", cfg, "--out", a.path().string(), "--force"}) == kOk);
}

TEST_CASE("missing inputs are data errors") {
  TempDir tmp("cli_missing");
  CHECK(run({"extract", "--out", tmp.path().string()}) == kDataError);
  CHECK(run({"train", "--out", tmp.path().string()}) == kDataError);
}

TEST_CASE("synth, extract, train, eval and report end to end") {
  TempDir tmp("cli_e2e");
  test_util::spit(tmp / "small.json", kSmallConfig);
  const auto out = tmp.path().string();
  const auto cfg = (tmp / "small.json").string();
  REQUIRE(run({"synth", "--config", cfg, "--out", out}) == kOk);
  REQUIRE(run({"extract", "--config", cfg, "--out", out, "--jobs", "2"}) == kOk);
  CHECK(std::filesystem::exists(tmp / "features/SYNTH-B/s02_c02.admf"));
  CHECK(slurp(tmp / "data/manifest.load_report.txt").find("loaded 9") != std::string::npos);
  CHECK(run({"extract", "--config", cfg, "--out", out}) == kUsage);

  REQUIRE(run({"train", "--config", cfg, "--out", out, "--stream", "temporal"}) == kOk);
  CHECK(slurp(tmp / "model/history.csv").starts_with("epoch,lr,loss,acc\n"));

  REQUIRE(run({"eval", "--config", cfg, "--out", out, "--protocol", "cde", "--streams", "fusion,temporal"}) == kOk);
  const auto report = nlohmann::json::parse(slurp(tmp / "eval/report_cde.json"));
  REQUIRE(report["streams"].size() == 2);
  const auto& pooled = report["streams"][0]["pooled"];
  CHECK(pooled["n"] == 9);
  CHECK(pooled["uf1"].is_number());
  CHECK(pooled["uar"].is_number());
  CHECK(report["streams"][0]["folds"].size() == 3);

  REQUIRE(run({"eval", "--config", cfg, "--out", out, "--checkpoint", (tmp / "model/checkpoint.atnw").string()}) ==
          kOk);
  CHECK(std::filesystem::exists(tmp / "eval/report_checkpoint.json"));
  CHECK(run({"report", "--report", (tmp / "eval/report_cde.json").string()}) == kOk);
  CHECK(run({"eval", "--config", cfg, "--out", out, "--protocol", "hde"}) == kOk);
}
