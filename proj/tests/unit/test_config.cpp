#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "levy_procure/config.hpp"
#include "levy_procure/errors.hpp"

using namespace levy_procure;
using nlohmann::json;

namespace {

std::string message_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults are the baseline run") {
  const RunConfig c;
  CHECK(c.market.r == 0.05);
  CHECK(c.market.lambda == 5.0);
  CHECK(c.market.gamma == 0.05);
  CHECK(c.market.alpha_s == 0.7);
  CHECK(std::get<GeometricBrownian>(c.model).sigma == 0.2);
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("round trip through json") {
  RunConfig c;
  c.model = JumpDiffusion{0.7, 0.2, 2.0, 9.0};
  c.market.c = 1.5;
  c.mc.seed = 77;
  c.mc.threads = 2;
  c.output.format = OutputFormat::json;
  const json j = to_json(c);
  CHECK(j.at("schema_version") == kSchemaVersion);
  const RunConfig back = config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(std::get<JumpDiffusion>(back.model).ell == 9.0);
}

TEST_CASE("partial overrides keep the rest") {
  const RunConfig c = config_from_json(json{{"model", {{"sigma", 0.5}}}, {"mc", {{"n_paths", 10}}}});
  CHECK(std::get<GeometricBrownian>(c.model).mu == 0.7);
  CHECK(std::get<GeometricBrownian>(c.model).sigma == 0.5);
  CHECK(c.mc.n_paths == 10);
  CHECK(c.mc.dt == 1e-3);
}

TEST_CASE("report objects are accepted as configs") {
  RunConfig c;
  c.mc.seed = 5;
  const json report{{"schema_version", kSchemaVersion}, {"command", "value"}, {"config", to_json(c)}};
  CHECK(config_from_json(report).mc.seed == 5);
}

TEST_CASE("errors name the field") {
  CHECK(message_of(json{{"market", {{"r", "x"}}}}).rfind("market.r", 0) == 0);
  CHECK(message_of(json{{"mc", {{"n_paths", -3}}}}).rfind("mc.n_paths", 0) == 0);
  CHECK(message_of(json{{"model", {{"type", "heston"}}}}).rfind("model.type", 0) == 0);
  CHECK(message_of(json{{"output", {{"format", "xml"}}}}).rfind("output.format", 0) == 0);
  CHECK(message_of(json{{"schema_version", 9}}).rfind("schema_version", 0) == 0);
  CHECK(message_of(json::array()).find("<root>") != std::string::npos);

  RunConfig c;
  c.market.alpha_s = 1.5;
  try {
    validate_config(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("market.alpha_s", 0) == 0);
  }
  c = RunConfig{};
  c.model = GeometricBrownian{0.7, -1};
  CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("config files") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "levy_procure_cfg_good.json";
  const auto bad = dir / "levy_procure_cfg_bad.json";
  std::ofstream(good) << R"({"market": {"lambda": 0.3}, "model": {"type": "deterministic", "mu": -0.5}})";
  std::ofstream(bad) << R"({"market": {"lambda": )";
  const RunConfig c = load_config(good.string());
  CHECK(c.market.lambda == 0.3);
  CHECK(std::holds_alternative<Deterministic>(c.model));
  CHECK_THROWS_AS(load_config(bad.string()), ConfigError);
  CHECK_THROWS_AS(load_config((dir / "levy_procure_missing.json").string()), ConfigError);
}

TEST_CASE("seed from the environment") {
  RunConfig c;
  ::setenv(kSeedEnvVar, "31337", 1);
  apply_seed_env(c);
  CHECK(c.mc.seed == 31337);
  ::setenv(kSeedEnvVar, "12x", 1);
  CHECK_THROWS_AS(apply_seed_env(c), ConfigError);
  ::unsetenv(kSeedEnvVar);
}
