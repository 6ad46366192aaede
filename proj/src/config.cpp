#include "levy_procure/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <type_traits>
#include <fstream>
#include <limits>
#include <sstream>

#include "levy_procure/errors.hpp"

namespace levy_procure {

using nlohmann::json;

namespace {

void read_number(const json& obj, const std::string& section, const char* key, double& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(section + "." + key + ": expected a number");
  target = v.get<double>();
}

template <class Int>
void read_unsigned(const json& obj, const std::string& section, const char* key, Int& target) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) {
    const auto raw = v.get<std::uint64_t>();
    if (raw > std::numeric_limits<Int>::max()) throw ConfigError(section + "." + key + ": value too large");
    target = static_cast<Int>(raw);
    return;
  }
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    const auto raw = static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (raw > std::numeric_limits<Int>::max()) throw ConfigError(section + "." + key + ": value too large");
    target = static_cast<Int>(raw);
    return;
  }
  throw ConfigError(section + "." + key + ": expected a non-negative integer");
}

const json& section(const json& j, const char* name) {
  const json& s = j.at(name);
  if (!s.is_object()) throw ConfigError(std::string(name) + ": expected an object");
  return s;
}

}  // namespace

RunConfig config_from_json(const json& j, const RunConfig& base) {
  if (!j.is_object()) throw ConfigError("<root>: expected a JSON object");
  if (j.contains("schema_version")) {
    const json& v = j.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
      throw ConfigError("schema_version: unsupported, expected " + std::to_string(kSchemaVersion));
  }
  // A report produced by the CLI carries its resolved run under "config".
  if (j.contains("config") && !j.contains("market") && !j.contains("model") && !j.contains("mc")) {
    if (!j.at("config").is_object()) throw ConfigError("config: expected an object");
    return config_from_json(j.at("config"), base);
  }
  RunConfig cfg = base;

  if (j.contains("market")) {
    const json& m = section(j, "market");
    auto& mk = cfg.market;
    read_number(m, "market", "r", mk.r);
    read_number(m, "market", "lambda", mk.lambda);
    read_number(m, "market", "epsilon", mk.epsilon);
    read_number(m, "market", "gamma", mk.gamma);
    read_number(m, "market", "c", mk.c);
    read_number(m, "market", "alpha", mk.alpha);
    read_number(m, "market", "alpha_p", mk.alpha_p);
    read_number(m, "market", "alpha_s", mk.alpha_s);
    read_number(m, "market", "y0", mk.y0);
  }

  if (j.contains("model")) {
    const json& m = section(j, "model");
    std::string type = model_name(cfg.model);
    if (m.contains("type")) {
      if (!m.at("type").is_string()) throw ConfigError("model.type: expected a string");
      type = m.at("type").get<std::string>();
    }
    // Start from the base model's fields so partial overrides work.
    double mu = 0.0, sigma = 0.0, psi = 0.0, ell = 2.0;
    std::visit(
        [&](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          mu = b.mu;
          if constexpr (!std::is_same_v<T, Deterministic>) sigma = b.sigma;
          if constexpr (std::is_same_v<T, JumpDiffusion>) {
            psi = b.psi;
            ell = b.ell;
          }
        },
        cfg.model);
    read_number(m, "model", "mu", mu);
    read_number(m, "model", "sigma", sigma);
    read_number(m, "model", "psi", psi);
    read_number(m, "model", "ell", ell);
    if (type == "gbm") {
      cfg.model = GeometricBrownian{mu, sigma};
    } else if (type == "jump_diffusion") {
      cfg.model = JumpDiffusion{mu, sigma, psi, ell};
    } else if (type == "deterministic") {
      cfg.model = Deterministic{mu};
    } else {
      throw ConfigError("model.type: expected gbm, jump_diffusion or deterministic, got '" + type + "'");
    }
  }

  if (j.contains("mc")) {
    const json& m = section(j, "mc");
    read_unsigned(m, "mc", "n_paths", cfg.mc.n_paths);
    read_number(m, "mc", "horizon", cfg.mc.horizon);
    read_number(m, "mc", "dt", cfg.mc.dt);
    read_unsigned(m, "mc", "seed", cfg.mc.seed);
    read_unsigned(m, "mc", "threads", cfg.mc.threads);
  }

  if (j.contains("output")) {
    const json& o = section(j, "output");
    if (o.contains("format")) {
      if (!o.at("format").is_string()) throw ConfigError("output.format: expected a string");
      const auto f = o.at("format").get<std::string>();
      if (f == "csv") cfg.output.format = OutputFormat::csv;
      else if (f == "json") cfg.output.format = OutputFormat::json;
      else throw ConfigError("output.format: expected csv or json, got '" + f + "'");
    }
    if (o.contains("path")) {
      if (!o.at("path").is_string()) throw ConfigError("output.path: expected a string");
      cfg.output.path = o.at("path").get<std::string>();
    }
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  json model;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        model["type"] = model_name(cfg.model);
        model["mu"] = m.mu;
        if constexpr (!std::is_same_v<T, Deterministic>) model["sigma"] = m.sigma;
        if constexpr (std::is_same_v<T, JumpDiffusion>) {
          model["psi"] = m.psi;
          model["ell"] = m.ell;
        }
      },
      cfg.model);
  const auto& mk = cfg.market;
  return json{
      {"schema_version", kSchemaVersion},
      {"market",
       {{"r", mk.r}, {"lambda", mk.lambda}, {"epsilon", mk.epsilon}, {"gamma", mk.gamma}, {"c", mk.c},
        {"alpha", mk.alpha}, {"alpha_p", mk.alpha_p}, {"alpha_s", mk.alpha_s}, {"y0", mk.y0}}},
      {"model", model},
      {"mc",
       {{"n_paths", cfg.mc.n_paths}, {"horizon", cfg.mc.horizon}, {"dt", cfg.mc.dt}, {"seed", cfg.mc.seed},
        {"threads", cfg.mc.threads}}},
      {"output", {{"format", cfg.output.format == OutputFormat::csv ? "csv" : "json"}, {"path", cfg.output.path}}},
  };
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return config_from_json(j, base);
}

void apply_seed_env(RunConfig& cfg) {
  const char* raw = std::getenv(kSeedEnvVar);
  if (raw == nullptr || *raw == '\0') return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (errno != 0 || end == raw || *end != '\0' || raw[0] == '-')
    throw ConfigError(std::string(kSeedEnvVar) + ": expected a non-negative integer");
  cfg.mc.seed = static_cast<std::uint64_t>(v);
}

void validate_config(const RunConfig& cfg) {
  const auto& m = cfg.market;
  auto need = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ConfigError(std::string(field) + ": " + what);
  };
  need(std::isfinite(m.r) && m.r > 0, "market.r", "must be > 0");
  need(std::isfinite(m.lambda) && m.lambda > 0, "market.lambda", "must be > 0");
  need(std::isfinite(m.epsilon) && m.epsilon >= 0, "market.epsilon", "must be >= 0");
  need(std::isfinite(m.gamma) && m.gamma > 0, "market.gamma", "must be > 0");
  need(std::isfinite(m.c) && m.c > 0, "market.c", "must be > 0");
  need(std::isfinite(m.alpha) && m.alpha >= 1, "market.alpha", "must be >= 1");
  need(std::isfinite(m.alpha_p) && m.alpha_p >= 0, "market.alpha_p", "must be >= 0");
  need(std::isfinite(m.alpha_s) && m.alpha_s > 0 && m.alpha_s <= 1, "market.alpha_s", "must lie in (0, 1]");
  need(std::isfinite(m.y0) && m.y0 >= 0, "market.y0", "must be >= 0");

  try {
    validate_model(cfg.model);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  need(cfg.mc.n_paths >= 2, "mc.n_paths", "must be >= 2");
  need(std::isfinite(cfg.mc.dt) && cfg.mc.dt > 0, "mc.dt", "must be > 0");
  need(std::isfinite(cfg.mc.horizon) && cfg.mc.horizon >= cfg.mc.dt, "mc.horizon", "must be >= mc.dt");
  need(cfg.mc.threads >= 1, "mc.threads", "must be >= 1");
}

}  // namespace levy_procure
