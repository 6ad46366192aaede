#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "levy_procure/estimators.hpp"
#include "levy_procure/levy_price.hpp"
#include "levy_procure/payoff.hpp"

namespace levy_procure {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSeedEnvVar = "LEVY_PROCURE_SEED";

enum class OutputFormat { csv, json };

struct OutputConfig {
  OutputFormat format = OutputFormat::csv;
  std::string path = "-";  // "-" is stdout
};

// Full resolved run. Defaults: r=0.05, lambda=5, c=1, alpha=1.2, alpha_p=0.8,
// alpha_s=0.7, gamma=0.05, y=0, GBM(mu=0.7, sigma=0.2).
struct RunConfig {
  MarketParams market;
  PriceModel model = GeometricBrownian{0.7, 0.2};
  McConfig mc;
  OutputConfig output;
};

// JSON keys:
//   market: r lambda epsilon gamma c alpha alpha_p alpha_s y0
//   model:  type (gbm | jump_diffusion | deterministic), mu, sigma, psi, ell
//   mc:     n_paths horizon dt seed threads
//   output: format (csv | json), path
// Missing keys keep the value in `base`. A report object whose resolved run sits
// under "config" is accepted as well. Throws ConfigError("<field path>: ...").
RunConfig config_from_json(const nlohmann::json& j, const RunConfig& base = RunConfig{});
nlohmann::json to_json(const RunConfig& cfg);

// Reads and parses a JSON config file; unreadable or malformed files throw ConfigError.
RunConfig load_config(const std::string& path, const RunConfig& base = RunConfig{});

// Applies LEVY_PROCURE_SEED when set.
void apply_seed_env(RunConfig& cfg);

// Range checks of every field; throws ConfigError naming the field path.
void validate_config(const RunConfig& cfg);

}  // namespace levy_procure
