#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levy_procure/levy_price.hpp"
#include "levy_procure/payoff.hpp"
#include "levy_procure/policy.hpp"
#include "levy_procure/statistics.hpp"

namespace levy_procure {

struct McConfig {
  std::size_t n_paths = 100000;
  double horizon = 4.0;
  double dt = 1e-3;
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
};

// Infinite-horizon integrals are cut at the horizon; this is the largest
// admissible discount mass e^{-min(beta, beta - delta) horizon} left beyond it.
inline constexpr double kMaxTailMass = 1e-6;

// Throws DomainError if the horizon leaves more than kMaxTailMass, or the grid is invalid.
void check_horizon(const McConfig& mc, double beta, double delta);

enum class ValueMethod { direct, representation, raw };
std::string to_string(ValueMethod m);

// How expectations under the price-weighted measure (density e^{-delta t} P_t)
// are evaluated by the representation estimator.
enum class MeasureMode {
  likelihood_ratio,  // weight the ordinary price paths by e^{-delta t} P_t
  tilted,            // simulate the price directly under the tilted dynamics
};

struct ValueOptions {
  bool zero_control = false;  // evaluate the do-nothing policy instead of the optimal one
  MeasureMode measure = MeasureMode::likelihood_ratio;
  // Seed for the demand time and size of the raw estimator; defaults to the path seed.
  std::optional<std::uint64_t> event_seed;
};

struct ValueReport {
  ValueMethod method = ValueMethod::direct;
  Estimate W;  // value of the concave reformulation
  Estimate V;  // optimal expected return, V = W - decomposition constant
};

// lambda alpha_s E[D] / (r + lambda - delta)
double decomposition_constant(const MarketParams& p, double delta);

// Closed form of W(y) when nothing is ever bought (linear cost, epsilon = 0):
// lambda H(y) / (r + lambda - delta) - c y / (r + lambda).
double no_trade_value(double y, const MarketParams& p, double delta);

ValueReport estimate_value_direct(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                                  double y, const McConfig& mc, const ValueOptions& opts = {});
ValueReport estimate_value_representation(const MarketParams& p, const PriceModel& model,
                                          const PolicyCoefficients& coeffs, double y, const McConfig& mc,
                                          const ValueOptions& opts = {});
ValueReport estimate_value_raw(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                               double y, const McConfig& mc, const ValueOptions& opts = {});

// All three estimators on one path ensemble, with paired differences of W.
struct ValueComparison {
  ValueReport direct;
  ValueReport representation;
  ValueReport raw;
  Estimate direct_minus_representation;
  Estimate direct_minus_raw;
  Estimate representation_minus_raw;
};

ValueComparison estimate_value_all(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                                   double y, const McConfig& mc, const ValueOptions& opts = {});

// E[int_0^inf Gamma_y(t, max(y_probe, sup_{u<=t} l*_u)) dt] - P_0, with the
// supremum over continuous time. Zero for y_probe <= l*_0, a nonpositive
// supergradient above it.
Estimate backward_residual(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                           double y_probe, const McConfig& mc);

// E[inf_{u <= tau} P_tau / P_u] with tau ~ Exponential(beta) independent of P;
// the supremum is exact in continuous time for any dt.
Estimate mc_kappa(const PriceModel& model, double beta, std::size_t n_paths, double dt, std::uint64_t seed,
                  unsigned threads = 1);

struct IdentityCheck {
  std::string name;
  double target = 0.0;
  Estimate estimate;        // estimate of the left side (or of left - right for paired checks)
  double deviation_se = 0;  // (estimate - target) / SE
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  bool all_within(double n_se) const;
};

// Monte Carlo checks of
//   E[int e^{-beta t} P_t dt] = 1 / (beta - delta),
//   E[e^{-beta t} P_t] = e^{-(beta - delta) t} for t in {0.5, 1, 2} on the horizon,
//   E[int e^{-beta t} P_t nu*_t dt] = E[int e^{-beta t} P_t dnu*_t] / (beta - delta).
IdentityReport check_identities(const PriceModel& model, const MarketParams& p, const McConfig& mc);

struct NewsvendorReport {
  double discounted_price = 0.0;  // E[e^{-r Theta} P_Theta] = lambda / (r + lambda - delta)
  double discount = 0.0;          // E[e^{-r Theta}] = lambda / (r + lambda)
  double eta = 0.0;               // critical fractile
  double y_star = 0.0;
  double L_star = 0.0;
  std::optional<double> comparison;  // V(0) - L(y*) when a value estimate is supplied
};

// L(y) = E[e^{-r Theta} P_Theta G(y, D) - (1 + (c/r)(1 - e^{-r Theta})) y] in closed form.
double newsvendor_L(double y, const MarketParams& p, const PriceModel& model);
double newsvendor_L_prime(double y, const MarketParams& p, const PriceModel& model);

NewsvendorReport newsvendor(const MarketParams& p, const PriceModel& model,
                            std::optional<double> value_at_zero = std::nullopt);

struct SweepRow {
  double sigma = 0.0;
  bool skipped = false;
  std::string note;
  PolicyCoefficients coeffs;
  Estimate V0;
  double L_star = 0.0;
  double difference = 0.0;  // V(0) - L(y*); its SE is V0.std_error
};

// V(0) against the newsvendor value for GBM(gbm_mu, sigma) over a volatility
// grid. V(0) comes from the representation estimator under the tilted measure,
// with the same seed for every sigma.
std::vector<SweepRow> sweep_sigma(const MarketParams& p, double gbm_mu, const std::vector<double>& sigma_grid,
                                  const McConfig& mc);

}  // namespace levy_procure
