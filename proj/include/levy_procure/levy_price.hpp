#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "levy_procure/rng.hpp"

namespace levy_procure {

// dP = P (mu dt + sigma dB), P_0 = 1.
struct GeometricBrownian {
  double mu = 0.0;
  double sigma = 0.0;
};

// dP = P_- (mu dt + sigma dB + dM) with compound-Poisson M of intensity psi whose
// log-jumps Z = ln(1 + U) are Exponential(ell); ell > 1 keeps E[e^Z] finite.
struct JumpDiffusion {
  double mu = 0.0;
  double sigma = 0.0;
  double psi = 0.0;
  double ell = 2.0;
};

// P_t = e^{mu t}.
struct Deterministic {
  double mu = 0.0;
};

using PriceModel = std::variant<GeometricBrownian, JumpDiffusion, Deterministic>;

std::string model_name(const PriceModel& model);

// Throws DomainError when sigma < 0, psi < 0, ell <= 1 or a field is not finite.
void validate_model(const PriceModel& model);

// Laplace exponent of X~ = -ln P: log E[exp(u X~_1)]. Throws DomainError for a
// jump-diffusion when u <= -ell.
double laplace_exponent(const PriceModel& model, double u);

// d/du of laplace_exponent.
double laplace_exponent_derivative(const PriceModel& model, double u);

// Growth rate of E[P_t] = e^{delta t}; equals laplace_exponent(model, -1).
double effective_delta(const PriceModel& model);

// Levy characteristics of X~ = -ln P: X~_t = drift t + sigma B_t - (sum of Exponential(jump_rate) jumps,
// intensity jump_intensity).
struct LogPriceDynamics {
  double drift = 0.0;
  double sigma = 0.0;
  double jump_intensity = 0.0;
  double jump_rate = 1.0;
};

LogPriceDynamics dynamics(const PriceModel& model);

// Dynamics of X~ under the measure with density e^{-delta t} P_t (Esscher tilt by
// exp(-X~)): Brownian drift shifts by -sigma^2, jump intensity becomes
// psi ell / (ell - 1) and the log-jump law becomes Exponential(ell - 1).
LogPriceDynamics tilted_dynamics(const PriceModel& model);

// One step of X~: its increment and the minimum of X~ over the step relative to
// the starting value (so minimum <= min(0, increment)).
struct StepDraw {
  double increment = 0.0;
  double minimum = 0.0;
};

// Exact-in-distribution increments of X~ over a step. The price stream carries
// the Gaussian part, the jump count, and the jump sizes, so grid values do not
// depend on whether extrema are tracked. When they are, jump epochs and Brownian
// bridge minima come from a separate stream.
class IncrementSampler {
 public:
  IncrementSampler(const LogPriceDynamics& dyn, double dt);

  StepDraw step(Rng& price_rng) const { return draw(price_rng, nullptr, dt_, full_); }
  StepDraw step(Rng& price_rng, Rng& extremum_rng) const { return draw(price_rng, &extremum_rng, dt_, full_); }
  // Step of arbitrary length h > 0.
  StepDraw step(Rng& price_rng, Rng* extremum_rng, double h) const;

  double dt() const { return dt_; }
  const LogPriceDynamics& dynamics() const { return dyn_; }

 private:
  struct Cached {
    double h = 0.0;
    double drift_h = 0.0;
    double vol_h = 0.0;
    double no_jump_prob = 1.0;
  };

  Cached cache(double h) const;
  StepDraw draw(Rng& price_rng, Rng* extremum_rng, double h, const Cached& c) const;
  double bridge_minimum(Rng& rng, double increment, double length) const;

  LogPriceDynamics dyn_;
  double dt_;
  Cached full_;
};

// Walks X~ forward from 0 at time 0, optionally tracking its running minimum
// over continuous time (the running maximum of P). Without noise the walk is
// evaluated as drift * t, so a deterministic price is reproduced exactly.
class LogPriceWalk {
 public:
  LogPriceWalk(const IncrementSampler& sampler, Rng& price_rng, Rng* extremum_rng = nullptr);

  void advance();          // one full step of length dt
  void advance(double h);  // step of length h (leaves the grid)

  double time() const { return time_; }
  double value() const { return x_; }
  double price() const { return std::exp(-x_); }
  double running_min() const { return running_min_; }

 private:
  void apply(const StepDraw& d, double new_time);

  const IncrementSampler* sampler_;
  Rng* price_rng_;
  Rng* extremum_rng_;
  bool pure_drift_;
  std::size_t steps_ = 0;
  double time_ = 0.0;
  double x_ = 0.0;
  double running_min_ = 0.0;
};

// Uniform grid t_k = k dt, k = 0..steps, with steps = ceil(horizon / dt).
struct TimeGrid {
  double dt = 0.0;
  std::size_t steps = 0;

  static TimeGrid make(double horizon, double dt);
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double horizon() const { return time(steps); }
  std::size_t size() const { return steps + 1; }
};

struct PricePath {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> log_values;  // X~ with values = exp(-log_values)
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

// Path `path_index` of the ensemble keyed by `seed`; the estimators see the
// same grid values for the same (seed, path_index).
PricePath simulate_path(const PriceModel& model, double horizon, double dt, std::uint64_t seed,
                        std::uint64_t path_index = 0);

// Density e^{-delta t_k} P_{t_k} of the tilted measure on F_{t_k}.
double girsanov_weight(const PricePath& path, std::size_t index, double delta);

}  // namespace levy_procure
