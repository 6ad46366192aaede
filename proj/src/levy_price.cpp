#include "levy_procure/levy_price.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "levy_procure/errors.hpp"

namespace levy_procure {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace

std::string model_name(const PriceModel& model) {
  return std::visit(overloaded{[](const GeometricBrownian&) { return std::string("gbm"); },
                               [](const JumpDiffusion&) { return std::string("jump_diffusion"); },
                               [](const Deterministic&) { return std::string("deterministic"); }},
                    model);
}

void validate_model(const PriceModel& model) {
  std::visit(overloaded{[](const GeometricBrownian& m) {
                          require_finite(m.mu, "mu");
                          require_finite(m.sigma, "sigma");
                          if (m.sigma < 0) throw DomainError("sigma must be >= 0");
                        },
                        [](const JumpDiffusion& m) {
                          require_finite(m.mu, "mu");
                          require_finite(m.sigma, "sigma");
                          require_finite(m.psi, "psi");
                          require_finite(m.ell, "ell");
                          if (m.sigma < 0) throw DomainError("sigma must be >= 0");
                          if (m.psi < 0) throw DomainError("psi must be >= 0");
                          if (!(m.ell > 1)) throw DomainError("ell must be > 1");
                        },
                        [](const Deterministic& m) { require_finite(m.mu, "mu"); }},
             model);
}

double laplace_exponent(const PriceModel& model, double u) {
  return std::visit(
      overloaded{[u](const GeometricBrownian& m) {
                   const double half_var = 0.5 * m.sigma * m.sigma;
                   return half_var * u * u + (half_var - m.mu) * u;
                 },
                 [u](const JumpDiffusion& m) {
                   if (!(u > -m.ell)) throw DomainError("laplace_exponent: u must exceed -ell");
                   const double half_var = 0.5 * m.sigma * m.sigma;
                   return half_var * u * u + u * (half_var - m.mu - m.psi / (m.ell + u));
                 },
                 [u](const Deterministic& m) { return -m.mu * u; }},
      model);
}

double laplace_exponent_derivative(const PriceModel& model, double u) {
  return std::visit(
      overloaded{[u](const GeometricBrownian& m) {
                   const double var = m.sigma * m.sigma;
                   return var * u + 0.5 * var - m.mu;
                 },
                 [u](const JumpDiffusion& m) {
                   if (!(u > -m.ell)) throw DomainError("laplace_exponent: u must exceed -ell");
                   const double var = m.sigma * m.sigma;
                   const double d = m.ell + u;
                   return var * u + 0.5 * var - m.mu - m.psi * m.ell / (d * d);
                 },
                 [](const Deterministic& m) { return -m.mu; }},
      model);
}

double effective_delta(const PriceModel& model) {
  // closed forms of laplace_exponent(model, -1), free of the sigma^2/2 round trip
  return std::visit(overloaded{[](const GeometricBrownian& m) { return m.mu; },
                               [](const JumpDiffusion& m) { return m.mu + m.psi / (m.ell - 1.0); },
                               [](const Deterministic& m) { return m.mu; }},
                    model);
}

LogPriceDynamics dynamics(const PriceModel& model) {
  return std::visit(
      overloaded{[](const GeometricBrownian& m) {
                   return LogPriceDynamics{0.5 * m.sigma * m.sigma - m.mu, m.sigma, 0.0, 1.0};
                 },
                 [](const JumpDiffusion& m) {
                   return LogPriceDynamics{0.5 * m.sigma * m.sigma - m.mu, m.sigma, m.psi, m.ell};
                 },
                 [](const Deterministic& m) { return LogPriceDynamics{-m.mu, 0.0, 0.0, 1.0}; }},
      model);
}

LogPriceDynamics tilted_dynamics(const PriceModel& model) {
  LogPriceDynamics d = dynamics(model);
  d.drift -= d.sigma * d.sigma;
  if (d.jump_intensity > 0) {
    d.jump_intensity *= d.jump_rate / (d.jump_rate - 1.0);
    d.jump_rate -= 1.0;
  }
  return d;
}

IncrementSampler::IncrementSampler(const LogPriceDynamics& dyn, double dt) : dyn_(dyn), dt_(dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw DomainError("dt must be positive and finite");
  full_ = cache(dt);
}

IncrementSampler::Cached IncrementSampler::cache(double h) const {
  Cached c;
  c.h = h;
  c.drift_h = dyn_.drift * h;
  c.vol_h = dyn_.sigma * std::sqrt(h);
  c.no_jump_prob = std::exp(-dyn_.jump_intensity * h);
  return c;
}

StepDraw IncrementSampler::step(Rng& price_rng, Rng* extremum_rng, double h) const {
  if (!(h > 0)) throw DomainError("step length must be positive");
  return draw(price_rng, extremum_rng, h, h == dt_ ? full_ : cache(h));
}

double IncrementSampler::bridge_minimum(Rng& rng, double increment, double length) const {
  if (dyn_.sigma == 0.0 || length <= 0.0) return std::min(0.0, increment);
  const double var = dyn_.sigma * dyn_.sigma * length;
  return 0.5 * (increment - std::sqrt(increment * increment - 2.0 * var * std::log(rng.uniform())));
}

StepDraw IncrementSampler::draw(Rng& price_rng, Rng* extremum_rng, double h, const Cached& c) const {
  const double diffusion = dyn_.sigma > 0 ? c.drift_h + c.vol_h * price_rng.normal() : c.drift_h;

  std::uint64_t jumps = 0;
  if (dyn_.jump_intensity > 0) {
    const double mean = dyn_.jump_intensity * h;
    jumps = mean <= 30.0 ? price_rng.poisson_small(c.no_jump_prob) : price_rng.poisson(mean);
  }
  if (jumps == 0) {
    StepDraw out{diffusion, std::min(0.0, diffusion)};
    if (extremum_rng) out.minimum = bridge_minimum(*extremum_rng, diffusion, h);
    return out;
  }

  // Small vectors; jump steps are rare at practical dt.
  std::vector<double> sizes(jumps);
  double total_jump = 0.0;
  for (auto& s : sizes) {
    s = price_rng.exponential(dyn_.jump_rate);
    total_jump += s;
  }
  StepDraw out{diffusion - total_jump, 0.0};
  if (!extremum_rng) {
    out.minimum = std::min(0.0, out.increment);
    return out;
  }

  Rng& ext = *extremum_rng;
  std::vector<double> epochs(jumps);
  for (auto& e : epochs) e = ext.uniform() * h;
  std::sort(epochs.begin(), epochs.end());

  // Brownian part pinned at (0, 0) and (h, diffusion); jumps subtract at the epochs.
  double u = 0.0, w = 0.0, level = 0.0, minimum = 0.0;
  for (std::size_t i = 0; i < jumps; ++i) {
    const double s = epochs[i];
    double w_s = w;
    if (dyn_.sigma > 0 && h > u) {
      const double frac = (s - u) / (h - u);
      const double sd = dyn_.sigma * std::sqrt(std::max(0.0, (s - u) * (h - s) / (h - u)));
      w_s = w + frac * (diffusion - w) + sd * ext.normal();
    } else if (h > u) {
      w_s = w + (s - u) / (h - u) * (diffusion - w);
    }
    minimum = std::min(minimum, w - level + bridge_minimum(ext, w_s - w, s - u));
    level += sizes[i];
    w = w_s;
    u = s;
  }
  minimum = std::min(minimum, w - level + bridge_minimum(ext, diffusion - w, h - u));
  out.minimum = std::min(minimum, out.increment);
  return out;
}

LogPriceWalk::LogPriceWalk(const IncrementSampler& sampler, Rng& price_rng, Rng* extremum_rng)
    : sampler_(&sampler),
      price_rng_(&price_rng),
      extremum_rng_(extremum_rng),
      pure_drift_(sampler.dynamics().sigma == 0.0 && sampler.dynamics().jump_intensity == 0.0) {}

void LogPriceWalk::advance() {
  ++steps_;
  const double t = static_cast<double>(steps_) * sampler_->dt();
  if (pure_drift_) {
    apply(StepDraw{}, t);
    return;
  }
  apply(extremum_rng_ ? sampler_->step(*price_rng_, *extremum_rng_) : sampler_->step(*price_rng_), t);
}

void LogPriceWalk::advance(double h) {
  const double t = time_ + h;
  if (pure_drift_) {
    if (!(h > 0)) throw DomainError("step length must be positive");
    apply(StepDraw{}, t);
    return;
  }
  apply(sampler_->step(*price_rng_, extremum_rng_, h), t);
}

void LogPriceWalk::apply(const StepDraw& d, double new_time) {
  const double old = x_;
  if (pure_drift_) {
    x_ = sampler_->dynamics().drift * new_time;
    running_min_ = std::min({running_min_, old, x_});
  } else {
    x_ = old + d.increment;
    running_min_ = std::min({running_min_, old + d.minimum, x_});
  }
  time_ = new_time;
}

TimeGrid TimeGrid::make(double horizon, double dt) {
  if (!(dt > 0) || !std::isfinite(dt)) throw DomainError("dt must be positive and finite");
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw DomainError("horizon must be finite and >= dt");
  const double ratio = horizon / dt;
  auto steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  return TimeGrid{dt, std::max<std::size_t>(steps, 1)};
}

PricePath simulate_path(const PriceModel& model, double horizon, double dt, std::uint64_t seed,
                        std::uint64_t path_index) {
  validate_model(model);
  const TimeGrid grid = TimeGrid::make(horizon, dt);
  PricePath path;
  path.seed = seed;
  path.path_index = path_index;
  path.grid.resize(grid.size());
  path.values.resize(grid.size());
  path.log_values.resize(grid.size());

  const IncrementSampler sampler(dynamics(model), dt);
  Rng rng(seed, stream::kPrice, path_index);
  LogPriceWalk walk(sampler, rng);
  path.grid[0] = 0.0;
  path.log_values[0] = 0.0;
  path.values[0] = 1.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    walk.advance();
    path.grid[k] = grid.time(k);
    path.log_values[k] = walk.value();
    path.values[k] = walk.price();
  }
  return path;
}

double girsanov_weight(const PricePath& path, std::size_t index, double delta) {
  if (index >= path.values.size()) throw DomainError("girsanov_weight: index outside grid");
  return std::exp(-delta * path.grid[index]) * path.values[index];
}

}  // namespace levy_procure
