#include "levy_procure/estimators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "levy_procure/errors.hpp"
#include "levy_procure/parallel.hpp"

namespace levy_procure {

namespace {

void require_policy_setting(const MarketParams& p) {
  check_ranges(p);
  if (p.epsilon != 0.0) throw DomainError("estimators require zero deterioration rate (epsilon = 0)");
}

// Per-path walk through the grid under the base-inventory policy. Quadrature:
//  - price-weighted integrals use the trapezoid rule on e^{-beta t} P_t;
//  - deterministic discount integrals are integrated exactly per step.
// On (t_k, t_{k+1}] the control is constant and equal to its value right after
// the purchase at t_k.
class PathEvaluator {
 public:
  // Indices of per-path totals.
  enum Total : std::size_t {
    kDirect,         // W: int Gamma(t, y + nu_t) dt - sum e^{-beta t} P dnu
    kPriceMass,      // int e^{-beta t} P_t dt
    kShortfall,      // int e^{-beta t} P_t e^{-gamma Y_t} dt
    kInventoryMass,  // int e^{-beta t} P_t Y_t dt
    kInventoryDisc,  // int e^{-beta t} Y_t dt
    kControlMass,    // int e^{-beta t} P_t nu_t dt
    kPurchaseCost,   // sum e^{-beta t_k} P_k dnu_k
    kRaw,            // realised discounted return with sampled Theta and D
    kTiltShortfall,  // tilted measure: int (beta-delta) e^{-(beta-delta)t} e^{-gamma Y_t} dt
    kTiltInventory,  // tilted measure: int (beta-delta) e^{-(beta-delta)t} Y_t dt
    kSnap0,
    kSnap1,
    kSnap2,
    kTotals
  };
  using Totals = std::array<double, kTotals>;

  PathEvaluator(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs, double y,
                const McConfig& mc, const ValueOptions& opts, bool with_raw, bool with_tilted)
      : p_(p),
        coeffs_(coeffs),
        y_(y),
        seed_(mc.seed),
        event_seed_(opts.event_seed.value_or(mc.seed)),
        zero_control_(opts.zero_control),
        with_raw_(with_raw),
        with_tilted_(with_tilted),
        grid_(TimeGrid::make(mc.horizon, mc.dt)),
        sampler_(dynamics(model), mc.dt),
        tilted_sampler_(tilted_dynamics(model), mc.dt) {
    const double beta = p.beta();
    const double bd = beta - coeffs.delta;
    const std::size_t n = grid_.size();
    disc_beta_.resize(n);
    disc_r_.resize(n);
    disc_bd_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = grid_.time(k);
      disc_beta_[k] = std::exp(-beta * t);
      disc_r_[k] = std::exp(-p.r * t);
      disc_bd_[k] = std::exp(-bd * t);
    }
    floor_shortfall_ = std::exp(-p.gamma * y);
    snapshots_.fill(std::numeric_limits<std::size_t>::max());
    const std::array<double, 3> snap_times{0.5, 1.0, 2.0};
    for (std::size_t i = 0; i < snap_times.size(); ++i) {
      const double kf = snap_times[i] / mc.dt;
      const auto k = static_cast<std::size_t>(std::llround(kf));
      if (std::abs(kf - static_cast<double>(k)) < 1e-6 && k < n) snapshots_[i] = k;
    }
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t snapshot_index(std::size_t i) const { return snapshots_[i]; }

  void evaluate(std::uint64_t path, Totals& out) const {
    out.fill(0.0);
    walk_q(path, out);
    if (with_tilted_) walk_tilted(path, out);
  }

 private:
  // Inventory Y = y + nu and e^{-gamma Y} after buying up to l*(M) at grid maximum M.
  void update_target(double max_price, double& inventory, double& shortfall) const {
    if (zero_control_) return;
    const double level = coeffs_.a + coeffs_.b / max_price;
    if (level < shortfall) {
      shortfall = level;
      inventory = std::max(y_, -std::log(level) / p_.gamma);
    }
  }

  double sample_price_at(double from_price, double h, bool tilted, Rng& rng) const {
    const IncrementSampler& s = tilted ? tilted_sampler_ : sampler_;
    const LogPriceDynamics& d = s.dynamics();
    if (d.sigma == 0.0 && d.jump_intensity == 0.0) return from_price * std::exp(-d.drift * h);
    return from_price * std::exp(-s.step(rng, nullptr, h).increment);
  }

  void walk_q(std::uint64_t path, Totals& out) const {
    const double beta = p_.beta();
    const double dt = grid_.dt;
    const double lambda = p_.lambda;
    const double gap = p_.shortfall_weight();

    Rng price_rng(seed_, stream::kPrice, path);
    LogPriceWalk walk(sampler_, price_rng);

    double theta = std::numeric_limits<double>::infinity();
    double demand = 0.0;
    Rng event_rng(event_seed_, stream::kEvents, path);
    if (with_raw_) {
      theta = event_rng.exponential(p_.lambda);
      demand = event_rng.exponential(p_.gamma);
    }
    bool raw_done = !with_raw_;
    double raw_gain = 0.0, raw_holding = 0.0, raw_purchase = 0.0;

    double price = 1.0;
    double max_price = 0.0;
    double inventory = y_;
    double shortfall = floor_shortfall_;
    double weighted = disc_beta_[0] * price;  // e^{-beta t_k} P_k
    double direct_flow = 0.0;

    for (std::size_t k = 0; k < grid_.steps; ++k) {
      const double t = grid_.time(k);
      for (std::size_t i = 0; i < 3; ++i)
        if (snapshots_[i] == k) out[kSnap0 + i] = weighted;

      const double before = inventory;
      if (price > max_price) {
        max_price = price;
        update_target(max_price, inventory, shortfall);
      }
      const double bought = inventory - before;
      if (bought > 0) {
        out[kPurchaseCost] += weighted * bought;
        if (!raw_done) raw_purchase += disc_r_[k] * price * bought;
      }

      const double prev_price = price;
      walk.advance();
      price = walk.price();
      const double next_weighted = disc_beta_[k + 1] * price;
      const double area = 0.5 * dt * (weighted + next_weighted);
      const double disc_area = (disc_beta_[k] - disc_beta_[k + 1]) / beta;

      const double h_value = p_.alpha_s * inventory + p_.alpha / p_.gamma - gap / p_.gamma * shortfall;
      direct_flow += lambda * area * h_value - p_.c * inventory * disc_area;
      out[kPriceMass] += area;
      out[kShortfall] += area * shortfall;
      out[kInventoryMass] += area * inventory;
      out[kInventoryDisc] += disc_area * inventory;
      out[kControlMass] += area * (inventory - y_);

      if (!raw_done) {
        const double t_next = grid_.time(k + 1);
        if (theta <= t_next) {
          raw_holding += p_.c * inventory * (disc_r_[k] - std::exp(-p_.r * theta)) / p_.r;
          const double p_theta = sample_price_at(prev_price, theta - t, false, event_rng);
          raw_gain = std::exp(-p_.r * theta) * p_theta * revenue_G(inventory, demand, p_);
          raw_done = true;
        } else {
          raw_holding += p_.c * inventory * (disc_r_[k] - disc_r_[k + 1]) / p_.r;
        }
      }
      weighted = next_weighted;
    }
    for (std::size_t i = 0; i < 3; ++i)
      if (snapshots_[i] == grid_.steps) out[kSnap0 + i] = weighted;

    if (!raw_done) {
      // Demand beyond the horizon: the control stays frozen.
      const double tn = grid_.horizon();
      raw_holding += p_.c * inventory * (disc_r_[grid_.steps] - std::exp(-p_.r * theta)) / p_.r;
      const double p_theta = sample_price_at(price, theta - tn, false, event_rng);
      raw_gain = std::exp(-p_.r * theta) * p_theta * revenue_G(inventory, demand, p_);
    }

    out[kDirect] = direct_flow - out[kPurchaseCost];
    out[kRaw] = raw_gain - raw_holding - raw_purchase;
  }

  void walk_tilted(std::uint64_t path, Totals& out) const {
    Rng price_rng(seed_, stream::kPrice, path);
    LogPriceWalk walk(tilted_sampler_, price_rng);
    double price = 1.0;
    double max_price = 0.0;
    double inventory = y_;
    double shortfall = floor_shortfall_;
    for (std::size_t k = 0; k < grid_.steps; ++k) {
      if (price > max_price) {
        max_price = price;
        update_target(max_price, inventory, shortfall);
      }
      const double mass = disc_bd_[k] - disc_bd_[k + 1];
      out[kTiltShortfall] += mass * shortfall;
      out[kTiltInventory] += mass * inventory;
      walk.advance();
      price = walk.price();
    }
  }

  const MarketParams& p_;
  const PolicyCoefficients& coeffs_;
  double y_;
  std::uint64_t seed_;
  std::uint64_t event_seed_;
  bool zero_control_;
  bool with_raw_;
  bool with_tilted_;
  TimeGrid grid_;
  IncrementSampler sampler_;
  IncrementSampler tilted_sampler_;
  std::vector<double> disc_beta_;
  std::vector<double> disc_r_;
  std::vector<double> disc_bd_;
  double floor_shortfall_ = 1.0;
  std::array<std::size_t, 3> snapshots_{};
};

using Totals = PathEvaluator::Totals;

// Representation of W through expectations at independent exponential times.
double representation_value(const MarketParams& p, const PolicyCoefficients& c, double y, double tilde_shortfall,
                            double tilde_inventory, double inventory_disc) {
  const double bd = c.beta - c.delta;
  const double gap = p.shortfall_weight();
  return y + p.lambda * p.alpha / (p.gamma * bd) - p.lambda * gap / (p.gamma * bd) * tilde_shortfall +
         (p.lambda * p.alpha_s / bd - 1.0) * tilde_inventory - p.c * inventory_disc;
}

double representation_from_totals(const MarketParams& p, const PolicyCoefficients& c, double y, const Totals& t,
                                  MeasureMode mode) {
  const double bd = c.beta - c.delta;
  if (mode == MeasureMode::tilted) {
    return representation_value(p, c, y, t[PathEvaluator::kTiltShortfall], t[PathEvaluator::kTiltInventory],
                                t[PathEvaluator::kInventoryDisc]);
  }
  return representation_value(p, c, y, bd * t[PathEvaluator::kShortfall], bd * t[PathEvaluator::kInventoryMass],
                              t[PathEvaluator::kInventoryDisc]);
}

enum ValueSlot : std::size_t { kSlotDirect, kSlotRep, kSlotRaw, kValueSlots };

struct EnsembleRequest {
  bool direct = true;
  bool representation = true;
  bool raw = true;
};

Moments value_ensemble(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs, double y,
                       const McConfig& mc, const ValueOptions& opts, EnsembleRequest req) {
  require_policy_setting(p);
  validate_model(model);
  if (y < 0) throw DomainError("initial inventory y must be >= 0");
  if (mc.n_paths < 2) throw DomainError("n_paths must be >= 2");
  check_horizon(mc, p.beta(), coeffs.delta);

  const bool tilted = req.representation && opts.measure == MeasureMode::tilted;
  const PathEvaluator eval(p, model, coeffs, y, mc, opts, req.raw, tilted);
  const double raw_shift = decomposition_constant(p, coeffs.delta);

  return run_paths(mc.n_paths, kValueSlots, mc.threads, [&](std::uint64_t path, std::span<double> out) {
    Totals t;
    eval.evaluate(path, t);
    out[kSlotDirect] = t[PathEvaluator::kDirect];
    out[kSlotRep] = req.representation ? representation_from_totals(p, coeffs, y, t, opts.measure) : 0.0;
    out[kSlotRaw] = t[PathEvaluator::kRaw] + raw_shift;
  });
}

ValueReport make_report(ValueMethod method, const Moments& m, std::size_t slot, double shift, std::uint64_t seed) {
  ValueReport r;
  r.method = method;
  r.W = m.estimate(slot, seed);
  r.V = make_estimate(r.W.mean - shift, r.W.std_error, r.W.n, seed);
  return r;
}

}  // namespace

void check_horizon(const McConfig& mc, double beta, double delta) {
  const TimeGrid grid = TimeGrid::make(mc.horizon, mc.dt);
  // price-weighted terms decay at beta - delta, the holding cost at beta
  const double rate = std::min(beta - delta, beta);
  const double tail = std::exp(-rate * grid.horizon());
  if (!(tail < kMaxTailMass)) {
    std::ostringstream msg;
    msg << "horizon " << mc.horizon << " too short: e^{-min(beta, beta-delta) T} = " << tail << " must be < "
        << kMaxTailMass << " (need T > " << std::log(1.0 / kMaxTailMass) / rate << ")";
    throw DomainError(msg.str());
  }
}

std::string to_string(ValueMethod m) {
  switch (m) {
    case ValueMethod::direct: return "direct";
    case ValueMethod::representation: return "representation";
    case ValueMethod::raw: return "raw";
  }
  return "unknown";
}

double decomposition_constant(const MarketParams& p, double delta) {
  return p.lambda * p.alpha_s * p.mean_demand() / (p.r + p.lambda - delta);
}

double no_trade_value(double y, const MarketParams& p, double delta) {
  return p.lambda * H(y, p) / (p.r + p.lambda - delta) - p.c * y / (p.r + p.lambda);
}

ValueReport estimate_value_direct(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                                  double y, const McConfig& mc, const ValueOptions& opts) {
  const Moments m = value_ensemble(p, model, coeffs, y, mc, opts, {true, false, false});
  return make_report(ValueMethod::direct, m, kSlotDirect, decomposition_constant(p, coeffs.delta), mc.seed);
}

ValueReport estimate_value_representation(const MarketParams& p, const PriceModel& model,
                                          const PolicyCoefficients& coeffs, double y, const McConfig& mc,
                                          const ValueOptions& opts) {
  const Moments m = value_ensemble(p, model, coeffs, y, mc, opts, {false, true, false});
  return make_report(ValueMethod::representation, m, kSlotRep, decomposition_constant(p, coeffs.delta), mc.seed);
}

ValueReport estimate_value_raw(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                               double y, const McConfig& mc, const ValueOptions& opts) {
  const Moments m = value_ensemble(p, model, coeffs, y, mc, opts, {false, false, true});
  return make_report(ValueMethod::raw, m, kSlotRaw, decomposition_constant(p, coeffs.delta), mc.seed);
}

ValueComparison estimate_value_all(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                                   double y, const McConfig& mc, const ValueOptions& opts) {
  const Moments m = value_ensemble(p, model, coeffs, y, mc, opts, {true, true, true});
  const double shift = decomposition_constant(p, coeffs.delta);
  ValueComparison out;
  out.direct = make_report(ValueMethod::direct, m, kSlotDirect, shift, mc.seed);
  out.representation = make_report(ValueMethod::representation, m, kSlotRep, shift, mc.seed);
  out.raw = make_report(ValueMethod::raw, m, kSlotRaw, shift, mc.seed);
  out.direct_minus_representation = m.difference(kSlotDirect, kSlotRep, mc.seed);
  out.direct_minus_raw = m.difference(kSlotDirect, kSlotRaw, mc.seed);
  out.representation_minus_raw = m.difference(kSlotRep, kSlotRaw, mc.seed);
  return out;
}

Estimate backward_residual(const MarketParams& p, const PriceModel& model, const PolicyCoefficients& coeffs,
                           double y_probe, const McConfig& mc) {
  require_policy_setting(p);
  validate_model(model);
  if (y_probe < 0) throw DomainError("y_probe must be >= 0");
  if (mc.n_paths < 2) throw DomainError("n_paths must be >= 2");
  check_horizon(mc, p.beta(), coeffs.delta);

  const TimeGrid grid = TimeGrid::make(mc.horizon, mc.dt);
  const IncrementSampler sampler(dynamics(model), mc.dt);
  const double beta = p.beta();
  const double gap = p.shortfall_weight();
  const double floor_shortfall = std::exp(-p.gamma * y_probe);
  std::vector<double> disc(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) disc[k] = std::exp(-beta * grid.time(k));
  const double cost_integral = p.c * (1.0 - disc[grid.steps]) / beta;

  // Gamma_y(t, max(y_probe, sup l*)) = e^{-beta t}[lambda P (alpha_s + gap min(e^{-gamma y}, a + b/M)) - c]
  auto marginal = [&](std::size_t k, double price, double running_max) {
    const double shortfall = std::min(floor_shortfall, coeffs.a + coeffs.b / running_max);
    return disc[k] * price * (p.alpha_s + gap * shortfall);
  };

  const Moments m = run_paths(mc.n_paths, 1, mc.threads, [&](std::uint64_t path, std::span<double> out) {
    Rng price_rng(mc.seed, stream::kPrice, path);
    Rng extremum_rng(mc.seed, stream::kExtremum, path);
    LogPriceWalk walk(sampler, price_rng, &extremum_rng);
    double prev = marginal(0, 1.0, 1.0);
    double integral = 0.0;
    for (std::size_t k = 0; k < grid.steps; ++k) {
      walk.advance();
      const double next = marginal(k + 1, walk.price(), std::exp(-walk.running_min()));
      integral += 0.5 * grid.dt * (prev + next);
      prev = next;
    }
    out[0] = p.lambda * integral - cost_integral - 1.0;
  });
  return m.estimate(0, mc.seed);
}

Estimate mc_kappa(const PriceModel& model, double beta, std::size_t n_paths, double dt, std::uint64_t seed,
                  unsigned threads) {
  validate_model(model);
  if (!(beta > 0)) throw DomainError("mc_kappa: beta must be > 0");
  if (n_paths < 2) throw DomainError("n_paths must be >= 2");
  const IncrementSampler sampler(dynamics(model), dt);

  const Moments m = run_paths(n_paths, 1, threads, [&](std::uint64_t path, std::span<double> out) {
    Rng event_rng(seed, stream::kEvents, path);
    const double tau = event_rng.exponential(beta);
    Rng price_rng(seed, stream::kPrice, path);
    Rng extremum_rng(seed, stream::kExtremum, path);
    LogPriceWalk walk(sampler, price_rng, &extremum_rng);
    const auto full = static_cast<std::size_t>(std::floor(tau / dt));
    for (std::size_t k = 0; k < full; ++k) walk.advance();
    const double rest = tau - walk.time();
    if (rest > 0) walk.advance(rest);
    // inf_u P_tau / P_u = exp(min X~ - X~_tau)
    out[0] = std::exp(walk.running_min() - walk.value());
  });
  return m.estimate(0, seed);
}

bool IdentityReport::all_within(double n_se) const {
  return std::all_of(checks.begin(), checks.end(),
                     [n_se](const IdentityCheck& c) { return std::abs(c.deviation_se) <= n_se; });
}

IdentityReport check_identities(const PriceModel& model, const MarketParams& p, const McConfig& mc) {
  const PolicyCoefficients coeffs = coefficients(p, model);
  if (mc.n_paths < 2) throw DomainError("n_paths must be >= 2");
  check_horizon(mc, p.beta(), coeffs.delta);
  const PathEvaluator eval(p, model, coeffs, p.y0, mc, ValueOptions{}, false, false);
  const double bd = coeffs.beta - coeffs.delta;

  enum : std::size_t { kMass, kS0, kS1, kS2, kLhs, kRhs, kDims };
  const Moments m = run_paths(mc.n_paths, kDims, mc.threads, [&](std::uint64_t path, std::span<double> out) {
    Totals t;
    eval.evaluate(path, t);
    out[kMass] = t[PathEvaluator::kPriceMass];
    out[kS0] = t[PathEvaluator::kSnap0];
    out[kS1] = t[PathEvaluator::kSnap1];
    out[kS2] = t[PathEvaluator::kSnap2];
    out[kLhs] = t[PathEvaluator::kControlMass];
    out[kRhs] = t[PathEvaluator::kPurchaseCost] / bd;
  });

  IdentityReport report;
  auto add = [&](std::string name, double target, Estimate e) {
    const double dev = e.z_score(target);
    report.checks.push_back({std::move(name), target, e, dev});
  };
  add("discounted_price_integral", 1.0 / bd, m.estimate(kMass, mc.seed));
  const std::array<double, 3> times{0.5, 1.0, 2.0};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (eval.snapshot_index(i) == std::numeric_limits<std::size_t>::max()) continue;
    std::ostringstream name;
    name << "discounted_price_at_t=" << times[i];
    add(name.str(), std::exp(-bd * times[i]), m.estimate(kS0 + i, mc.seed));
  }
  add("control_integration_by_parts", 0.0, m.difference(kLhs, kRhs, mc.seed));
  return report;
}

double newsvendor_L(double y, const MarketParams& p, const PriceModel& model) {
  const double delta = effective_delta(model);
  const double dp = p.lambda / (p.r + p.lambda - delta);
  const double disc = p.lambda / (p.r + p.lambda);
  return dp * expected_revenue(y, p) - (1.0 + p.c / p.r * (1.0 - disc)) * y;
}

double newsvendor_L_prime(double y, const MarketParams& p, const PriceModel& model) {
  const double delta = effective_delta(model);
  const double dp = p.lambda / (p.r + p.lambda - delta);
  const double disc = p.lambda / (p.r + p.lambda);
  return dp * H_prime(y, p) - (1.0 + p.c / p.r * (1.0 - disc));
}

NewsvendorReport newsvendor(const MarketParams& p, const PriceModel& model, std::optional<double> value_at_zero) {
  check_ranges(p);
  validate_model(model);
  if (p.epsilon != 0.0) throw DomainError("newsvendor requires zero deterioration rate (epsilon = 0)");
  require_assumptions(p, model);

  const double delta = effective_delta(model);
  NewsvendorReport out;
  out.discounted_price = p.lambda / (p.r + p.lambda - delta);
  out.discount = p.lambda / (p.r + p.lambda);
  const double unit_cost = 1.0 + p.c / p.r * (1.0 - out.discount);
  out.eta = ((p.alpha + p.alpha_p) * out.discounted_price - unit_cost) /
            (p.shortfall_weight() * out.discounted_price);
  if (out.eta >= 1.0) throw DomainError("newsvendor: critical fractile >= 1");
  out.y_star = out.eta > 0 ? -std::log1p(-out.eta) / p.gamma : 0.0;
  out.L_star = newsvendor_L(out.y_star, p, model);
  if (value_at_zero) out.comparison = *value_at_zero - out.L_star;
  return out;
}

std::vector<SweepRow> sweep_sigma(const MarketParams& p, double gbm_mu, const std::vector<double>& sigma_grid,
                                  const McConfig& mc) {
  std::vector<SweepRow> rows;
  rows.reserve(sigma_grid.size());
  ValueOptions opts;
  opts.measure = MeasureMode::tilted;
  for (const double sigma : sigma_grid) {
    SweepRow row;
    row.sigma = sigma;
    const PriceModel model = GeometricBrownian{gbm_mu, sigma};
    try {
      row.coeffs = coefficients(p, model);
      const MarketParams at_zero = [&] {
        MarketParams q = p;
        q.y0 = 0.0;
        return q;
      }();
      const ValueReport v = estimate_value_representation(at_zero, model, row.coeffs, 0.0, mc, opts);
      row.V0 = v.V;
      row.L_star = newsvendor(at_zero, model).L_star;
      row.difference = row.V0.mean - row.L_star;
    } catch (const AssumptionError& e) {
      row.skipped = true;
      row.note = e.what();
    } catch (const DomainError& e) {
      row.skipped = true;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace levy_procure
