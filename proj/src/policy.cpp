#include "levy_procure/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levy_procure/errors.hpp"

namespace levy_procure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// X~ has no upward movement at all: the price never falls, sup X~ = 0.
bool nonincreasing_log_price(const PriceModel& model) {
  const LogPriceDynamics d = dynamics(model);
  return d.sigma == 0.0 && d.drift <= 0.0;
}

}  // namespace

double PolicyCoefficients::base_inventory_cap() const { return -std::log(a) / gamma; }

double solve_xi_numeric(const PriceModel& model, double beta) {
  if (!(beta > 0)) throw DomainError("solve_xi: beta must be > 0");
  validate_model(model);
  if (nonincreasing_log_price(model)) return kInf;

  auto f = [&](double u) { return laplace_exponent(model, u) - beta; };

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 1100 || !std::isfinite(hi)) throw NumericalError("solve_xi: cannot bracket root");
  }
  // f(lo) <= 0 < f(hi); f is convex with f(0) = -beta, so the crossing is unique.
  for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  double xi = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double slope = laplace_exponent_derivative(model, xi);
    if (!(slope > 0)) break;
    const double next = xi - f(xi) / slope;
    if (!(next > lo * (1 - 1e-12) && next < hi * (1 + 1e-12))) break;
    xi = next;
  }
  if (!std::isfinite(xi) || !(xi > 0)) throw NumericalError("solve_xi: root is not finite");
  return xi;
}

double solve_xi(const PriceModel& model, double beta) {
  if (!(beta > 0)) throw DomainError("solve_xi: beta must be > 0");
  validate_model(model);
  if (nonincreasing_log_price(model)) return kInf;
  if (const auto* gbm = std::get_if<GeometricBrownian>(&model)) {
    const double var = gbm->sigma * gbm->sigma;
    const double lin = 0.5 * var - gbm->mu;
    // Positive root of (var/2) x^2 + lin x - beta = 0, written to avoid cancellation.
    const double disc = std::sqrt(lin * lin + 2.0 * var * beta);
    if (lin <= 0) return (disc - lin) / var;
    return 2.0 * beta / (lin + disc);
  }
  return solve_xi_numeric(model, beta);
}

double kappa(const PriceModel& model, double beta) {
  const double xi = solve_xi(model, beta);
  if (std::isinf(xi)) return 1.0;
  return xi / (1.0 + xi);
}

PolicyCoefficients coefficients(const MarketParams& p, const PriceModel& model) {
  check_ranges(p);
  validate_model(model);
  if (p.epsilon != 0.0) throw DomainError("policy requires zero deterioration rate (epsilon = 0)");
  require_assumptions(p, model);

  PolicyCoefficients out;
  out.beta = p.beta();
  out.delta = effective_delta(model);
  out.gamma = p.gamma;
  out.xi = solve_xi(model, out.beta);
  out.kappa = std::isinf(out.xi) ? 1.0 : out.xi / (1.0 + out.xi);
  const double gap = p.shortfall_weight();
  if (!(gap > 0)) throw DomainError("policy requires alpha + alpha_p - alpha_s > 0");
  out.a = (out.beta - out.delta - p.lambda * p.alpha_s) / (p.lambda * gap);
  out.b = p.c / (p.lambda * out.kappa * gap);
  return out;
}

double base_inventory(double price, const PolicyCoefficients& coeffs, double gamma) {
  if (!(price > 0)) throw DomainError("base_inventory: price must be > 0");
  return -std::log(coeffs.a + coeffs.b / price) / gamma;
}

ProcurementPath optimal_control_path(const PricePath& path, const PolicyCoefficients& coeffs,
                                     const MarketParams& p) {
  if (p.epsilon != 0.0) throw DomainError("policy requires zero deterioration rate (epsilon = 0)");
  const std::size_t n = path.values.size();
  if (n == 0) throw DomainError("optimal_control_path: empty path");

  ProcurementPath out;
  out.grid = path.grid;
  out.base_inventory.resize(n);
  out.control.resize(n);
  out.inventory.resize(n);

  const double y = p.y0;
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    out.control[k] = std::max(0.0, running - y);
    out.inventory[k] = y + out.control[k];
    out.base_inventory[k] = base_inventory(path.values[k], coeffs, p.gamma);
    running = std::max(running, out.base_inventory[k]);
  }
  return out;
}

bool no_invest(const MarketParams& p, double delta) {
  return p.beta() - delta >= p.lambda * (p.alpha_p + p.alpha);
}

std::vector<double> inventory_path(double y, std::span<const double> control, std::span<const double> grid,
                                   double epsilon) {
  if (control.size() != grid.size()) throw DomainError("inventory_path: control and grid sizes differ");
  if (y < 0) throw DomainError("inventory_path: y must be >= 0");
  if (!control.empty() && control[0] != 0.0) throw DomainError("inventory_path: control must start at 0");
  std::vector<double> out(control.size());
  for (std::size_t k = 0; k < control.size(); ++k) {
    if (k > 0 && control[k] < control[k - 1]) throw DomainError("inventory_path: control must be nondecreasing");
    out[k] = std::exp(-epsilon * grid[k]) * (y + control[k]);
  }
  return out;
}

}  // namespace levy_procure
