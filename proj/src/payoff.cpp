#include "levy_procure/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levy_procure/errors.hpp"

namespace levy_procure {

void check_ranges(const MarketParams& p) {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
  };
  need(std::isfinite(p.r) && p.r > 0, "r must be > 0");
  need(std::isfinite(p.lambda) && p.lambda > 0, "lambda must be > 0");
  need(std::isfinite(p.epsilon) && p.epsilon >= 0, "epsilon must be >= 0");
  need(std::isfinite(p.gamma) && p.gamma > 0, "gamma must be > 0");
  need(std::isfinite(p.c) && p.c > 0, "c must be > 0");
  need(std::isfinite(p.alpha) && p.alpha >= 1, "alpha must be >= 1");
  need(std::isfinite(p.alpha_p) && p.alpha_p >= 0, "alpha_p must be >= 0");
  need(std::isfinite(p.alpha_s) && p.alpha_s > 0 && p.alpha_s <= 1, "alpha_s must lie in (0, 1]");
  need(std::isfinite(p.y0) && p.y0 >= 0, "y0 must be >= 0");
}

double revenue_G(double y, double d, const MarketParams& p) {
  if (y < 0 || d < 0) throw DomainError("revenue_G: inventory and demand must be >= 0");
  return p.alpha * std::min(y, d) - p.alpha_p * std::max(d - y, 0.0) + p.alpha_s * std::max(y - d, 0.0);
}

double expected_revenue(double y, const MarketParams& p) {
  return p.alpha_s * y + (p.alpha - p.alpha_s) / p.gamma -
         p.shortfall_weight() * std::exp(-p.gamma * y) / p.gamma;
}

double H(double y, const MarketParams& p) {
  return p.alpha_s * y + p.alpha / p.gamma - p.shortfall_weight() / p.gamma * std::exp(-p.gamma * y);
}

double H_prime(double y, const MarketParams& p) {
  return p.alpha_s + p.shortfall_weight() * std::exp(-p.gamma * y);
}

double holding_cost(double x, const MarketParams& p, CostShape shape) {
  return shape == CostShape::linear ? p.c * x : p.c * x * x;
}

double holding_cost_prime(double x, const MarketParams& p, CostShape shape) {
  return shape == CostShape::linear ? p.c : 2.0 * p.c * x;
}

double gamma_field(double t, double y, double price, const MarketParams& p, CostShape shape) {
  const double decayed = std::exp(-p.epsilon * t) * y;
  return std::exp(-(p.r + p.lambda) * t) *
         (p.lambda * price * H(decayed, p) - holding_cost(decayed, p, shape));
}

double gamma_field_y(double t, double y, double price, const MarketParams& p, CostShape shape) {
  const double decay = std::exp(-p.epsilon * t);
  const double decayed = decay * y;
  return std::exp(-(p.r + p.lambda) * t) * decay *
         (p.lambda * price * H_prime(decayed, p) - holding_cost_prime(decayed, p, shape));
}

std::vector<AssumptionCheck> validate(const MarketParams& p, const PriceModel& model) {
  const double delta = effective_delta(model);
  const double beta = p.beta();
  std::vector<AssumptionCheck> checks;

  const double a32 = p.r + p.lambda - delta;
  checks.push_back({"discounted_price_finite", "r + lambda - delta > 0", a32, a32 > 0, true});

  const double a34 = beta - delta - p.lambda * p.alpha_s;
  checks.push_back({"salvage_value_bounded", "beta - delta - lambda*alpha_s > 0", a34, a34 > 0, true});

  const double gap = p.shortfall_weight();
  checks.push_back({"revenue_slopes", "alpha + alpha_p - alpha_s >= 0", gap, gap >= 0, true});

  const double ni = beta - delta - p.lambda * (p.alpha_p + p.alpha);
  checks.push_back({"no_invest", "beta - delta >= lambda*(alpha_p + alpha)", ni, ni >= 0, false});
  return checks;
}

bool all_hard_satisfied(const std::vector<AssumptionCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.hard || c.satisfied; });
}

void require_assumptions(const MarketParams& p, const PriceModel& model) {
  const auto checks = validate(p, model);
  std::ostringstream msg;
  bool failed = false;
  for (const auto& c : checks) {
    if (c.hard && !c.satisfied) {
      msg << (failed ? "; " : "violated: ") << c.name << " (" << c.condition << ", value " << c.margin << ")";
      failed = true;
    }
  }
  if (failed) throw AssumptionError(msg.str());
}

}  // namespace levy_procure
