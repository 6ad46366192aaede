#pragma once

#include <string>
#include <vector>

#include "levy_procure/levy_price.hpp"

namespace levy_procure {

// Economic parameters. Demand arrives at Theta ~ Exponential(lambda) with size
// D ~ Exponential(gamma); holding cost is c x per unit time.
struct MarketParams {
  double r = 0.05;
  double lambda = 5.0;
  double epsilon = 0.0;
  double gamma = 0.05;
  double c = 1.0;
  double alpha = 1.2;
  double alpha_p = 0.8;
  double alpha_s = 0.7;
  double y0 = 0.0;

  double beta() const { return r + epsilon + lambda; }
  double mean_demand() const { return 1.0 / gamma; }
  // alpha + alpha_p - alpha_s, the slope gap of the revenue multiplier.
  double shortfall_weight() const { return alpha + alpha_p - alpha_s; }
};

// Throws DomainError when a field is outside its admissible range
// (r, lambda, gamma, c > 0; epsilon, alpha_p, y0 >= 0; alpha >= 1; alpha_s in (0, 1]).
void check_ranges(const MarketParams& p);

// alpha min{y,d} - alpha_p (d-y)^+ + alpha_s (y-d)^+
double revenue_G(double y, double d, const MarketParams& p);

// E[G(y, D)] for D ~ Exponential(gamma).
double expected_revenue(double y, const MarketParams& p);

double H(double y, const MarketParams& p);
double H_prime(double y, const MarketParams& p);

enum class CostShape { linear, quadratic };

// Holding cost c(x) = c x, or c x^2 for the quadratic shape.
double holding_cost(double x, const MarketParams& p, CostShape shape = CostShape::linear);
double holding_cost_prime(double x, const MarketParams& p, CostShape shape = CostShape::linear);

// Gamma(t, y) = e^{-(r+lambda)t} [lambda P H(e^{-eps t} y) - c(e^{-eps t} y)]
double gamma_field(double t, double y, double price, const MarketParams& p,
                   CostShape shape = CostShape::linear);
// d/dy of gamma_field.
double gamma_field_y(double t, double y, double price, const MarketParams& p,
                     CostShape shape = CostShape::linear);

struct AssumptionCheck {
  std::string name;
  std::string condition;
  double margin = 0.0;  // the left-hand side; satisfied iff margin > 0 (>= 0 for non-strict)
  bool satisfied = false;
  bool hard = true;     // false for informational checks
};

// Standing assumptions plus the informational no-invest condition. Never throws
// for finite inputs.
std::vector<AssumptionCheck> validate(const MarketParams& p, const PriceModel& model);

bool all_hard_satisfied(const std::vector<AssumptionCheck>& checks);

// Throws AssumptionError naming every violated hard check.
void require_assumptions(const MarketParams& p, const PriceModel& model);

}  // namespace levy_procure
