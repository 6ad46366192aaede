#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "levy_procure/levy_price.hpp"
#include "levy_procure/payoff.hpp"

namespace levy_procure {

// Optimal base-inventory policy for linear holding cost, exponential demand and
// no deterioration:
//   l*_t = -(1/gamma) ln(a + b / P_t),   nu*_t = sup_{s<t} (l*_s - y) v 0.
struct PolicyCoefficients {
  double xi = 0.0;     // root of laplace_exponent(xi) = beta; +inf for a nondecreasing price
  double kappa = 1.0;  // xi / (1 + xi)
  double a = 0.0;
  double b = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double gamma = 0.0;

  // -(1/gamma) ln a: the supremum of l* over all prices.
  double base_inventory_cap() const;
};

// Positive root of laplace_exponent(model, xi) = beta. Closed form for GBM,
// bracketed bisection + Newton otherwise. Returns +infinity when the log-price
// X~ is nonincreasing pathwise (then no positive root exists and kappa = 1).
// Throws NumericalError when no root can be bracketed.
double solve_xi(const PriceModel& model, double beta);

// The bracketed root finder on its own, for any model (used to cross-check the
// GBM closed form).
double solve_xi_numeric(const PriceModel& model, double beta);

double kappa(const PriceModel& model, double beta);

// Throws DomainError for epsilon != 0 and AssumptionError when a hard assumption fails.
PolicyCoefficients coefficients(const MarketParams& p, const PriceModel& model);

double base_inventory(double price, const PolicyCoefficients& coeffs, double gamma);

struct ProcurementPath {
  std::vector<double> grid;
  std::vector<double> base_inventory;
  std::vector<double> control;    // nondecreasing, control[0] = 0
  std::vector<double> inventory;  // y + control
};

// control[k] = max(0, max_{j<k} l*_{t_j} - y): the purchase at t_j lifts the
// inventory to l*_{t_j} and is first visible at t_{j+1}.
ProcurementPath optimal_control_path(const PricePath& path, const PolicyCoefficients& coeffs,
                                     const MarketParams& p);

bool no_invest(const MarketParams& p, double delta);

// Y_{t_k} = e^{-eps t_k} (y + control_k). Throws DomainError if the control is
// not nondecreasing from 0 or the sizes differ.
std::vector<double> inventory_path(double y, std::span<const double> control, std::span<const double> grid,
                                   double epsilon);

}  // namespace levy_procure
