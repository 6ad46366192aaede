#include <cmath>
#include <string>

#include "doctest.h"
#include "levy_procure/errors.hpp"
#include "levy_procure/payoff.hpp"
#include "oracles.hpp"

using namespace levy_procure;

namespace {

// E[G(y, D)] by quadrature against the Exponential(gamma) density
double expected_revenue_quadrature(double y, const MarketParams& p) {
  auto f = [&](double d) {
    return oracle::G(y, d, p.alpha, p.alpha_p, p.alpha_s) * p.gamma * std::exp(-p.gamma * d);
  };
  const double upper = y + 60.0 / p.gamma;
  return (y > 0 ? oracle::simpson(f, 0.0, y) : 0.0) + oracle::simpson(f, y, upper, 200000);
}

// H via its tail-integral form: alpha_s y + alpha E[D] - K int_y^inf (z - y) f(z) dz
double H_quadrature(double y, const MarketParams& p) {
  const double K = p.alpha + p.alpha_p - p.alpha_s;
  auto tail = [&](double z) { return (z - y) * p.gamma * std::exp(-p.gamma * z); };
  return p.alpha_s * y + p.alpha / p.gamma - K * oracle::simpson(tail, y, y + 60.0 / p.gamma, 200000);
}

}  // namespace

TEST_CASE("revenue multiplier") {
  MarketParams p;
  CHECK(revenue_G(10, 4, p) == doctest::Approx(1.2 * 4 + 0.7 * 6));
  CHECK(revenue_G(4, 10, p) == doctest::Approx(1.2 * 4 - 0.8 * 6));
  CHECK(revenue_G(0, 5, p) == doctest::Approx(-4.0));
  CHECK_THROWS_AS(revenue_G(-1, 5, p), DomainError);
}

TEST_CASE("expected revenue matches quadrature of G") {
  MarketParams p;
  for (double y : {0.0, 5.0, 26.69, 80.0}) {
    CHECK(expected_revenue(y, p) == doctest::Approx(expected_revenue_quadrature(y, p)).epsilon(1e-9));
    // E[G(y, D)] = H(y) - alpha_s E[D]
    CHECK(expected_revenue(y, p) == doctest::Approx(H(y, p) - p.alpha_s / p.gamma).epsilon(1e-12));
  }
  CHECK(expected_revenue(0, p) == doctest::Approx(-p.alpha_p / p.gamma));
}

TEST_CASE("H against its integral form and its derivative against differences") {
  MarketParams p;
  p.alpha = 1.5;
  p.alpha_p = 0.3;
  p.alpha_s = 0.4;
  p.gamma = 0.2;
  for (double y : {0.0, 1.0, 7.5, 30.0}) {
    CHECK(H(y, p) == doctest::Approx(H_quadrature(y, p)).epsilon(1e-9));
    const double h = 1e-5;
    const double fd = (H(y + h, p) - H(std::max(0.0, y - h), p)) / (y > 0 ? 2 * h : h);
    CHECK(H_prime(y, p) == doctest::Approx(fd).epsilon(y > 0 ? 1e-7 : 1e-4));
  }
}

TEST_CASE("H is increasing, concave and within its bounds on a fine grid") {
  MarketParams p;
  const double ED = p.mean_demand();
  double prev = -INFINITY, prev_slope = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const double y = 0.2 * i;
    const double h = H(y, p), s = H_prime(y, p);
    CHECK(h > prev);
    CHECK(s > 0);
    CHECK(s <= prev_slope);
    CHECK(h <= p.alpha_s * y + p.alpha * ED + 1e-12);
    CHECK(h >= -(p.alpha_p - p.alpha_s) * ED - 1e-12);
    prev = h;
    prev_slope = s;
  }
  CHECK(H(0, p) == doctest::Approx(-(p.alpha_p - p.alpha_s) * ED));
}

TEST_CASE("gamma field and its y-derivative") {
  MarketParams p;
  p.epsilon = 0.1;
  const double t = 0.8, P = 1.3;
  for (auto shape : {CostShape::linear, CostShape::quadratic}) {
    for (double y : {0.5, 10.0, 42.0}) {
      const double z = std::exp(-p.epsilon * t) * y;
      const double cost = shape == CostShape::linear ? p.c * z : p.c * z * z;
      CHECK(gamma_field(t, y, P, p, shape) ==
            doctest::Approx(std::exp(-(p.r + p.lambda) * t) * (p.lambda * P * H(z, p) - cost)));
      const double h = 1e-5;
      const double fd = (gamma_field(t, y + h, P, p, shape) - gamma_field(t, y - h, P, p, shape)) / (2 * h);
      CHECK(gamma_field_y(t, y, P, p, shape) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("assumption checks at baseline") {
  MarketParams p;
  const auto checks = validate(p, GeometricBrownian{0.7, 0.2});
  REQUIRE(all_hard_satisfied(checks));
  bool saw_no_invest = false;
  for (const auto& c : checks) {
    if (c.name == "no_invest") {
      saw_no_invest = true;
      CHECK_FALSE(c.hard);
      CHECK_FALSE(c.satisfied);
    }
    if (c.name == "salvage_value_bounded") CHECK(c.margin == doctest::Approx(0.85));
    if (c.name == "discounted_price_finite") CHECK(c.margin == doctest::Approx(4.35));
  }
  CHECK(saw_no_invest);
  CHECK_NOTHROW(require_assumptions(p, GeometricBrownian{0.7, 0.2}));
}

TEST_CASE("salvage violation is reported by name") {
  MarketParams p;
  p.alpha_s = 1.0;
  const auto checks = validate(p, GeometricBrownian{0.7, 0.2});
  CHECK_FALSE(all_hard_satisfied(checks));
  try {
    require_assumptions(p, GeometricBrownian{0.7, 0.2});
    FAIL("expected AssumptionError");
  } catch (const AssumptionError& e) {
    CHECK(std::string(e.what()).find("salvage_value_bounded") != std::string::npos);
  }
}

TEST_CASE("price growing too fast breaks the discount condition") {
  MarketParams p;
  const auto checks = validate(p, GeometricBrownian{6.0, 0.2});
  CHECK_FALSE(all_hard_satisfied(checks));
}

TEST_CASE("no-invest parameters are flagged") {
  MarketParams p;
  p.lambda = 0.3;
  for (const auto& c : validate(p, GeometricBrownian{-0.5, 0.2}))
    if (c.name == "no_invest") CHECK(c.satisfied);
}

TEST_CASE("parameter ranges") {
  MarketParams p;
  p.alpha = 0.9;
  CHECK_THROWS_AS(check_ranges(p), DomainError);
  p = MarketParams{};
  p.alpha_s = 1.2;
  CHECK_THROWS_AS(check_ranges(p), DomainError);
  p = MarketParams{};
  p.gamma = 0;
  CHECK_THROWS_AS(check_ranges(p), DomainError);
  CHECK_NOTHROW(check_ranges(MarketParams{}));
}
