#include <cmath>

#include "doctest.h"
#include "levy_procure/errors.hpp"
#include "levy_procure/estimators.hpp"
#include "oracles.hpp"

using namespace levy_procure;

namespace {

McConfig small(std::size_t n, double dt = 1e-2, double horizon = 4.0) {
  McConfig mc;
  mc.n_paths = n;
  mc.dt = dt;
  mc.horizon = horizon;
  mc.seed = 123;
  return mc;
}

const PriceModel kGbm = GeometricBrownian{0.7, 0.2};

}  // namespace

TEST_CASE("horizon guard") {
  McConfig mc = small(10, 1e-2, 1.0);
  CHECK_THROWS_AS(check_horizon(mc, 5.05, 0.7), DomainError);
  mc.horizon = 4.0;
  CHECK_NOTHROW(check_horizon(mc, 5.05, 0.7));
  MarketParams p;
  CHECK_THROWS_AS(estimate_value_direct(p, kGbm, coefficients(p, kGbm), 0.0, small(10, 1e-2, 2.0)), DomainError);
}

TEST_CASE("decomposition constant and do-nothing value") {
  MarketParams p;
  CHECK(decomposition_constant(p, 0.7) == doctest::Approx(5 * 0.7 * 20 / 4.35));
  // lambda H(y)/(r+lambda-delta) - c y/(r+lambda), written out
  const double y = 10;
  const double Hy = 0.7 * y + 1.2 * 20 - 1.3 * 20 * std::exp(-0.05 * y);
  CHECK(no_trade_value(y, p, 0.7) == doctest::Approx(5 * Hy / 4.35 - y / 5.05));
}

TEST_CASE("do-nothing policy: direct and representation match the closed form") {
  MarketParams p;
  const PolicyCoefficients c = coefficients(p, kGbm);
  ValueOptions opts;
  opts.zero_control = true;
  for (double y : {0.0, 15.0}) {
    const double want = no_trade_value(y, p, 0.7);
    const ValueReport d = estimate_value_direct(p, kGbm, c, y, small(4000), opts);
    const ValueReport r = estimate_value_representation(p, kGbm, c, y, small(4000), opts);
    CHECK(std::abs(d.W.z_score(want)) < 4);
    CHECK(std::abs(r.W.z_score(want)) < 4);
    CHECK(d.V.mean == doctest::Approx(d.W.mean - decomposition_constant(p, 0.7)));
  }
}

TEST_CASE("raw estimator factorises without purchases") {
  // V = E[e^{-r Theta} P_Theta] E[G(0, D)] = lambda/(r+lambda-delta) * (-alpha_p/gamma)
  MarketParams p;
  ValueOptions opts;
  opts.zero_control = true;
  const ValueReport raw = estimate_value_raw(p, kGbm, coefficients(p, kGbm), 0.0, small(20000, 0.05), opts);
  const double want = 5.0 / 4.35 * (-0.8 / 0.05);
  CHECK(want == doctest::Approx(-18.3908).epsilon(1e-4));
  CHECK(std::abs(raw.V.z_score(want)) < 4);
}

TEST_CASE("raw estimator: resampling demand with a fixed price seed moves it only within noise") {
  MarketParams p;
  const PolicyCoefficients c = coefficients(p, kGbm);
  ValueOptions a, b;
  a.event_seed = 1;
  b.event_seed = 2;
  const ValueReport ra = estimate_value_raw(p, kGbm, c, 0.0, small(3000), a);
  const ValueReport rb = estimate_value_raw(p, kGbm, c, 0.0, small(3000), b);
  CHECK(ra.V.mean != rb.V.mean);
  CHECK(std::abs(ra.V.mean - rb.V.mean) < 4 * std::hypot(ra.V.std_error, rb.V.std_error));
}

TEST_CASE("supergradient above the cap has a closed form") {
  // With y fixed above every base level nothing is bought:
  // lambda H'(y)/(beta-delta) - c/beta - P_0
  MarketParams p;
  const PolicyCoefficients c = coefficients(p, kGbm);
  const double y = 60;
  const double want = p.lambda * H_prime(y, p) / 4.35 - p.c / p.beta() - 1.0;
  const Estimate e = backward_residual(p, kGbm, c, y, small(4000));
  CHECK(std::abs(e.z_score(want)) < 4);
  CHECK(e.mean < 0);
}

TEST_CASE("kappa by simulation") {
  CHECK(mc_kappa(Deterministic{0.7}, 5.05, 1000, 1e-2, 1).mean == doctest::Approx(1.0).epsilon(1e-12));
  const Estimate g = mc_kappa(kGbm, 5.05, 20000, 1e-2, 5);
  CHECK(std::abs(g.z_score(kappa(kGbm, 5.05))) < 4);
  const PriceModel jd = JumpDiffusion{0.7, 0.2, 2.0, 9.0};
  const Estimate j = mc_kappa(jd, 5.05, 20000, 1e-2, 5);
  CHECK(std::abs(j.z_score(kappa(jd, 5.05))) < 4);
  // pure jumps, no diffusion: the bridge is trivial and only jump epochs matter
  const PriceModel pj = JumpDiffusion{-2.0, 0.0, 3.0, 2.5};
  const Estimate k = mc_kappa(pj, 1.0, 20000, 0.05, 5);
  CHECK(std::abs(k.z_score(kappa(pj, 1.0))) < 4);
}

TEST_CASE("identity checks at moderate size") {
  const IdentityReport rep = check_identities(kGbm, MarketParams{}, small(4000));
  CHECK(rep.checks.size() >= 5);
  CHECK(rep.all_within(4.0));
}

TEST_CASE("estimates are bit-identical across runs and thread counts") {
  MarketParams p;
  const PolicyCoefficients c = coefficients(p, kGbm);
  McConfig one = small(2500, 2e-2);
  McConfig many = one;
  many.threads = 3;
  const ValueComparison a = estimate_value_all(p, kGbm, c, 0.0, one);
  const ValueComparison b = estimate_value_all(p, kGbm, c, 0.0, one);
  const ValueComparison t = estimate_value_all(p, kGbm, c, 0.0, many);
  for (const auto* x : {&b, &t}) {
    CHECK(a.direct.W.mean == x->direct.W.mean);
    CHECK(a.direct.W.std_error == x->direct.W.std_error);
    CHECK(a.representation.W.mean == x->representation.W.mean);
    CHECK(a.raw.V.mean == x->raw.V.mean);
    CHECK(a.direct_minus_raw.std_error == x->direct_minus_raw.std_error);
  }
  const ValueReport single = estimate_value_direct(p, kGbm, c, 0.0, one);
  CHECK(single.W.mean == a.direct.W.mean);
}

TEST_CASE("tail truncation: doubling the horizon leaves estimates within 1 SE") {
  MarketParams p;
  const PolicyCoefficients c = coefficients(p, kGbm);
  const ValueComparison a = estimate_value_all(p, kGbm, c, 0.0, small(1500, 2e-2, 4.0));
  const ValueComparison b = estimate_value_all(p, kGbm, c, 0.0, small(1500, 2e-2, 8.0));
  CHECK(std::abs(a.direct.W.mean - b.direct.W.mean) < a.direct.W.std_error);
  CHECK(std::abs(a.representation.W.mean - b.representation.W.mean) < a.representation.W.std_error);
  CHECK(std::abs(a.raw.W.mean - b.raw.W.mean) < a.raw.W.std_error);
}

TEST_CASE("quadrature: refining the grid moves estimates only within noise") {
  // Grids of different step are driven by independent increments, so the
  // comparison uses the combined standard error.
  MarketParams p;
  const PolicyCoefficients c = coefficients(p, kGbm);
  const ValueReport a = estimate_value_representation(p, kGbm, c, 0.0, small(4000, 4e-3));
  const ValueReport b = estimate_value_representation(p, kGbm, c, 0.0, small(4000, 2e-3));
  CHECK(std::abs(a.W.mean - b.W.mean) < 3 * std::hypot(a.W.std_error, b.W.std_error));
}

TEST_CASE("newsvendor closed form") {
  MarketParams p;
  const NewsvendorReport nv = newsvendor(p, kGbm);
  CHECK(nv.discounted_price == doctest::Approx(5 / 4.35));
  CHECK(nv.discount == doctest::Approx(5 / 5.05));
  CHECK(nv.eta == doctest::Approx(0.73671).epsilon(1e-5));
  CHECK(nv.y_star == doctest::Approx(26.690).epsilon(1e-4));
  // F_D(y*) = eta
  CHECK(1 - std::exp(-p.gamma * nv.y_star) == doctest::Approx(nv.eta).epsilon(1e-12));
  CHECK(std::abs(newsvendor_L_prime(nv.y_star, p, kGbm)) < 1e-8);
  CHECK(nv.L_star == doctest::Approx(newsvendor_L(nv.y_star, p, kGbm)));
  CHECK_FALSE(nv.comparison.has_value());
  CHECK(newsvendor(p, kGbm, -6.8).comparison.value() == doctest::Approx(-6.8 - nv.L_star));
}

TEST_CASE("newsvendor with a negative fractile orders nothing") {
  MarketParams p;
  p.c = 50;
  const NewsvendorReport nv = newsvendor(p, kGbm);
  CHECK(nv.eta <= 0);
  CHECK(nv.y_star == 0.0);
  CHECK(nv.L_star == doctest::Approx(5 / 4.35 * (-0.8 / 0.05)));
}

TEST_CASE("newsvendor L against a quadrature of G") {
  MarketParams p;
  const double dp = p.lambda / (p.r + p.lambda - 0.7);
  const double unit = 1 + p.c / p.r * (1 - p.lambda / (p.r + p.lambda));
  for (double y : {0.0, 10.0, 26.69, 50.0}) {
    auto f = [&](double d) { return oracle::G(y, d, p.alpha, p.alpha_p, p.alpha_s) * p.gamma * std::exp(-p.gamma * d); };
    const double eg = (y > 0 ? oracle::simpson(f, 0, y) : 0.0) + oracle::simpson(f, y, y + 1200, 200000);
    CHECK(newsvendor_L(y, p, kGbm) == doctest::Approx(dp * eg - unit * y).epsilon(1e-9));
  }
}

TEST_CASE("sweep skips invalid rows and keeps L constant") {
  MarketParams p;
  const auto rows = sweep_sigma(p, 0.7, {-1.0, 0.05, 0.5}, small(500, 2e-2));
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].skipped);
  CHECK_FALSE(rows[0].note.empty());
  CHECK_FALSE(rows[1].skipped);
  CHECK(rows[1].L_star == rows[2].L_star);
  CHECK(rows[1].V0.n == 500);
}
