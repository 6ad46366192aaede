import math

import pytest

import levy_procure as lp


def test_kappa_matches_quadratic_root():
    mu, sigma, beta = 0.7, 0.2, 5.05
    a, b = sigma**2 / 2, sigma**2 / 2 - mu
    theta = (-b + math.sqrt(b * b + 4 * a * beta)) / (2 * a)
    model = lp.GeometricBrownian(mu, sigma)
    assert lp.solve_xi(model, beta) == pytest.approx(theta, rel=1e-12)
    assert lp.kappa(model, beta) == pytest.approx(theta / (1 + theta), rel=1e-12)


def test_baseline_coefficients_and_newsvendor():
    market = lp.MarketParams()
    model = lp.GeometricBrownian(0.7, 0.2)
    c = lp.coefficients(market, model)
    assert c.a == pytest.approx(0.130769230769, rel=1e-10)
    assert lp.base_inventory(1.0, c, market.gamma) == pytest.approx(24.8656593645, rel=1e-10)
    nv = lp.newsvendor(market, model)
    assert nv.eta == pytest.approx(0.73671, abs=5e-6)
    assert nv.y_star == pytest.approx(26.690, abs=5e-4)


def test_jump_diffusion_delta():
    assert lp.effective_delta(lp.JumpDiffusion(0.7, 0.2, 2.0, 9.0)) == pytest.approx(0.95)


def test_simulate_policy_path():
    out = lp.simulate(lp.MarketParams(), lp.GeometricBrownian(0.7, 0.2), horizon=0.5, dt=0.01, seed=3)
    assert set(out) == {"t", "price", "base_inventory", "control", "inventory"}
    assert len(out["t"]) == 51
    assert out["control"][0] == 0.0
    assert all(b >= a for a, b in zip(out["control"], out["control"][1:]))


def test_value_estimate_is_reproducible():
    market = lp.MarketParams()
    model = lp.GeometricBrownian(0.7, 0.2)
    a = lp.estimate_value(market, model, method="representation", n_paths=500, dt=0.02, seed=9)
    b = lp.estimate_value(market, model, method="representation", n_paths=500, dt=0.02, seed=9)
    assert a.W.mean == b.W.mean
    assert a.V.mean == pytest.approx(a.W.mean - 5 * 0.7 * 20 / 4.35)
    assert a.W.n == 500


def test_errors_map_to_python_exceptions():
    bad = lp.MarketParams(alpha_s=1.0)
    with pytest.raises(lp.AssumptionError):
        lp.coefficients(bad, lp.GeometricBrownian(0.7, 0.2))
    with pytest.raises(ValueError):
        lp.estimate_value(lp.MarketParams(), lp.GeometricBrownian(0.7, 0.2), method="nope", n_paths=10)
    checks = {c.name: c for c in lp.validate(bad, lp.GeometricBrownian(0.7, 0.2))}
    assert not checks["salvage_value_bounded"].satisfied
