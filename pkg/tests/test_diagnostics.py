import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from musiela import (
    ConfigurationError,
    Curve,
    Grid,
    PreconditionError,
    Report,
    SimConfig,
    SmoothNegEnergy,
    builtin_additive,
    builtin_exp_saturating,
    builtin_zero,
    condition_c_probe,
    ladder_convergence,
    martingale_test,
    neg_energy,
    neg_energy_derivative_check,
    positivity_report,
    simulate,
    solution_ladder_convergence,
    yosida_convergence,
)
from musiela.diagnostics import (
    discounted_bond,
    neg_energy_bound,
    neg_energy_derivative,
    negative_part_sigma_bound_check,
    positivity_tolerance,
)
from musiela.sampling import as_curves, random_curves
from musiela.weighted_spaces import Weight, negative_part, norm_L2_weighted


@pytest.fixture
def grid():
    return Grid.from_spacing(10.0, 0.1)


# ---------------------------------------------------------------------------
# smooth negative-part energy

@given(st.integers(1, 200), st.floats(-20, 20))
def test_g_n_sits_below_the_limit_within_the_bound(n, x):
    e = SmoothNegEnergy(n)
    limit = 0.5 * min(x, 0.0) ** 2
    g = float(e.g(x))
    assert 0.0 <= g <= limit + 1e-15
    assert limit - g <= float(e.error_bound(x)) + 1e-15


@given(st.integers(1, 100), st.floats(-5, 5))
def test_g_n_increases_with_n(n, x):
    assert float(SmoothNegEnergy(n).g(x)) <= float(SmoothNegEnergy(n + 1).g(x)) + 1e-15


def test_g_n_derivatives_are_consistent():
    e = SmoothNegEnergy(4)
    x = np.linspace(-2, 1, 601)
    x = x[(np.abs(x) > 1e-3) & (np.abs(x + 0.25) > 1e-3)]
    h = 1e-6
    np.testing.assert_allclose(e.dg(x), (e.g(x + h) - e.g(x - h)) / (2 * h), atol=1e-8)
    np.testing.assert_allclose(e.ddg(x), (e.dg(x + h) - e.dg(x - h)) / (2 * h), atol=1e-6)
    assert np.all((0.0 <= e.ddg(x)) & (e.ddg(x) <= 1.0))


def test_g_n_closed_form_values():
    e = SmoothNegEnergy(2)
    # inside the cubic zone: -n x^3 / 6
    assert float(e.g(-0.25)) == pytest.approx(2 * 0.25 ** 3 / 6)
    # beyond it: x^2/2 + x/(2n) + 1/(6 n^2)
    assert float(e.g(-1.0)) == pytest.approx(0.5 - 0.25 + 1 / 24)
    assert float(e.g(0.3)) == 0.0
    with pytest.raises(ConfigurationError):
        SmoothNegEnergy(0)


def test_neg_energy_converges_to_half_squared_negative_norm(grid):
    rng = np.random.default_rng(0)
    for values in random_curves(rng, grid, 20, 1.0):
        u = Curve(grid, values)
        target = 0.5 * norm_L2_weighted(negative_part(u), Weight(1.0, -1)) ** 2
        errs = []
        for n in (1, 4, 16, 64):
            e = SmoothNegEnergy(n)
            err = target - neg_energy(u, e, 1.0)
            assert -1e-15 <= err <= neg_energy_bound(u, e, 1.0) + 1e-15
            errs.append(err)
        assert errs == sorted(errs, reverse=True)


def test_neg_energy_derivative_check_shows_first_order_remainder(grid):
    u = Curve.from_function(grid, lambda x: np.sin(2 * x) - 0.2)
    v = Curve.from_function(grid, lambda x: np.exp(-0.3 * x) * np.cos(x))
    rep = neg_energy_derivative_check(u, v, SmoothNegEnergy(8), 1.0)
    assert rep.passed
    assert rep.metrics["observed_order"] == pytest.approx(1.0, abs=0.2)
    assert rep.metrics["derivative"] == pytest.approx(neg_energy_derivative(u, v, SmoothNegEnergy(8), 1.0))
    with pytest.raises(PreconditionError):
        neg_energy_derivative_check(u, Curve.constant(grid, 0.0), SmoothNegEnergy(8), 1.0)


# ---------------------------------------------------------------------------
# positivity

def test_positivity_tolerance_scale(grid):
    assert positivity_tolerance(Curve.constant(grid, -0.03)) == pytest.approx(1.03e-8)


def test_positivity_report_counts_transported_dip(grid):
    # with sigma = 0 a dip at x = 1 travels to x = 0 in ten steps and then leaves the grid
    vals = np.full(grid.n_points, 0.01)
    vals[10] = -0.005
    u0 = Curve(grid, vals, 0.01)
    cfg = SimConfig(grid, 0.1, 2.0, builtin_zero(), paths=2, seed=0)
    rep = positivity_report(simulate(cfg, u0))
    assert not rep.passed
    assert rep.metrics["violations"] == 2 * 11
    assert rep.metrics["samples"] == 2 * 21
    assert rep.metrics["first_violation"] == {"path": 0, "step": 0, "node": 10, "value": -0.005}
    assert rep.metrics["global_min"] == -0.005
    assert rep.config_hash == cfg.config_hash()
    with pytest.raises(ConfigurationError):
        positivity_report(simulate(cfg, u0), tol=-1.0)


def test_positivity_report_passes_on_nonnegative_transport(grid):
    u0 = Curve.from_function(grid, lambda x: 0.02 + 0.01 * np.exp(-x), 0.02)
    rep = positivity_report(simulate(SimConfig(grid, 0.1, 1.0, builtin_zero(), paths=2), u0))
    assert rep.passed and rep.metrics["violations"] == 0


# ---------------------------------------------------------------------------
# condition (c)

def test_condition_c_bounded_for_saturating_model(grid, exp_tanh_model):
    rep = condition_c_probe(exp_tanh_model, 1.0, grid, n_states=50)
    assert rep.verdict == "bounded"
    assert rep.metrics["samples"] > 0


@pytest.mark.parametrize("drift_on", [False, True])
def test_condition_c_diverges_for_state_independent_model(grid, drift_on):
    rep = condition_c_probe(builtin_additive(1, 0.02, 1.0), 1.0, grid, n_states=50, drift_on=drift_on)
    assert rep.verdict == "diverging"
    assert rep.metrics["small_eps_slope"] == pytest.approx(-2.0, abs=0.05)


def test_condition_c_inconclusive_without_negative_states(grid, exp_tanh_model):
    rep = condition_c_probe(exp_tanh_model, 1.0, grid, n_states=5,
                            sampler=lambda rng, size: np.ones((size, grid.n_points)))
    assert rep.verdict == "inconclusive"


# ---------------------------------------------------------------------------
# martingale test

def test_discounted_bond_of_flat_curve_is_exact(grid):
    u0 = Curve.constant(grid, 0.03)
    cfg = SimConfig(grid, 0.1, 2.0, builtin_zero(), paths=3, snapshot_every=10)
    ps = simulate(cfg, u0)
    np.testing.assert_allclose(discounted_bond(ps, 5.0, 1.0), math.exp(-0.03 * 5.0), rtol=1e-12)
    with pytest.raises(PreconditionError):
        discounted_bond(ps, 5.0, 1.5)


def test_martingale_test_passes_for_deterministic_flat_curve(grid):
    u0 = Curve.constant(grid, 0.03)
    cfg = SimConfig(grid, 0.1, 2.0, builtin_zero(), paths=3, snapshot_every=10)
    rep = martingale_test(simulate(cfg, u0), 5.0)
    assert rep.passed
    assert rep.metrics["insufficient_paths"] is True
    assert all(abs(r["deviation"]) < 1e-12 for r in rep.metrics["checkpoints"])


def test_martingale_test_rejects_bad_horizon(grid):
    cfg = SimConfig(grid, 0.1, 2.0, builtin_zero(), paths=2, snapshot_every=10)
    ps = simulate(cfg, Curve.constant(grid, 0.01))
    with pytest.raises(PreconditionError):
        martingale_test(ps, 12.0)
    with pytest.raises(PreconditionError):
        martingale_test(ps, 1.0)


# ---------------------------------------------------------------------------
# ladders and Yosida

def test_ladder_convergence_on_few_curves(grid, exp_tanh_model):
    rng = np.random.default_rng(1)
    samples = as_curves(grid, random_curves(rng, grid, 5, 1.0))
    for kind in ("maturity", "state"):
        rep = ladder_convergence(exp_tanh_model, kind, samples, 1.0)
        assert rep.passed, rep.text()
    rep = ladder_convergence(exp_tanh_model, "maturity", samples, 1.0)
    assert rep.metrics["psi_bar_norm"][0] > rep.metrics["psi_bar_norm"][-1]
    with pytest.raises(ConfigurationError):
        ladder_convergence(exp_tanh_model, "diagonal", samples, 1.0)


def test_negative_part_sigma_bound(grid, exp_tanh_model):
    rep = negative_part_sigma_bound_check(exp_tanh_model, 1.0, grid, samples=200)
    assert rep.passed and rep.metrics["violations"] == 0


def test_solution_ladder_convergence_small(grid, exp_tanh_model):
    u0 = Curve.from_function(grid, lambda x: 0.02 + 0.01 * np.exp(-x), 0.02)
    cfg = SimConfig(grid, 0.1, 2.0, exp_tanh_model, paths=6, seed=0)
    rep = solution_ladder_convergence(cfg, u0, m_values=(1, 2, 4), n_values=(2, 4, 8))
    assert rep.passed, rep.text()
    assert rep.metrics["n_gaps"][0] > rep.metrics["n_gaps"][-1]


def test_yosida_convergence_on_transport(grid):
    u0 = Curve.from_function(grid, lambda x: 0.02 + 0.01 * np.exp(-x), 0.02)
    rep = yosida_convergence(SimConfig(grid, 0.1, 2.0, builtin_zero(), paths=3), u0)
    assert rep.passed
    gaps = rep.metrics["gaps"]
    assert gaps == sorted(gaps, reverse=True)
    with pytest.raises(ConfigurationError):
        yosida_convergence(SimConfig(grid, 0.1, 2.0, builtin_zero(), paths=1), u0, lambdas=(0.1, -1.0))


# ---------------------------------------------------------------------------
# report schema

def test_report_schema_and_text():
    rep = Report("demo", "pass", {"x": np.float64(1.5), "rows": [{"a": 1, "b": 0.25}],
                                  "nested": {"v": [1, 2]}, "bad": float("inf")}, "abc")
    doc = json.loads(rep.to_json())
    assert set(doc) == {"report_type", "verdict", "metrics", "config_hash"}
    assert doc["metrics"]["bad"] == "inf"
    text = rep.text()
    assert text.splitlines()[0] == "demo: pass"
    assert "a=1, b=0.25" in text and "nested:" in text
    assert Report("c", "bounded").passed and not Report("c", "diverging").passed
