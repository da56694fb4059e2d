import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from musiela import (ConfigurationError, Curve, Grid, PreconditionError, YosidaParam, resolvent, shift, yosida_apply,
                     yosida_negative_pairing)
from musiela.weighted_spaces import Weight, _inner_weighted, norm_H_alpha, norm_L2_weighted


@pytest.fixture
def grid():
    return Grid.from_spacing(20.0, 0.05)


def test_shift_is_an_index_shift_filled_with_the_limit(grid):
    v = Curve(grid, np.sin(grid.nodes), 0.3)
    w = shift(v, 0.25)
    np.testing.assert_array_equal(w.values[:-5], v.values[5:])
    np.testing.assert_array_equal(w.values[-5:], 0.3)
    assert w.value_at_infinity == 0.3


def test_shift_sign_convention_moves_towards_longer_maturities(grid):
    # S(dt) v(x) = v(x + dt) = v(x) + dt v'(x) + O(dt^2)
    v = Curve.from_function(grid, lambda x: np.exp(-0.5 * x) * np.cos(x))
    dv = -0.5 * np.exp(-0.5 * grid.nodes) * np.cos(grid.nodes) - np.exp(-0.5 * grid.nodes) * np.sin(grid.nodes)
    w = shift(v, grid.dx)
    err = np.max(np.abs(w.values[:-1] - (v.values + grid.dx * dv)[:-1]))
    assert err < grid.dx ** 2


def test_shift_rejects_off_lattice_and_negative_times(grid):
    v = Curve.constant(grid, 1.0)
    with pytest.raises(PreconditionError):
        shift(v, 0.03)
    with pytest.raises(PreconditionError):
        shift(v, -0.05)


def test_shift_is_a_semigroup(grid):
    v = Curve.from_function(grid, np.cos, 0.0)
    a = shift(shift(v, 0.5), 1.0)
    b = shift(v, 1.5)
    np.testing.assert_array_equal(a.values, b.values)


# ---------------------------------------------------------------------------
# resolvent

@pytest.mark.parametrize("lam", [0.05, 0.2, 1.0, 3.0])
def test_resolvent_of_exponential_closed_form(grid, lam):
    v = Curve(grid, np.exp(-grid.nodes), 0.0)
    w = resolvent(v, lam)
    exact = np.exp(-grid.nodes) / (1.0 + lam)
    assert np.max(np.abs(w.values - exact)) <= 5.0 * grid.dx ** 2


def test_resolvent_matches_kernel_quadrature_of_interpolant():
    # w(x) = (1/lam) int_x^inf exp(-(y - x)/lam) v(y) dy, with v = v_inf beyond x_max
    g = Grid.from_spacing(3.0, 0.25)
    rng = np.random.default_rng(3)
    v = Curve(g, rng.standard_normal(g.n_points), 0.4)
    lam = 0.7
    interp = lambda y: np.interp(y, g.nodes, v.values)
    expected = []
    for x in g.nodes:
        body = integrate.quad(lambda y: math.exp(-(y - x) / lam) * interp(y) / lam, x, g.x_max,
                              points=list(g.nodes[(g.nodes > x) & (g.nodes < g.x_max)]), limit=200)[0]
        tail = 0.4 * math.exp(-(g.x_max - x) / lam)
        expected.append(body + tail)
    np.testing.assert_allclose(resolvent(v, lam).values, expected, atol=1e-10)


def test_resolvent_fixes_constants(grid):
    w = resolvent(Curve.constant(grid, 2.5), 0.3)
    np.testing.assert_allclose(w.values, 2.5)


def test_resolvent_rejects_nonpositive_lambda(grid):
    with pytest.raises(ConfigurationError):
        resolvent(Curve.constant(grid, 1.0), 0.0)
    with pytest.raises(ConfigurationError):
        YosidaParam(-1.0)


# ---------------------------------------------------------------------------
# Yosida approximation

@pytest.mark.parametrize("lam", [0.05, 0.5])
def test_yosida_of_exponential_closed_form(grid, lam):
    # A e^{-x} = e^{-x}, so A_lam e^{-x} = e^{-x} / (1 + lam)
    v = Curve(grid, np.exp(-grid.nodes), 0.0)
    y = yosida_apply(v, YosidaParam(lam))
    assert np.max(np.abs(y.values - np.exp(-grid.nodes) / (1 + lam))) <= 5.0 * grid.dx ** 2 / lam


def test_yosida_converges_to_the_generator(grid):
    v = Curve.from_function(grid, lambda x: np.exp(-x) * np.sin(2 * x), 0.0)
    av = np.exp(-grid.nodes) * np.sin(2 * grid.nodes) - 2 * np.exp(-grid.nodes) * np.cos(2 * grid.nodes)
    errs = [np.max(np.abs(yosida_apply(v, YosidaParam(lam)).values - av)) for lam in (0.4, 0.2, 0.1)]
    assert errs[0] > errs[1] > errs[2]


def test_unshifted_yosida_sign_property_fails_in_negative_weight():
    # h = -(1 - e^{-x}): <A h, h^->_{L2_-1} = int e^{-2x}(1 - e^{-x}) dx = 1/6 > 0
    g = Grid.from_spacing(30.0, 0.01)
    h = Curve(g, -(1.0 - np.exp(-g.nodes)), -1.0)
    value = yosida_negative_pairing(h, YosidaParam(0.01), 1.0, shift_c=0.0)
    assert value == pytest.approx(1.0 / 6.0, abs=0.01)


def test_shifted_yosida_sign_property_holds_on_counterexample():
    # with B = A + alpha/2 the pairing becomes 1/6 - (1/2)(1/3) = 0 in the limit, and stays <= 0
    g = Grid.from_spacing(30.0, 0.01)
    h = Curve(g, -(1.0 - np.exp(-g.nodes)), -1.0)
    values = [yosida_negative_pairing(h, YosidaParam(lam), 1.0) for lam in (1.0, 0.1, 0.01)]
    assert max(values) <= 1e-12
    assert values[-1] == pytest.approx(0.0, abs=0.01)


def test_yosida_pairing_needs_the_tail_beyond_the_grid():
    # h = -1 + 3 e^{-0.75 x} on [0, 10] with alpha = 0.25: the grid part alone is positive
    g = Grid.from_spacing(10.0, 0.1)
    h = Curve.from_function(g, lambda x: -1.0 + 3.0 * np.exp(-0.75 * x))
    p = YosidaParam(0.25)
    y = yosida_apply(h, p, shift_c=0.125)
    grid_only = _inner_weighted(y.values, np.maximum(-h.values, 0.0), g, 0.25, -1)
    assert grid_only > 0
    assert yosida_negative_pairing(h, p, 0.25) <= 0


smooth = st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.6, 3.0), st.floats(0.0, 2.0))


def _curve(g, level, a, mu, om):
    return Curve.from_function(g, lambda x: level + a * np.exp(-mu * x) * np.cos(om * x))


@given(smooth, st.floats(0.2, 2.5), st.integers(1, 100))
def test_shift_contracts_H_and_weighted_L2(params, alpha, k):
    g = Grid.from_spacing(10.0, 0.1)
    v = _curve(g, *params)
    t = k * g.dx
    w = shift(v, t)
    assert norm_H_alpha(w, alpha) <= norm_H_alpha(v, alpha) * (1 + 1e-12) + 1e-14
    neg = Weight(alpha, -1)
    assert math.exp(-0.5 * alpha * t) * norm_L2_weighted(w, neg) <= norm_L2_weighted(v, neg) * (1 + 1e-12) + 1e-14
    # in L2_{+alpha} the curve must vanish at the end of the grid
    tapered = v * Curve.from_function(g, lambda x: 1.0 - x / g.x_max)
    pos = Weight(alpha)
    assert norm_L2_weighted(shift(tapered, t), pos) <= norm_L2_weighted(tapered, pos) * (1 + 1e-12) + 1e-14


@given(smooth, st.floats(0.2, 2.5), st.floats(0.01, 3.0))
def test_resolvent_contracts_H_and_preserves_order(params, alpha, lam):
    g = Grid.from_spacing(10.0, 0.1)
    v = _curve(g, *params)
    w = resolvent(v, lam)
    assert norm_H_alpha(w, alpha) <= norm_H_alpha(v, alpha) * (1 + 1e-12) + 1e-14
    pos = resolvent(Curve(g, np.abs(v.values), abs(v.value_at_infinity)), lam)
    assert pos.values.min() >= 0.0


@given(smooth, st.floats(0.2, 2.5), st.floats(0.01, 3.0))
def test_shifted_yosida_is_dissipative_against_negative_part(params, alpha, lam):
    g = Grid.from_spacing(10.0, 0.1)
    h = _curve(g, *params)
    assert yosida_negative_pairing(h, YosidaParam(lam), alpha) <= 1e-12
