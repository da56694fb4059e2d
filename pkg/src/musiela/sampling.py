"""Random curve families for property checks and probes.

Every generator returns a ``(size, n_points)`` array of samples; the value
at infinity of each row is its last sample unless stated otherwise.
"""
from __future__ import annotations

import numpy as np

from .weighted_spaces import Curve, Grid

__all__ = [
    "random_piecewise_linear",
    "random_exponential_mix",
    "random_curves",
    "random_ball",
    "as_curves",
]


def random_piecewise_linear(rng: np.random.Generator, grid: Grid, size: int, n_knots: int = 8,
                            scale: float = 1.0, support: float | None = None, end_value=None):
    """Piecewise-linear curves through random knots, flat after the last knot.

    Args:
        support: Right end of the knot range (defaults to ``0.6 x_max``).
        end_value: Value held after the last knot; ``None`` keeps a random one,
            ``0.0`` gives compactly supported curves.
    """
    support = 0.6 * grid.x_max if support is None else support
    x = grid.nodes
    out = np.empty((size, grid.n_points))
    knots = np.sort(rng.uniform(0.0, support, size=(size, n_knots)), axis=1)
    knots[:, 0] = 0.0
    vals = scale * rng.standard_normal((size, n_knots))
    if end_value is not None:
        vals[:, -1] = end_value
    for i in range(size):
        out[i] = np.interp(x, knots[i], vals[i])
    return out


def random_exponential_mix(rng: np.random.Generator, grid: Grid, size: int, alpha: float,
                           n_terms: int = 3, scale: float = 1.0, min_rate: float | None = None,
                           max_rate: float | None = None, level: bool = False):
    """Sums ``a_0 + sum_i a_i exp(-mu_i x) cos(w_i x)`` with random coefficients.

    Rates default to ``[0.55 alpha, 3 alpha]`` so that every term lies in
    ``L2_alpha``; ``level=True`` adds a random constant ``a_0``.
    """
    lo = 0.55 * alpha if min_rate is None else min_rate
    hi = 3.0 * alpha if max_rate is None else max_rate
    x = grid.nodes
    mu = rng.uniform(lo, hi, size=(size, n_terms, 1))
    om = rng.uniform(0.0, 2.0, size=(size, n_terms, 1)) * (rng.random((size, n_terms, 1)) < 0.5)
    a = scale * rng.standard_normal((size, n_terms, 1))
    out = np.sum(a * np.exp(-mu * x) * np.cos(om * x), axis=1)
    if level:
        out += scale * rng.standard_normal((size, 1))
    return out


def random_curves(rng: np.random.Generator, grid: Grid, size: int, alpha: float, level: bool = True):
    """A mixture of smooth exponential sums and piecewise-linear curves."""
    half = size // 2
    a = random_exponential_mix(rng, grid, half, alpha, level=level)
    b = random_piecewise_linear(rng, grid, size - half, end_value=None if level else 0.0)
    out = np.concatenate([a, b])
    return out[rng.permutation(size)]


def random_ball(rng: np.random.Generator, grid: Grid, size: int, alpha: float, radius: float):
    """Smooth curves rescaled to random ``H_alpha`` norms in ``(0, radius]``."""
    from .weighted_spaces import _h_alpha_sq
    v = random_exponential_mix(rng, grid, size, alpha, min_rate=alpha, level=True)
    norms = np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
    target = radius * rng.uniform(0.05, 1.0, size=size)
    return v * (target / norms)[:, None]


def as_curves(grid: Grid, values, value_at_infinity=None) -> list[Curve]:
    """Wrap rows of an array as :class:`Curve` objects."""
    if value_at_infinity is None:
        return [Curve(grid, row) for row in values]
    return [Curve(grid, row, vi) for row, vi in zip(values, np.broadcast_to(value_at_infinity, len(values)))]
