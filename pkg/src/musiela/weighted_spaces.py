"""Discrete weighted function spaces on the half-line.

Curves are sampled on a uniform grid over ``[0, x_max]`` and carry an extra
slot for their limit at infinity.  Three norms are provided:

* ``L2_{+alpha}`` and ``L2_{-alpha}``: square integrability against
  ``exp(+alpha x) dx`` and ``exp(-alpha x) dx`` (composite trapezoid rule,
  tail beyond ``x_max`` ignored),
* ``H_alpha``: ``|phi(inf)|^2 + int |phi'|^2 exp(alpha x) dx``.

The ``H_alpha`` norm is evaluated for the piecewise-linear interpolant of the
samples, whose slope on each cell is integrated exactly against the weight.
Beyond ``x_max`` the curve is continued by the minimal-energy profile that
connects the last sample to ``value_at_infinity``.  This keeps the
embedding and contraction inequalities of the space exact on the grid rather
than true only up to differencing error.

All functions whose name starts with an underscore operate on raw arrays
whose last axis indexes the grid; they are used by the batched solver and
by the randomized inequality suite.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, CorruptedStateError

__all__ = [
    "Grid",
    "Curve",
    "Weight",
    "SupBoundReport",
    "norm_L2_weighted",
    "inner_L2_weighted",
    "norm_H_alpha",
    "norm_L1",
    "negative_part",
    "sup_norm_bound_check",
    "sup_embedding_constant",
    "l1_embedding_constant",
    "discrete_l1_embedding_constant",
    "tail_bound",
]


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``0 = x_0 < ... < x_{N-1} = x_max``.

    Attributes:
        x_max: Maturity horizon in years.
        n_points: Number of nodes, at least 3.
    """

    x_max: float
    n_points: int

    def __post_init__(self):
        if not (isinstance(self.n_points, (int, np.integer)) and self.n_points >= 3):
            raise ConfigurationError(f"n_points must be an integer >= 3, got {self.n_points!r}")
        if not (math.isfinite(self.x_max) and self.x_max > 0):
            raise ConfigurationError(f"x_max must be positive and finite, got {self.x_max!r}")
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n_points", int(self.n_points))

    @classmethod
    def from_spacing(cls, x_max: float, dx: float) -> "Grid":
        """Build a grid from its spacing; ``x_max`` must be a multiple of ``dx``."""
        if not (dx > 0 and math.isfinite(dx)):
            raise ConfigurationError(f"dx must be positive, got {dx!r}")
        cells = x_max / dx
        n_cells = int(round(cells))
        if n_cells < 2 or abs(cells - n_cells) > 1e-9 * max(1.0, cells):
            raise ConfigurationError(f"x_max={x_max} is not a multiple of dx={dx}")
        return cls(x_max, n_cells + 1)

    @property
    def dx(self) -> float:
        return self.x_max / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.arange(self.n_points, dtype=float) * self.dx
        x[-1] = self.x_max
        x.setflags(write=False)
        return x

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n_points, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        w.setflags(write=False)
        return w

    def weighted_trapezoid(self, alpha: float, sign: int) -> np.ndarray:
        """Trapezoid weights multiplied by the density ``exp(sign*alpha*x)``."""
        return self.trapezoid_weights * np.exp(sign * alpha * self.nodes)

    def cell_energy_weights(self, alpha: float) -> np.ndarray:
        """Exact integrals of ``exp(alpha x)`` over each cell (length N-1)."""
        x = self.nodes[:-1]
        return np.exp(alpha * x) * np.expm1(alpha * self.dx) / alpha

    def lattice_index(self, t: float) -> int | None:
        """Return ``t/dx`` if ``t`` lies on the lattice, otherwise ``None``."""
        k = t / self.dx
        kr = int(round(k))
        if abs(k - kr) <= 1e-9 * max(1.0, abs(k)):
            return kr
        return None


@dataclass(frozen=True)
class Weight:
    """Exponential weight ``exp(sign * alpha * x)``.

    Attributes:
        alpha: Weight exponent, strictly positive.
        sign: ``+1`` for ``L2_alpha``, ``-1`` for ``L2_{-alpha}``.
    """

    alpha: float
    sign: int = 1

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigurationError(f"alpha must be positive, got {self.alpha!r}")
        if self.sign not in (1, -1):
            raise ConfigurationError(f"sign must be +1 or -1, got {self.sign!r}")

    def density(self, x):
        return np.exp(self.sign * self.alpha * np.asarray(x, dtype=float))


def _check_finite(arr, what="curve"):
    if not np.all(np.isfinite(arr)):
        raise CorruptedStateError(f"{what} contains non-finite entries")


@dataclass(frozen=True, eq=False)
class Curve:
    """Sampled curve on a grid with an explicit limit at infinity.

    Attributes:
        grid: The grid the samples live on.
        values: One sample per node (stored read-only).
        value_at_infinity: The limit ``phi(inf)``; defaults to the last sample.
    """

    grid: Grid
    values: np.ndarray
    value_at_infinity: float | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"expected {self.grid.n_points} samples, got shape {vals.shape}")
        _check_finite(vals)
        vinf = vals[-1] if self.value_at_infinity is None else float(self.value_at_infinity)
        if not math.isfinite(vinf):
            raise CorruptedStateError("value_at_infinity is not finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "value_at_infinity", float(vinf))

    @classmethod
    def from_function(cls, grid: Grid, f, value_at_infinity: float | None = None) -> "Curve":
        return cls(grid, f(grid.nodes), value_at_infinity)

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "Curve":
        return cls(grid, np.full(grid.n_points, float(c)), float(c))

    def replace(self, values, value_at_infinity=None) -> "Curve":
        return Curve(self.grid, values, value_at_infinity)

    def _coerce(self, other):
        if isinstance(other, Curve):
            if other.grid != self.grid:
                raise ConfigurationError("curves live on different grids")
            return other.values, other.value_at_infinity
        return float(other), float(other)

    def __add__(self, other):
        v, vi = self._coerce(other)
        return Curve(self.grid, self.values + v, self.value_at_infinity + vi)

    __radd__ = __add__

    def __sub__(self, other):
        v, vi = self._coerce(other)
        return Curve(self.grid, self.values - v, self.value_at_infinity - vi)

    def __mul__(self, other):
        v, vi = self._coerce(other)
        return Curve(self.grid, self.values * v, self.value_at_infinity * vi)

    __rmul__ = __mul__

    def __neg__(self):
        return Curve(self.grid, -self.values, -self.value_at_infinity)

    def __repr__(self):
        return (f"Curve(n_points={self.grid.n_points}, x_max={self.grid.x_max}, "
                f"min={self.values.min():.6g}, max={self.values.max():.6g}, "
                f"value_at_infinity={self.value_at_infinity:.6g})")

    def to_csv(self, path=None) -> str:
        """Serialize as ``x,value`` rows plus a trailing ``inf`` row."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "value"])
        for x, v in zip(self.grid.nodes, self.values):
            writer.writerow([repr(float(x)), repr(float(v))])
        writer.writerow(["inf", repr(self.value_at_infinity)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "Curve":
        """Parse the format written by :meth:`to_csv` (a path or the text itself)."""
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            text = Path(source).read_text()
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["x", "value"]:
            raise ConfigurationError("curve CSV must start with the header 'x,value'")
        body, last = rows[1:-1], rows[-1]
        if last[0] != "inf":
            raise ConfigurationError("curve CSV must end with an 'inf' row")
        xs = np.array([float(r[0]) for r in body])
        vals = np.array([float(r[1]) for r in body])
        grid = Grid(float(xs[-1]), len(xs))
        if not np.allclose(xs, grid.nodes, rtol=0, atol=1e-12 * max(1.0, grid.x_max)):
            raise ConfigurationError("curve CSV nodes are not uniform")
        return cls(grid, vals, float(last[1]))


# ---------------------------------------------------------------------------
# array kernels (last axis = grid)

def _l2_weighted_sq(values, grid: Grid, alpha: float, sign: int):
    return np.sum(values * values * grid.weighted_trapezoid(alpha, sign), axis=-1)


def _inner_weighted(u, v, grid: Grid, alpha: float, sign: int):
    return np.sum(u * v * grid.weighted_trapezoid(alpha, sign), axis=-1)


def _h_alpha_sq(values, vinf, grid: Grid, alpha: float):
    """Squared ``H_alpha`` norm of the interpolant plus minimal-energy tail.

    On ``[x_max, inf)`` the cheapest continuation from the last sample to
    ``vinf`` has energy ``alpha * (vinf - v_last)^2 * exp(alpha x_max)``.
    """
    vinf = np.asarray(vinf, dtype=float)
    slopes = np.diff(values, axis=-1) / grid.dx
    energy = np.sum(slopes * slopes * grid.cell_energy_weights(alpha), axis=-1)
    jump = vinf - values[..., -1]
    tail = alpha * jump * jump * math.exp(alpha * grid.x_max)
    return vinf * vinf + energy + tail


def _l1(values, grid: Grid):
    return np.sum(np.abs(values) * grid.trapezoid_weights, axis=-1)


# ---------------------------------------------------------------------------
# public curve-level API

def norm_L2_weighted(v: Curve, w: Weight) -> float:
    """Weighted L2 norm by the composite trapezoid rule on ``[0, x_max]``."""
    _check_finite(v.values)
    return float(math.sqrt(_l2_weighted_sq(v.values, v.grid, w.alpha, w.sign)))


def inner_L2_weighted(u: Curve, v: Curve, w: Weight) -> float:
    """Weighted L2 inner product by the composite trapezoid rule."""
    return float(_inner_weighted(u.values, v.values, u.grid, w.alpha, w.sign))


def norm_H_alpha(v: Curve, alpha: float) -> float:
    """``H_alpha`` norm: ``sqrt(phi(inf)^2 + int |phi'|^2 exp(alpha x) dx)``."""
    if not alpha > 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha!r}")
    return float(math.sqrt(_h_alpha_sq(v.values, v.value_at_infinity, v.grid, alpha)))


def norm_L1(v: Curve) -> float:
    """Trapezoid integral of ``|v|`` over ``[0, x_max]``."""
    return float(_l1(v.values, v.grid))


def negative_part(v: Curve) -> Curve:
    """Pointwise ``max(-v, 0)``, including the value at infinity."""
    return Curve(v.grid, np.maximum(-v.values, 0.0), max(-v.value_at_infinity, 0.0))


def sup_embedding_constant(alpha: float) -> float:
    """Upper bound ``1 + 1/sqrt(alpha)`` for the embedding ``H_alpha -> L^inf``."""
    return 1.0 + 1.0 / math.sqrt(alpha)


def l1_embedding_constant(alpha: float) -> float:
    """Constant ``1/sqrt(alpha)`` of the embedding ``L2_alpha -> L1``."""
    return 1.0 / math.sqrt(alpha)


def discrete_l1_embedding_constant(grid: Grid, alpha: float) -> float:
    """Cauchy-Schwarz constant of the trapezoid rule, ``sqrt(Q[exp(-alpha x)])``.

    It exceeds ``1/sqrt(alpha)`` by a relative ``O(alpha^2 dx^2)`` quadrature
    error; the difference is the quadrature tolerance of the embedding.
    """
    return float(math.sqrt(np.sum(grid.weighted_trapezoid(alpha, -1))))


def tail_bound(norm: float, alpha: float, x_max: float) -> float:
    """Analytic bound ``norm * exp(-alpha x_max / 2) / sqrt(alpha)`` on the truncated tail."""
    return norm * math.exp(-0.5 * alpha * x_max) / math.sqrt(alpha)


@dataclass(frozen=True)
class SupBoundReport:
    """Outcome of :func:`sup_norm_bound_check`.

    Attributes:
        excess: ``max_x |v(x) - v(inf)| - ||v||_H exp(-alpha x/2)/sqrt(alpha)``.
        worst_node: Index where the excess is attained.
        h_norm: The ``H_alpha`` norm used in the bound.
    """

    excess: float
    worst_node: int
    h_norm: float

    @property
    def slack(self) -> float:
        return -self.excess

    def passed(self, tol: float = 1e-9) -> bool:
        return self.excess <= tol


def _sup_bound_excess(values, vinf, grid: Grid, alpha: float):
    h = np.sqrt(_h_alpha_sq(values, vinf, grid, alpha))
    bound = h[..., None] * np.exp(-0.5 * alpha * grid.nodes) / math.sqrt(alpha)
    return np.abs(values - np.asarray(vinf)[..., None]) - bound


def sup_norm_bound_check(v: Curve, alpha: float) -> SupBoundReport:
    """Check ``|v(x) - v(inf)| <= ||v||_H exp(-alpha x / 2) / sqrt(alpha)`` at every node."""
    excess = _sup_bound_excess(v.values, v.value_at_infinity, v.grid, alpha)
    i = int(np.argmax(excess))
    return SupBoundReport(float(excess[i]), i, norm_H_alpha(v, alpha))
