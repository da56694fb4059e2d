"""No-arbitrage drift of the Musiela equation and its Lipschitz estimates.

``beta(v) = sum_k sigma_k(v) I sigma_k(v)`` where ``I`` is the running
integral from 0.  Besides the drift itself, this module assembles the fully
explicit constants of the estimates used in the well-posedness argument:

* ``||sum_k f_k I g_k||_{L2_-alpha} <= alpha^{-1/2} ||f||_{l2(L2_alpha)} ||g||_{l2(L2_-alpha)}``,
* ``||<h, Ih> - <g, Ig>||_H <= C_alpha (||h|| + ||g||) ||h - g||`` on sequences
  vanishing at infinity, with ``C_alpha = 2 sqrt(2) alpha^{-3/2} + 2 delta / alpha``,
* ``||sigma(v)||_HS <= eta~(delta ||v||) (||v|| + ||psi||)`` and the matching
  local Lipschitz constant on a ball.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from .errors import CorruptedStateError, PreconditionError
from .volatility_models import FunctionModel, LadderedModel, VolatilityModel
from .weighted_spaces import (Curve, Grid, _h_alpha_sq, _l2_weighted_sq,
                              sup_embedding_constant)

__all__ = [
    "DriftReport",
    "LipschitzReport",
    "integral_op",
    "superposition",
    "drift",
    "hs_norm_H",
    "hjm_drift_check",
    "lipschitz_probe_beta",
    "f_ig_constant",
    "quadratic_drift_constant",
    "sigma_growth_bound",
    "sigma_lipschitz_constant",
    "beta_lipschitz_constant",
]


def _cumtrapz(values, dx: float):
    out = np.zeros_like(values, dtype=float)
    np.cumsum(0.5 * dx * (values[..., 1:] + values[..., :-1]), axis=-1, out=out[..., 1:])
    return out


def integral_op(v: Curve) -> Curve:
    """Running integral ``x -> int_0^x v``; the limit slot holds the full integral."""
    w = _cumtrapz(v.values, v.grid.dx)
    return Curve(v.grid, w, float(w[-1]))


def _kahan_sum(terms):
    """Compensated sum over the leading axis, in ascending index order."""
    total = np.zeros_like(terms[0])
    comp = np.zeros_like(terms[0])
    for t in terms:
        y = t - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total


def _superposition_values(model: VolatilityModel, values, grid: Grid):
    return model.eval_all(grid.nodes, values)


def superposition(model: VolatilityModel, v: Curve) -> list[Curve]:
    """The curves ``x -> sigma_k(x, v(x))`` for every factor."""
    vals = _superposition_values(model, v.values, v.grid)
    return [Curve(v.grid, vals[k], float(model.at_infinity(k, v.value_at_infinity)))
            for k in range(model.K)]


def _drift_terms(model: VolatilityModel, values, grid: Grid):
    sig = _superposition_values(model, values, grid)
    cum = _cumtrapz(sig, grid.dx)
    return sig * cum, cum


def _drift_values(model: VolatilityModel, values, grid: Grid):
    return _kahan_sum(_drift_terms(model, values, grid)[0])


@dataclass(frozen=True)
class DriftReport:
    """Drift curve together with its truncation diagnostics.

    Attributes:
        beta: The drift curve ``beta(v)``.
        truncation_tail: l2 mass of the domination bounds of discarded factors.
        per_factor_contribution: ``L2_-alpha`` norms of ``sigma_k(v) I sigma_k(v)``.
    """

    beta: Curve
    truncation_tail: float
    per_factor_contribution: np.ndarray
    alpha: float = 1.0

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "truncation_tail": self.truncation_tail,
            "per_factor_contribution": [float(c) for c in self.per_factor_contribution],
            "beta_value_at_infinity": self.beta.value_at_infinity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.beta.to_csv(d / "beta.csv")
        (d / "drift.json").write_text(self.to_json() + "\n")


def drift(model: VolatilityModel, v: Curve, alpha: float = 1.0) -> DriftReport:
    """HJM drift ``sum_k sigma_k(v) I sigma_k(v)``, summed in ascending factor order."""
    with np.errstate(invalid="ignore", over="ignore"):
        terms, cum = _drift_terms(model, v.values, v.grid)
    if not np.all(np.isfinite(terms)):
        raise CorruptedStateError("non-finite value while forming the drift")
    beta = _kahan_sum(terms)
    vinf = sum(float(model.at_infinity(k, v.value_at_infinity)) * float(cum[k, -1])
               for k in range(model.K))
    contrib = np.sqrt(_l2_weighted_sq(terms, v.grid, alpha, -1))
    return DriftReport(Curve(v.grid, beta, vinf), float(model.truncation_tail), contrib, alpha)


def _hs_h_sq(model: VolatilityModel, values, vinf, grid: Grid, alpha: float):
    """Squared Hilbert-Schmidt norm ``sum_k ||sigma_k(v)||_H^2`` (batched)."""
    sig = _superposition_values(model, values, grid)
    vinf = np.asarray(vinf, dtype=float)
    sig_inf = np.stack([np.asarray(model.at_infinity(k, vinf), dtype=float) for k in range(model.K)])
    return np.sum(_h_alpha_sq(sig, sig_inf, grid, alpha), axis=0)


def hs_norm_H(model: VolatilityModel, v: Curve, alpha: float) -> float:
    """``||sigma(v)||_{HS(U, H_alpha)}`` for the curve ``v``."""
    return float(math.sqrt(_hs_h_sq(model, v.values, v.value_at_infinity, v.grid, alpha)))


# ---------------------------------------------------------------------------
# explicit constants

def f_ig_constant(alpha: float) -> float:
    """Constant of ``||sum f_k I g_k||_{L2_-alpha} <= C ||f||_{l2(L2_alpha)} ||g||_{l2(L2_-alpha)}``.

    From ``exp(-alpha x/2) int_0^x |g| <= exp(alpha x/2) ||g||_{L1_-alpha}`` and
    Cauchy-Schwarz ``||g||_{L1_-alpha} <= alpha^{-1/2} ||g||_{L2_-alpha}``.
    """
    return 1.0 / math.sqrt(alpha)


def quadratic_drift_constant(alpha: float) -> float:
    """Constant of the local Lipschitz bound of ``h -> <h, Ih>`` on ``l2(H_alpha^0)``.

    For ``a, b`` in ``H_alpha`` with ``b(inf) = 0``:
    ``||b||_{L1} <= 2 alpha^{-3/2} ||b||_H`` (pointwise decay bound),
    ``||b||_{L2_alpha} <= (2/alpha) ||b||_H`` (weighted Hardy inequality) and
    ``||a||_inf <= delta ||a||_H``, so that
    ``||a Ib||_H <= (2 sqrt(2) alpha^{-3/2} + 2 delta/alpha) ||a||_H ||b||_H``.
    """
    return 2.0 * math.sqrt(2.0) * alpha ** -1.5 + 2.0 * sup_embedding_constant(alpha) / alpha


def _eta_tilde_scalar(model: VolatilityModel, r: float) -> float:
    return float(np.asarray(model.eta_tilde(np.asarray(r, dtype=float))))


def sigma_growth_bound(model: VolatilityModel, v_norm_h: float, alpha: float) -> float:
    """Right-hand side ``eta~(delta ||v||) (||v|| + ||psi||_{l2(L2_alpha)})``."""
    delta = sup_embedding_constant(alpha)
    return _eta_tilde_scalar(model, delta * v_norm_h) * (v_norm_h + model.psi_norm(alpha))


def sigma_lipschitz_constant(model: VolatilityModel, alpha: float, radius: float) -> float:
    """Explicit Lipschitz constant of ``v -> sigma(v)`` from ``H_alpha`` to ``HS(U, H_alpha)``
    on the ball of the given radius.

    With ``delta`` the sup-embedding constant and ``E = eta~(delta R)``:
    ``L(R) = E (2 delta ||psi|| + 1 + 2 delta R)``.  The terms bound, in order,
    the change of ``d/dx sigma``, the change of ``v'`` and the change of
    ``d/dr sigma`` multiplying ``v'``.
    """
    delta = sup_embedding_constant(alpha)
    e = _eta_tilde_scalar(model, delta * radius)
    return e * (2.0 * delta * model.psi_norm(alpha) + 1.0 + 2.0 * delta * radius)


def _theta_and_lipschitz(model: VolatilityModel, alpha: float):
    """``(||theta||_{l2(L2_alpha)}, ||c||_{l2})`` with ``|sigma_k| <= theta_k`` and
    ``|sigma_k(x, r1) - sigma_k(x, r2)| <= c_k |r1 - r2|``."""
    base = model.base if isinstance(model, LadderedModel) else model
    if not hasattr(base, "lam"):
        raise PreconditionError("explicit beta Lipschitz constant needs an exponential-factor model")
    theta_sq = base.c ** 2 / (2.0 * base.lam - alpha)
    lip = np.abs(base.c)
    return float(math.sqrt(np.sum(theta_sq))), float(np.linalg.norm(lip))


def beta_lipschitz_constant(model: VolatilityModel, alpha: float) -> float:
    """Explicit Lipschitz constant of ``beta`` on ``L2_-alpha``.

    ``||beta(v1) - beta(v2)|| <= (sup_x ||I sigma(v1)(x)||_{l2} + C ||sigma(v2)||) ||sigma(v1) - sigma(v2)||``
    with ``sup_x ||I sigma(v)||_{l2} <= alpha^{-1/2} ||theta||`` and
    ``||sigma(v1) - sigma(v2)||_{l2(L2_-alpha)} <= ||c||_{l2} ||v1 - v2||``, giving
    ``2 alpha^{-1/2} ||theta|| ||c||``.  Cutoffs and clamps only shrink
    ``theta`` and ``c``, so the base-model value also covers laddered models.
    """
    theta, lip = _theta_and_lipschitz(model, alpha)
    return 2.0 * f_ig_constant(alpha) * theta * lip


# ---------------------------------------------------------------------------
# checks

def hjm_drift_check(sigma_bar, K: int, grid: Grid, t: float, T: float) -> float:
    """Compare the maturity-space drift with the Musiela drift at ``x = T - t``.

    Args:
        sigma_bar: Callable ``(k, t, s) -> sigma_bar_k(t, s)``, vectorized in ``s``.
        K: Number of factors.
        grid: Musiela grid; ``T - t`` must not exceed ``x_max``.
        t, T: Calendar time and maturity.

    Returns:
        ``|alpha_bar(t, T) - beta(T - t)|`` where ``alpha_bar`` is computed by
        adaptive quadrature in maturity space and ``beta`` by :func:`drift`
        on the curve ``x -> sigma_bar(t, t + x)``, interpolated linearly.
    """
    if not (0.0 <= t <= T and T - t <= grid.x_max):
        raise PreconditionError("need 0 <= t <= T and T - t <= x_max")
    alpha_bar = 0.0
    for k in range(K):
        inner = integrate.quad(lambda s: float(sigma_bar(k, t, s)), t, T, epsabs=1e-14, epsrel=1e-12)[0]
        alpha_bar += float(sigma_bar(k, t, T)) * inner
    model = FunctionModel(
        sigma=lambda k, x, r: np.broadcast_to(sigma_bar(k, t, t + x), np.broadcast(x, r).shape),
        K=K, psi=lambda k, x: np.zeros_like(x), eta=lambda k, r: np.ones_like(r),
        d1=lambda k, x, r: np.zeros(np.broadcast(x, r).shape),
        d2=lambda k, x, r: np.zeros(np.broadcast(x, r).shape))
    beta = drift(model, Curve.constant(grid, 0.0)).beta
    musiela = float(np.interp(T - t, grid.nodes, beta.values))
    return abs(alpha_bar - musiela)


@dataclass(frozen=True)
class LipschitzReport:
    """Sampled Lipschitz ratio of the drift on ``L2_-alpha``.

    Attributes:
        max_ratio: Largest ``||beta(v1) - beta(v2)|| / ||v1 - v2||`` observed.
        predicted: Explicit constant from :func:`beta_lipschitz_constant`.
        pairs_used: Number of non-degenerate pairs.
        pairs_skipped: Pairs with ``v1 = v2``.
    """

    max_ratio: float
    predicted: float
    pairs_used: int
    pairs_skipped: int
    ratios: np.ndarray = field(repr=False, default=None)

    @property
    def violated(self) -> bool:
        return self.pairs_used > 0 and self.max_ratio > self.predicted


def lipschitz_probe_beta(model: VolatilityModel, alpha: float, samples, grid: Grid | None = None,
                         seed: int = 0) -> LipschitzReport:
    """Sample ``||beta(v1) - beta(v2)||_{L2_-alpha} / ||v1 - v2||_{L2_-alpha}``.

    Args:
        model: Volatility model.
        alpha: Weight exponent.
        samples: Either a sequence of ``(Curve, Curve)`` pairs or a pair count,
            in which case random pairs are drawn on ``grid``.
        grid: Grid for random pairs.
        seed: Seed for random pairs.
    """
    if isinstance(samples, (int, np.integer)):
        from .sampling import random_curves
        if grid is None:
            raise PreconditionError("a grid is required to draw random pairs")
        rng = np.random.default_rng(seed)
        a = random_curves(rng, grid, int(samples), alpha)
        b = random_curves(rng, grid, int(samples), alpha)
    else:
        pairs = list(samples)
        if not pairs:
            raise PreconditionError("need at least one pair")
        grid = pairs[0][0].grid
        a = np.stack([p[0].values for p in pairs])
        b = np.stack([p[1].values for p in pairs])
    diff = np.sqrt(_l2_weighted_sq(a - b, grid, alpha, -1))
    keep = diff > 0
    db = _drift_values(model, a[keep], grid) - _drift_values(model, b[keep], grid)
    ratios = np.sqrt(_l2_weighted_sq(db, grid, alpha, -1)) / diff[keep]
    predicted = beta_lipschitz_constant(model, alpha)
    mx = float(ratios.max()) if ratios.size else float("nan")
    return LipschitzReport(mx, predicted, int(keep.sum()), int((~keep).sum()), ratios)
