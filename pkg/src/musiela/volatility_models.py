"""Superposition volatility families and their approximation ladders.

A model is a finite family ``sigma_k(x, r)``, ``k = 0..K-1``, acting on a
curve ``v`` through ``x -> sigma_k(x, v(x))``.  Every model carries the
domination data used by the estimates of the package:

* ``psi_k(x)`` with ``|d/dx sigma_k(x, r)| <= psi_k(x) eta_k(r)``,
* ``eta_k(r)`` with ``|d/dr sigma_k(x, r)| <= eta_k(r)``.

Two ladders regularize a model: the maturity cutoff
``sigma_k(x, r) chi_n(x)`` and the state clamp ``sigma_k(x, phi_m(r))``.
"""
from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
from scipy import integrate

from .errors import ConfigurationError
from .weighted_spaces import Curve, Grid

__all__ = [
    "chi",
    "chi_prime",
    "phi",
    "phi_prime",
    "phi_second",
    "VolatilityModel",
    "ExponentialFactorModel",
    "FunctionModel",
    "LadderedModel",
    "apply_ladder",
    "psi_ladder_norms",
    "builtin_exp_saturating",
    "builtin_additive",
    "builtin_zero",
]


def _check_index(n, name="n"):
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ConfigurationError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


# ---------------------------------------------------------------------------
# cutoff and clamp functions

def chi(n: int, x):
    """Cosine-ramp cutoff: 1 on ``[0, n]``, 0 on ``[n+1, inf)``."""
    x = np.asarray(x, dtype=float)
    s = np.clip(x - n, 0.0, 1.0)
    return 0.5 * (1.0 + np.cos(np.pi * s))


def chi_prime(n: int, x):
    """Derivative of :func:`chi`; bounded by ``pi/2``."""
    x = np.asarray(x, dtype=float)
    inside = (x > n) & (x < n + 1)
    return np.where(inside, -0.5 * np.pi * np.sin(np.pi * (x - n)), 0.0)


def phi(m: int, r):
    """Odd clamp whose derivative is ``chi_m(|r|)``.

    Equal to ``r`` on ``[-m, m]``, to ``m + (s/2) + sin(pi s)/(2 pi)`` with
    ``s = |r| - m`` on the ramp, and to ``m + 1/2`` beyond ``m + 1``.
    """
    r = np.asarray(r, dtype=float)
    a = np.abs(r)
    s = np.clip(a - m, 0.0, 1.0)
    ramp = m + 0.5 * s + np.sin(np.pi * s) / (2.0 * np.pi)
    return np.where(a <= m, r, np.sign(r) * ramp)


def phi_prime(m: int, r):
    return chi(m, np.abs(np.asarray(r, dtype=float)))


def phi_second(m: int, r):
    r = np.asarray(r, dtype=float)
    return np.sign(r) * chi_prime(m, np.abs(r))


# ---------------------------------------------------------------------------
# models

class VolatilityModel:
    """Base class for a finite family of superposition volatilities.

    Subclasses implement :meth:`eval`, :meth:`d1`, :meth:`d2`, :meth:`psi` and
    :meth:`eta`.  The ``*_all`` methods evaluate every factor at once and
    return arrays with a leading factor axis.

    Attributes:
        K: Number of factors.
        exact_derivatives: False when derivatives are finite differences.
        truncation_tail: l2 mass of the dominating bounds of discarded factors.
    """

    K: int = 0
    exact_derivatives: bool = True
    truncation_tail: float = 0.0

    def eval(self, k, x, r):
        raise NotImplementedError

    def d1(self, k, x, r):
        raise NotImplementedError

    def d2(self, k, x, r):
        raise NotImplementedError

    def psi(self, k, x):
        raise NotImplementedError

    def eta(self, k, r):
        raise NotImplementedError

    def at_infinity(self, k, r):
        """Limit of ``sigma_k(x, r)`` as ``x -> inf`` (zero for every builtin)."""
        return np.zeros_like(np.asarray(r, dtype=float))

    def psi_tail(self, k, x):
        """``int_x^inf psi_k(y) dy``, by adaptive quadrature unless overridden."""
        f = lambda y: float(self.psi(k, y))
        xs = np.asarray(x, dtype=float)
        out = np.array([integrate.quad(f, xi, np.inf, epsabs=1e-14, limit=200)[0]
                        for xi in xs.ravel()])
        return out.reshape(xs.shape)

    def eta_tilde(self, r):
        """Pointwise l2 norm of ``(eta_k(r))_k``."""
        r = np.asarray(r, dtype=float)
        return np.sqrt(sum(np.asarray(self.eta(k, r)) ** 2 for k in range(self.K)))

    def psi_curve(self, k, grid: Grid) -> Curve:
        return Curve(grid, self.psi(k, grid.nodes), 0.0)

    def psi_norm(self, alpha: float) -> float:
        """``l2(L2_alpha)`` norm of ``(psi_k)_k`` over the half-line."""
        total = 0.0
        for k in range(self.K):
            f = lambda y: float(self.psi(k, y)) ** 2 * math.exp(alpha * y)
            total += integrate.quad(f, 0.0, np.inf, epsabs=1e-14, limit=200)[0]
        return math.sqrt(total)

    def _stack(self, fn, x, r):
        return np.stack([np.broadcast_to(fn(k, x, r), np.broadcast(x, r).shape)
                         for k in range(self.K)])

    def eval_all(self, x, r):
        return self._stack(self.eval, x, r)

    def d1_all(self, x, r):
        return self._stack(self.d1, x, r)

    def d2_all(self, x, r):
        return self._stack(self.d2, x, r)


_PROFILES = {
    # name: (s, s', s'')
    "tanh": (np.tanh,
             lambda r: 1.0 / np.cosh(r) ** 2,
             lambda r: -2.0 * np.tanh(r) / np.cosh(r) ** 2),
    "one": (np.ones_like, np.zeros_like, np.zeros_like),
    "sin": (np.sin, np.cos, lambda r: -np.sin(r)),
}


def _param_array(p, K, name):
    """Turn a scalar, sequence or callable ``k -> value`` (k from 1) into an array."""
    if callable(p):
        return np.array([float(p(k)) for k in range(1, K + 1)])
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.size == 1:
        return np.full(K, float(arr[0]))
    if arr.size < K:
        raise ConfigurationError(f"{name} has {arr.size} entries, need at least K={K}")
    return arr


class ExponentialFactorModel(VolatilityModel):
    """Separable family ``sigma_k(x, r) = c_k exp(-lam_k x) s(r)``.

    The state profile ``s`` is one of ``tanh`` (bounded, vanishing at zero),
    ``one`` (state independent) or ``sin``.  All three satisfy
    ``|s| <= 1`` and ``|s'| <= 1``, so the domination data are

    * ``psi_k(x) = lam_k exp(-lam_k x)``, with ``int_x^inf psi_k = exp(-lam_k x)``,
    * ``eta_k(r) = |c_k|`` (constant, hence even and nondecreasing).

    Args:
        c: Factor loadings; entries beyond ``K`` are the discarded tail.
        lam: Decay rates; ``2 lam_k > alpha`` keeps ``psi_k`` in ``L2_alpha``.
        profile: Name of the state profile.
        K: Number of retained factors (defaults to ``len(c)``).
        alpha: Weight exponent used for validation and the tail report.
    """

    def __init__(self, c, lam, profile: str = "tanh", K: int | None = None,
                 alpha: float = 1.0, tail_terms: int = 100_000):
        if profile not in _PROFILES:
            raise ConfigurationError(f"unknown state profile {profile!r}")
        if K is None:
            if callable(c):
                raise ConfigurationError("K is required when c is a callable")
            K = int(np.atleast_1d(c).size)
        self.K = _check_index(K, "K")
        self.alpha = float(alpha)
        self.profile = profile
        c_all = _param_array(c, K, "c")
        lam_all = _param_array(lam, K, "lam")
        if np.ndim(lam) == 0 and not callable(lam):
            lam_all = _param_array(lam, c_all.size, "lam")
        if np.ndim(c) == 0 and not callable(c):
            c_all = _param_array(c, lam_all.size, "c")
        self.c = c_all[:K].copy()
        self.lam = lam_all[:K].copy()
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.lam))):
            raise ConfigurationError("model parameters must be finite")
        if np.any(2.0 * self.lam <= self.alpha):
            raise ConfigurationError(
                f"need 2*lam_k > alpha={self.alpha} so that psi_k lies in L2_alpha; got lam={self.lam}")
        self._s, self._ds, self._dds = _PROFILES[profile]
        self.tail_terms = tail_terms if (callable(c) or callable(lam)) else None
        self.truncation_tail = self._tail_mass(c, lam, c_all, lam_all, tail_terms)
        self.c.setflags(write=False)
        self.lam.setflags(write=False)

    def _tail_mass(self, c, lam, c_all, lam_all, tail_terms):
        """``sum_{k > K} eta_k^2 ||psi_k||^2`` for the factors that were dropped.

        Callable parameters describe an infinite family; the sum then runs
        over the next ``tail_terms`` factors and is a partial sum, which can
        keep growing with ``tail_terms`` when the family is not summable.
        """
        if callable(c) or callable(lam):
            ks = np.arange(self.K + 1, self.K + tail_terms + 1)
            cc = np.array([float(c(k)) for k in ks]) if callable(c) else np.zeros(ks.size)
            ll = np.array([float(lam(k)) for k in ks]) if callable(lam) else np.full(ks.size, lam_all[-1])
        else:
            n = min(c_all.size, lam_all.size)
            cc, ll = c_all[self.K:n], lam_all[self.K:n]
        if cc.size == 0:
            return 0.0
        if np.any(2.0 * ll <= self.alpha):
            return math.inf
        return float(np.sum(cc ** 2 * ll ** 2 / (2.0 * ll - self.alpha)))

    def _decay(self, x, r=None):
        """``c_k exp(-lam_k x)`` with a leading factor axis, broadcastable against ``r``."""
        x = np.asarray(x, dtype=float)
        extra = 0 if r is None else max(0, np.ndim(r) - x.ndim)
        shape = (self.K,) + (1,) * (extra + x.ndim)
        return self.c.reshape(shape) * np.exp(-self.lam.reshape(shape) * x)

    def eval(self, k, x, r):
        return self.c[k] * np.exp(-self.lam[k] * np.asarray(x, dtype=float)) * self._s(np.asarray(r, dtype=float))

    def d1(self, k, x, r):
        return -self.lam[k] * self.eval(k, x, r)

    def d2(self, k, x, r):
        return self.c[k] * np.exp(-self.lam[k] * np.asarray(x, dtype=float)) * self._ds(np.asarray(r, dtype=float))

    def d22(self, k, x, r):
        return self.c[k] * np.exp(-self.lam[k] * np.asarray(x, dtype=float)) * self._dds(np.asarray(r, dtype=float))

    def eval_all(self, x, r):
        return self._decay(x, r) * self._s(np.asarray(r, dtype=float))

    def d1_all(self, x, r):
        x = np.asarray(x, dtype=float)
        extra = max(0, np.ndim(r) - x.ndim)
        lam = self.lam.reshape((self.K,) + (1,) * (extra + x.ndim))
        return -lam * self.eval_all(x, r)

    def d2_all(self, x, r):
        return self._decay(x, r) * self._ds(np.asarray(r, dtype=float))

    def psi(self, k, x):
        return self.lam[k] * np.exp(-self.lam[k] * np.asarray(x, dtype=float))

    def psi_tail(self, k, x):
        return np.exp(-self.lam[k] * np.asarray(x, dtype=float))

    def psi_tail_l2sq(self, k, x, alpha: float):
        """``int_x^inf psi_k^2 exp(alpha y) dy`` in closed form."""
        b = 2.0 * self.lam[k] - alpha
        return self.lam[k] ** 2 * np.exp(-b * np.asarray(x, dtype=float)) / b

    def psi_norm(self, alpha: float) -> float:
        b = 2.0 * self.lam - alpha
        if np.any(b <= 0):
            return math.inf
        return float(math.sqrt(np.sum(self.lam ** 2 / b)))

    def eta(self, k, r):
        return np.full(np.shape(r), abs(self.c[k]))

    def eta_tilde(self, r):
        return np.full(np.shape(r), float(np.linalg.norm(self.c)))

    def sigma_sup_bound(self, k, x):
        """``sup_r |sigma_k(x, r)| = |c_k| exp(-lam_k x)``."""
        return abs(self.c[k]) * np.exp(-self.lam[k] * np.asarray(x, dtype=float))

    def describe(self) -> dict:
        family = {"tanh": "exp_tanh", "one": "additive", "sin": "exp_sin"}[self.profile]
        return {"family": family, "K": self.K, "c": [float(v) for v in self.c],
                "lam": [float(v) for v in self.lam], "truncation_tail": self.truncation_tail,
                "tail_terms": self.tail_terms}

    def __repr__(self):
        return (f"ExponentialFactorModel(K={self.K}, profile={self.profile!r}, "
                f"c={np.array2string(self.c, precision=4)}, lam={np.array2string(self.lam, precision=4)})")


class FunctionModel(VolatilityModel):
    """User-supplied model with optional analytic derivatives.

    Missing derivatives are replaced by central finite differences and the
    model is flagged with ``exact_derivatives = False``.

    Args:
        sigma: Callable ``(k, x, r) -> value``.
        K: Number of factors.
        psi: Callable ``(k, x) -> psi_k(x)``.
        eta: Callable ``(k, r) -> eta_k(r)``.
        d1, d2: Optional analytic partial derivatives.
    """

    def __init__(self, sigma: Callable, K: int, psi: Callable, eta: Callable,
                 d1: Callable | None = None, d2: Callable | None = None, h: float = 1e-6):
        self.K = _check_index(K, "K")
        self._sigma, self._psi, self._eta = sigma, psi, eta
        self._d1, self._d2, self._h = d1, d2, h
        self.exact_derivatives = d1 is not None and d2 is not None

    def eval(self, k, x, r):
        return np.asarray(self._sigma(k, np.asarray(x, float), np.asarray(r, float)), dtype=float)

    def d1(self, k, x, r):
        if self._d1 is not None:
            return self._d1(k, x, r)
        x = np.asarray(x, float)
        h = self._h * np.maximum(1.0, np.abs(x))
        return (self.eval(k, x + h, r) - self.eval(k, np.maximum(x - h, 0.0), r)) / (x + h - np.maximum(x - h, 0.0))

    def d2(self, k, x, r):
        if self._d2 is not None:
            return self._d2(k, x, r)
        r = np.asarray(r, float)
        h = self._h * np.maximum(1.0, np.abs(r))
        return (self.eval(k, x, r + h) - self.eval(k, x, r - h)) / (2.0 * h)

    def psi(self, k, x):
        return np.asarray(self._psi(k, np.asarray(x, float)), dtype=float)

    def describe(self) -> dict:
        return {"family": "user", "K": self.K, "exact_derivatives": self.exact_derivatives}

    def eta(self, k, r):
        return np.asarray(self._eta(k, np.asarray(r, float)), dtype=float)


class LadderedModel(VolatilityModel):
    """``sigma_k(x, phi_m(r)) chi_n(x)`` built on a base model.

    Either index may be ``None``, in which case that transform is the
    identity.  The domination data follow the ladder estimates: the maturity
    cutoff adds ``|chi_n'(x)| int_x^inf psi_k`` to ``psi_k`` and the state
    clamp replaces ``eta_k`` by ``3 eta_k(phi_m(r))``.
    """

    def __init__(self, base: VolatilityModel, maturity_cutoff: int | None = None,
                 state_clamp: int | None = None):
        self.base = base
        self.n = None if maturity_cutoff is None else _check_index(maturity_cutoff, "maturity_cutoff")
        self.m = None if state_clamp is None else _check_index(state_clamp, "state_clamp")
        self.K = base.K
        self.exact_derivatives = base.exact_derivatives
        self.truncation_tail = base.truncation_tail

    def _clamp(self, r):
        r = np.asarray(r, dtype=float)
        return r if self.m is None else phi(self.m, r)

    def _cut(self, x):
        x = np.asarray(x, dtype=float)
        return np.ones_like(x) if self.n is None else chi(self.n, x)

    def _cut_prime(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros_like(x) if self.n is None else chi_prime(self.n, x)

    def _clamp_prime(self, r):
        r = np.asarray(r, dtype=float)
        return np.ones_like(r) if self.m is None else phi_prime(self.m, r)

    def eval(self, k, x, r):
        return self.base.eval(k, x, self._clamp(r)) * self._cut(x)

    def d1(self, k, x, r):
        pr = self._clamp(r)
        return self.base.d1(k, x, pr) * self._cut(x) + self.base.eval(k, x, pr) * self._cut_prime(x)

    def d2(self, k, x, r):
        return self.base.d2(k, x, self._clamp(r)) * self._clamp_prime(r) * self._cut(x)

    def eval_all(self, x, r):
        return self.base.eval_all(x, self._clamp(r)) * self._cut(x)

    def d1_all(self, x, r):
        pr = self._clamp(r)
        return self.base.d1_all(x, pr) * self._cut(x) + self.base.eval_all(x, pr) * self._cut_prime(x)

    def d2_all(self, x, r):
        return self.base.d2_all(x, self._clamp(r)) * self._clamp_prime(r) * self._cut(x)

    def psi_cut(self, k, x):
        """``psi_k^(n)(x) = chi_n(x) int_x^inf psi_k``."""
        return self._cut(x) * self.base.psi_tail(k, x)

    def psi_bar(self, k, x):
        """``|chi_n'(x)| int_x^inf psi_k``."""
        return np.abs(self._cut_prime(x)) * self.base.psi_tail(k, x)

    def psi(self, k, x):
        return self.base.psi(k, x) + self.psi_bar(k, x)

    def eta(self, k, r):
        if self.m is None:
            return self.base.eta(k, r)
        return 3.0 * self.base.eta(k, phi(self.m, r))

    def at_infinity(self, k, r):
        if self.n is not None:
            return np.zeros_like(np.asarray(r, dtype=float))
        return self.base.at_infinity(k, self._clamp(r))

    def psi_norm(self, alpha: float) -> float:
        base = self.base.psi_norm(alpha)
        if self.n is None:
            return base
        return base + psi_ladder_norms(self.base, self.n, alpha)[1]

    def describe(self) -> dict:
        d = self.base.describe() if hasattr(self.base, "describe") else {"family": "user"}
        return {**d, "maturity_cutoff": self.n, "state_clamp": self.m}

    def __repr__(self):
        return f"LadderedModel({self.base!r}, maturity_cutoff={self.n}, state_clamp={self.m})"


def apply_ladder(model: LadderedModel, k: int, x, r):
    """Evaluate the laddered volatility ``sigma_k(x, phi_m(r)) chi_n(x)``."""
    if not 0 <= k < model.K:
        raise ConfigurationError(f"factor index {k} out of range for K={model.K}")
    return model.eval(k, x, r)


def psi_ladder_norms(model: VolatilityModel, n: int, alpha: float) -> tuple[float, float]:
    """``l2(L2_alpha)`` norms of ``psi^(n)`` and ``psibar^(n)``.

    ``psi_k^(n) = chi_n int_x^inf psi_k`` and ``psibar_k^(n) = chi_n' int_x^inf psi_k``.
    The integrals are evaluated by adaptive quadrature on the continuous
    functions, so the result carries no grid error.
    """
    n = _check_index(n)
    opts = dict(epsabs=1e-15, epsrel=1e-13, limit=200)
    cut_sq = bar_sq = 0.0
    for k in range(model.K):
        tail = lambda y: float(model.psi_tail(k, y))
        body = lambda y: tail(y) ** 2 * math.exp(alpha * y)
        ramp = lambda y: float(chi(n, y)) ** 2 * tail(y) ** 2 * math.exp(alpha * y)
        slope = lambda y: float(chi_prime(n, y)) ** 2 * tail(y) ** 2 * math.exp(alpha * y)
        cut_sq += integrate.quad(body, 0.0, n, **opts)[0] + integrate.quad(ramp, n, n + 1, **opts)[0]
        bar_sq += integrate.quad(slope, n, n + 1, **opts)[0]
    return math.sqrt(cut_sq), math.sqrt(bar_sq)


def builtin_exp_saturating(K: int, c, lam, alpha: float = 1.0) -> ExponentialFactorModel:
    """Compliant family ``c_k exp(-lam_k x) tanh(r)``.

    ``c`` and ``lam`` may be scalars, sequences (entries beyond ``K`` form the
    reported discarded tail) or callables of the 1-based factor index.
    """
    return ExponentialFactorModel(c, lam, "tanh", K=K, alpha=alpha)


def builtin_additive(K: int, c, lam, alpha: float = 1.0) -> ExponentialFactorModel:
    """State-independent family ``c_k exp(-lam_k x)`` (multi-factor Vasicek)."""
    return ExponentialFactorModel(c, lam, "one", K=K, alpha=alpha)


def builtin_zero(alpha: float = 1.0) -> ExponentialFactorModel:
    """The model ``sigma = 0`` (pure transport)."""
    return ExponentialFactorModel([0.0], [max(1.0, alpha)], "one", K=1, alpha=alpha)
