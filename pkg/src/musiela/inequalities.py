"""Randomized checks of the functional inequalities behind the well-posedness estimates.

Every check draws ``trials`` random instances and returns the excess
``lhs - rhs`` per instance; an instance violates the inequality when the
excess is above ``slack`` (``1e-9`` by default).  :func:`inequality_suite`
runs them all with a fixed seed and tabulates the worst excess.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .diagnostics import Report
from .errors import ConfigurationError
from .hjm_drift import (
    _cumtrapz,
    _drift_values,
    _hs_h_sq,
    _superposition_values,
    f_ig_constant,
    quadratic_drift_constant,
    sigma_growth_bound,
    sigma_lipschitz_constant,
    beta_lipschitz_constant,
    _theta_and_lipschitz,
)
from .sampling import random_curves
from .shift_semigroup import _resolvent_values, _yosida_pairing
from .volatility_models import (
    ExponentialFactorModel,
    LadderedModel,
    builtin_zero,
    chi,
    phi,
)
from .weighted_spaces import (
    Grid,
    _h_alpha_sq,
    _l1,
    _l2_weighted_sq,
    _sup_bound_excess,
    discrete_l1_embedding_constant,
    sup_embedding_constant,
)

__all__ = ["InequalityResult", "CHECKS", "run_check", "inequality_suite", "format_table", "psi_ladder_closed_form"]

_CHUNK = 2500
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


@dataclass
class InequalityResult:
    name: str
    trials: int
    violations: int
    worst_slack: float
    seconds: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


# ---------------------------------------------------------------------------
# samplers

def _general(rng, grid, n, alpha):
    """Curves with a random level; the value at infinity is the last sample."""
    v = random_curves(rng, grid, n, alpha, level=True)
    scale = 10.0 ** rng.uniform(-2, 1, size=(n, 1))
    return v * scale


def _vanishing(rng, grid, n, alpha):
    """Curves that are exactly zero at ``x_max`` (and beyond)."""
    v = random_curves(rng, grid, n, alpha, level=False)
    v = v - v[:, -1:] * (grid.nodes / grid.x_max)
    return v * 10.0 ** rng.uniform(-2, 1, size=(n, 1))


def _random_models(rng, alpha, count=8, K=4, profile="tanh"):
    models = []
    for i in range(count):
        lam = rng.uniform(0.5 * alpha * 1.05, 4.0 * alpha, size=K)
        if i == 0:
            lam[0] = alpha  # the pointwise tail estimate is sharp here
        c = rng.uniform(-1.0, 1.0, size=K) * 10.0 ** rng.uniform(-2, 0)
        models.append(ExponentialFactorModel(c, lam, profile, K=K, alpha=alpha))
    return models


def _pointwise_points(rng, n):
    x = rng.uniform(0.0, 25.0, size=n)
    r1 = rng.uniform(-20.0, 20.0, size=n)
    r2 = r1 + rng.normal(0.0, 1.0, size=n) * 10.0 ** rng.uniform(-4, 1, size=n)
    return x, r1, r2


def _by_group(rng, trials, groups, fn):
    """Split ``trials`` evenly across ``groups`` and concatenate ``fn(group, size)``."""
    sizes = np.full(len(groups), trials // len(groups))
    sizes[: trials % len(groups)] += 1
    return np.concatenate([fn(g, int(s)) for g, s in zip(groups, sizes) if s > 0])


# ---------------------------------------------------------------------------
# embeddings and semigroup

def check_l1_embedding(rng, alpha, grid, trials):
    """``||v||_{L1} <= alpha^{-1/2} ||v||_{L2_alpha}`` plus the quadrature allowance."""
    def one(_, n):
        v = _vanishing(rng, grid, n, alpha)
        norm = np.sqrt(_l2_weighted_sq(v, grid, alpha, +1))
        allowance = (discrete_l1_embedding_constant(grid, alpha) - 1.0 / math.sqrt(alpha)) * norm
        return _l1(v, grid) - (norm / math.sqrt(alpha) + allowance)
    return _chunked(trials, one)


def check_sup_decay(rng, alpha, grid, trials):
    """``|v(x) - v(inf)| <= ||v||_H exp(-alpha x/2) / sqrt(alpha)`` at every node."""
    def one(_, n):
        v = _general(rng, grid, n, alpha)
        return np.max(_sup_bound_excess(v, v[:, -1], grid, alpha), axis=-1)
    return _chunked(trials, one)


def check_delta_embedding(rng, alpha, grid, trials):
    """``sup |v| <= delta ||v||_H`` with ``delta = 1 + 1/sqrt(alpha)``."""
    def one(_, n):
        v = _general(rng, grid, n, alpha)
        h = np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
        return np.max(np.abs(v), axis=-1) - sup_embedding_constant(alpha) * h
    return _chunked(trials, one)


def _shift_rows(v, k):
    n = v.shape[-1]
    idx = np.minimum(np.arange(n)[None, :] + k[:, None], n - 1)
    return np.take_along_axis(v, idx, axis=-1)


def check_shift_contraction_H(rng, alpha, grid, trials):
    """``||S(t) v||_H <= ||v||_H`` for lattice ``t``."""
    def one(_, n):
        v = _general(rng, grid, n, alpha)
        k = rng.integers(1, grid.n_points, size=n)
        s = _shift_rows(v, k)
        return np.sqrt(_h_alpha_sq(s, v[:, -1], grid, alpha)) - np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
    return _chunked(trials, one)


def check_shift_contraction_L2(rng, alpha, grid, trials):
    """``exp(-alpha t/2) ||S(t) v||_{L2_-alpha} <= ||v||_{L2_-alpha}``."""
    def one(_, n):
        v = _vanishing(rng, grid, n, alpha)
        k = rng.integers(1, grid.n_points, size=n)
        s = _shift_rows(v, k)
        lhs = np.exp(-0.5 * alpha * k * grid.dx) * np.sqrt(_l2_weighted_sq(s, grid, alpha, -1))
        return lhs - np.sqrt(_l2_weighted_sq(v, grid, alpha, -1))
    return _chunked(trials, one)


def check_resolvent_contraction_H(rng, alpha, grid, trials):
    """``||(I + lam A)^{-1} v||_H <= ||v||_H``."""
    def one(_, n):
        v = _general(rng, grid, n, alpha)
        lam = float(10.0 ** rng.uniform(-2, 0.5))
        w = _resolvent_values(v, v[:, -1], grid.dx, lam)
        return np.sqrt(_h_alpha_sq(w, v[:, -1], grid, alpha)) - np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
    return _chunked(trials, one, chunk=500)


def check_resolvent_positivity(rng, alpha, grid, trials):
    """``v >= 0`` implies ``(I + lam A)^{-1} v >= 0``."""
    def one(_, n):
        v = np.abs(_general(rng, grid, n, alpha))
        lam = float(10.0 ** rng.uniform(-2, 0.5))
        w = _resolvent_values(v, v[:, -1], grid.dx, lam)
        return -np.min(w, axis=-1)
    return _chunked(trials, one, chunk=500)


def check_yosida_dissipative(rng, alpha, grid, trials):
    """``<B_lam h, h^->_{L2_-alpha} <= 0`` for the shifted generator ``B = A + alpha/2``."""
    def one(_, n):
        h = _general(rng, grid, n, alpha)
        lam = float(10.0 ** rng.uniform(-2, 0.5))
        return _yosida_pairing(h, h[:, -1], grid, lam, alpha, 0.5 * alpha)
    return _chunked(trials, one, chunk=500)


# ---------------------------------------------------------------------------
# drift operator

def check_quadratic_drift_lipschitz(rng, alpha, grid, trials, K=3):
    """``||<h,Ih> - <g,Ig>||_H <= C (||h|| + ||g||) ||h - g||`` on sequences vanishing at infinity."""
    C = quadratic_drift_constant(alpha)

    def one(_, n):
        h = _vanishing(rng, grid, K * n, alpha).reshape(K, n, -1)
        d = _vanishing(rng, grid, K * n, alpha).reshape(K, n, -1)
        eps = 10.0 ** rng.uniform(-3, 0.5, size=(1, n, 1))
        g = h + eps * d
        bh = np.sum(h * _cumtrapz(h, grid.dx), axis=0)
        bg = np.sum(g * _cumtrapz(g, grid.dx), axis=0)
        lhs = np.sqrt(_h_alpha_sq(bh - bg, bh[:, -1] - bg[:, -1], grid, alpha))
        nh = np.sqrt(np.sum(_h_alpha_sq(h, 0.0, grid, alpha), axis=0))
        ng = np.sqrt(np.sum(_h_alpha_sq(g, 0.0, grid, alpha), axis=0))
        nd = np.sqrt(np.sum(_h_alpha_sq(h - g, 0.0, grid, alpha), axis=0))
        return lhs - C * (nh + ng) * nd
    return _chunked(trials, one, chunk=1000)


def check_f_ig(rng, alpha, grid, trials, K=3):
    """``||<f, Ig>||_{L2_-alpha} <= alpha^{-1/2} ||f||_{l2(L2_alpha)} ||g||_{l2(L2_-alpha)}``."""
    C = f_ig_constant(alpha)

    def one(_, n):
        f = _vanishing(rng, grid, K * n, alpha).reshape(K, n, -1)
        g = _general(rng, grid, K * n, alpha).reshape(K, n, -1)
        lhs = np.sqrt(_l2_weighted_sq(np.sum(f * _cumtrapz(g, grid.dx), axis=0), grid, alpha, -1))
        nf = np.sqrt(np.sum(_l2_weighted_sq(f, grid, alpha, +1), axis=0))
        ng = np.sqrt(np.sum(_l2_weighted_sq(g, grid, alpha, -1), axis=0))
        return lhs - C * nf * ng
    return _chunked(trials, one, chunk=1000)


def check_sigma_growth_bound(rng, alpha, grid, trials):
    """``||sigma(v)||_{HS(H)} <= eta~(delta ||v||) (||v|| + ||psi||)``."""
    models = _random_models(rng, alpha)

    def one(model, n):
        v = _general(rng, grid, n, alpha)
        vh = np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
        lhs = np.sqrt(_hs_h_sq(model, v, v[:, -1], grid, alpha))
        rhs = np.array([sigma_growth_bound(model, float(a), alpha) for a in vh])
        return lhs - rhs
    return _by_group(rng, trials, models, one)


def _ball_pairs(rng, grid, n, alpha, radius):
    a = _general(rng, grid, n, alpha)
    d = _general(rng, grid, n, alpha)
    b = a + 10.0 ** rng.uniform(-3, 0, size=(n, 1)) * d
    for v in (a, b):
        h = np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
        v *= (radius * rng.uniform(0.05, 1.0, size=n) / h)[:, None]
    return a, b


def check_sigma_lipschitz(rng, alpha, grid, trials, radius=2.0):
    """``||sigma(v1) - sigma(v2)||_{HS(H)} <= L(R) ||v1 - v2||_H`` on the ball of radius ``R``."""
    models = _random_models(rng, alpha)
    ladders = [LadderedModel(models[0], maturity_cutoff=2), LadderedModel(models[1], state_clamp=1),
               LadderedModel(models[2], 3, 2)]

    def one(model, n):
        a, b = _ball_pairs(rng, grid, n, alpha, radius)
        d = _superposition_values(model, a, grid) - _superposition_values(model, b, grid)
        lhs = np.sqrt(np.sum(_h_alpha_sq(d, 0.0, grid, alpha), axis=0))
        dv = np.sqrt(_h_alpha_sq(a - b, a[:, -1] - b[:, -1], grid, alpha))
        return lhs - sigma_lipschitz_constant(model, alpha, radius) * dv
    return _by_group(rng, trials, models + ladders, one)


def check_beta_lipschitz(rng, alpha, grid, trials):
    """``||beta(v1) - beta(v2)||_{L2_-alpha} <= 2 alpha^{-1/2} ||theta|| ||c|| ||v1 - v2||_{L2_-alpha}``."""
    models = _random_models(rng, alpha)

    def one(model, n):
        a = _general(rng, grid, n, alpha)
        b = a + 10.0 ** rng.uniform(-3, 0, size=(n, 1)) * _general(rng, grid, n, alpha)
        lhs = np.sqrt(_l2_weighted_sq(_drift_values(model, a, grid) - _drift_values(model, b, grid),
                                      grid, alpha, -1))
        return lhs - beta_lipschitz_constant(model, alpha) * np.sqrt(_l2_weighted_sq(a - b, grid, alpha, -1))
    return _by_group(rng, trials, models, one)


def check_drift_lipschitz_premises(rng, alpha, grid, trials):
    """``|sigma_k| <= theta_k``, ``|sigma_k(r1) - sigma_k(r2)| <= c_k |r1 - r2|`` and the induced
    ``||sigma(v1) - sigma(v2)||_{HS(L2_-alpha)} <= ||c|| ||v1 - v2||``."""
    models = _random_models(rng, alpha)

    def one(model, n):
        x, r1, r2 = _pointwise_points(rng, n)
        theta = np.abs(model.c)[:, None] * np.exp(-model.lam[:, None] * x)
        s1, s2 = model.eval_all(x, r1), model.eval_all(x, r2)
        bound_a = np.max(np.abs(s1) - theta, axis=0)
        bound_b = np.max(np.abs(s1 - s2) - np.abs(model.c)[:, None] * np.abs(r1 - r2), axis=0)
        m = max(1, n // 20)
        a = _general(rng, grid, m, alpha)
        b = _general(rng, grid, m, alpha)
        d = _superposition_values(model, a, grid) - _superposition_values(model, b, grid)
        lhs = np.sqrt(np.sum(_l2_weighted_sq(d, grid, alpha, -1), axis=0))
        _, lip = _theta_and_lipschitz(model, alpha)
        induced = lhs - lip * np.sqrt(_l2_weighted_sq(a - b, grid, alpha, -1))
        return np.concatenate([np.maximum(bound_a, bound_b), induced])[:n]
    return _by_group(rng, trials, models, one)


# ---------------------------------------------------------------------------
# approximation ladders

def psi_ladder_closed_form(lam, n: int, alpha: float):
    """Per-factor squared ``L2_alpha`` norms of ``psi^(n)`` and ``psibar^(n)`` for ``psi_k = lam_k exp(-lam_k x)``.

    With ``b = 2 lam - alpha`` the tail is ``exp(-lam x)`` and
    ``||psibar_k^(n)||^2 = (pi^2/4) exp(-b n) (1 - exp(-b)) 2 pi^2 / (b (b^2 + 4 pi^2))``.
    The ramp part of ``psi^(n)`` uses 64-point Gauss-Legendre quadrature.
    """
    lam = np.asarray(lam, dtype=float)
    b = 2.0 * lam - alpha
    en = np.exp(-b * n)
    bar = (np.pi ** 2 / 4.0) * en * (-np.expm1(-b)) * 2.0 * np.pi ** 2 / (b * (b * b + 4.0 * np.pi ** 2))
    s = _GL_NODES
    ramp = np.sum(_GL_WEIGHTS * (0.5 * (1 + np.cos(np.pi * s))) ** 2 * np.exp(-b[..., None] * s), axis=-1)
    cut = -np.expm1(-b * n) / b + en * ramp
    return cut, bar


def check_cutoff_tail_pointwise(rng, alpha, grid, trials):
    """``psi_k^(n)(x) <= chi_n(x) alpha^{-1/2} exp(-alpha x/2) ||1_[x,inf) psi_k||_{L2_alpha}``."""
    models = _random_models(rng, alpha)

    def one(model, n):
        x = rng.uniform(0.0, 25.0, size=n)
        idx = rng.integers(1, 17, size=n)
        out = np.empty(n)
        for i in np.unique(idx):
            sel = idx == i
            lm = LadderedModel(model, maturity_cutoff=int(i))
            worst = np.full(sel.sum(), -np.inf)
            for k in range(model.K):
                lhs = lm.psi_cut(k, x[sel])
                rhs = chi(int(i), x[sel]) * np.exp(-0.5 * alpha * x[sel]) * np.sqrt(
                    model.psi_tail_l2sq(k, x[sel], alpha) / alpha)
                worst = np.maximum(worst, lhs - rhs)
            out[sel] = worst
        return out
    return _by_group(rng, trials, models, one)


def _random_lams(rng, alpha, n, K=3):
    return rng.uniform(0.5 * alpha * 1.02, 5.0 * alpha, size=(n, K))


def check_cutoff_slope_psi_norm(rng, alpha, grid, trials):
    """``||psibar^(n)|| <= (pi / (2 sqrt(2 alpha))) ||1_[n,inf) psi||``."""
    lam = _random_lams(rng, alpha, trials)
    n = rng.integers(1, 17, size=(trials, 1))
    b = 2.0 * lam - alpha
    _, bar = psi_ladder_closed_form(lam, n, alpha)
    tail = lam ** 2 * np.exp(-b * n) / b
    return np.sqrt(bar.sum(axis=1)) - np.pi / (2.0 * math.sqrt(2.0 * alpha)) * np.sqrt(tail.sum(axis=1))


def check_cutoff_psi_norm(rng, alpha, grid, trials):
    """``||psi^(n)|| <= sqrt((n + 1)/alpha) ||psi||``."""
    lam = _random_lams(rng, alpha, trials)
    n = rng.integers(1, 17, size=(trials, 1))
    cut, _ = psi_ladder_closed_form(lam, n, alpha)
    full = lam ** 2 / (2.0 * lam - alpha)
    return np.sqrt(cut.sum(axis=1)) - np.sqrt((n[:, 0] + 1) / alpha) * np.sqrt(full.sum(axis=1))


def _ladder_groups(rng, alpha, kind):
    models = _random_models(rng, alpha)
    out = []
    for j, m in enumerate(models):
        for i in (1, 2, 3, 5, 8, 16):
            out.append(LadderedModel(m, maturity_cutoff=i) if kind == "n" else LadderedModel(m, state_clamp=i))
    return out


def _factor_max(fn, K):
    return np.max(np.stack([fn(k) for k in range(K)]), axis=0)


def check_cutoff_sigma_domination(rng, alpha, grid, trials):
    """``|sigma_k^(n)(x, r)| <= psi_k^(n)(x) eta_k(r)``."""
    def one(lm, n):
        x, r, _ = _pointwise_points(rng, n)
        return _factor_max(lambda k: np.abs(lm.eval(k, x, r)) - lm.psi_cut(k, x) * lm.base.eta(k, r), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "n"), one)


def check_cutoff_state_lipschitz(rng, alpha, grid, trials):
    """``|sigma_k^(n)(x, r1) - sigma_k^(n)(x, r2)| <= psi_k^(n)(x) (eta_k(r1) + eta_k(r2)) |r1 - r2|``."""
    def one(lm, n):
        x, r1, r2 = _pointwise_points(rng, n)
        e = lm.base.eta
        return _factor_max(lambda k: np.abs(lm.eval(k, x, r1) - lm.eval(k, x, r2))
                           - lm.psi_cut(k, x) * (e(k, r1) + e(k, r2)) * np.abs(r1 - r2), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "n"), one)


def check_cutoff_d1_domination(rng, alpha, grid, trials):
    """``|d1 sigma_k^(n)(x, r)| <= (psi_k + psibar_k^(n))(x) eta_k(r)``."""
    def one(lm, n):
        x, r, _ = _pointwise_points(rng, n)
        return _factor_max(lambda k: np.abs(lm.d1(k, x, r)) - lm.psi(k, x) * lm.base.eta(k, r), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "n"), one)


def check_cutoff_d2_domination(rng, alpha, grid, trials):
    """``|d2 sigma_k^(n)(x, r)| <= eta_k(r)``."""
    def one(lm, n):
        x, r, _ = _pointwise_points(rng, n)
        return _factor_max(lambda k: np.abs(lm.d2(k, x, r)) - lm.base.eta(k, r), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "n"), one)


def check_clamp_d1_domination(rng, alpha, grid, trials):
    """``|d1 sigma_k^m(x, r)| <= psi_k(x) eta_k(phi_m(r))``."""
    def one(lm, n):
        x, r, _ = _pointwise_points(rng, n)
        return _factor_max(lambda k: np.abs(lm.d1(k, x, r))
                           - lm.base.psi(k, x) * lm.base.eta(k, phi(lm.m, r)), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "m"), one)


def check_clamp_d2_domination(rng, alpha, grid, trials):
    """``|d2 sigma_k^m(x, r)| <= eta_k(phi_m(r))``."""
    def one(lm, n):
        x, r, _ = _pointwise_points(rng, n)
        return _factor_max(lambda k: np.abs(lm.d2(k, x, r)) - lm.base.eta(k, phi(lm.m, r)), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "m"), one)


def check_clamp_d2_lipschitz(rng, alpha, grid, trials):
    """``|d2 sigma_k^m(x, r1) - d2 sigma_k^m(x, r2)| <= (eta_k(phi_m(r1)) + 3 eta_k(phi_m(r2))) |r1 - r2|``."""
    def one(lm, n):
        x, r1, r2 = _pointwise_points(rng, n)
        e = lambda k, r: lm.base.eta(k, phi(lm.m, r))
        return _factor_max(lambda k: np.abs(lm.d2(k, x, r1) - lm.d2(k, x, r2))
                           - (e(k, r1) + 3.0 * e(k, r2)) * np.abs(r1 - r2), lm.K)
    return _by_group(rng, trials, _ladder_groups(rng, alpha, "m"), one)


# ---------------------------------------------------------------------------
# global well-posedness variant and degenerate case

def _global_models(rng, alpha, eps, count=8, K=4):
    out = []
    for _ in range(count):
        lam = rng.uniform(0.5 * (alpha + eps) * 1.05, 4.0 * alpha, size=K)
        c = rng.uniform(-1.0, 1.0, size=K)
        out.append(ExponentialFactorModel(c, lam, "sin", K=K, alpha=alpha))
    return out


def check_global_hs_bound(rng, alpha, grid, trials, eps=0.5):
    """``||sigma(v)||^2_{HS(L2_alpha)} <= ||psi||^2_{L2_{alpha+eps}} / eps^2`` for a profile with
    ``|d1 sigma_k| <= psi_k = |c_k| lam_k exp(-lam_k x)``."""
    models = _global_models(rng, alpha, eps)

    def one(model, n):
        v = _general(rng, grid, n, alpha)
        lhs = np.sum(_l2_weighted_sq(_superposition_values(model, v, grid), grid, alpha, +1), axis=0)
        psi_sq = np.sum(model.c ** 2 * model.lam ** 2 / (2.0 * model.lam - alpha - eps))
        return lhs - psi_sq / eps ** 2
    return _by_group(rng, trials, models, one)


def check_global_state_lipschitz(rng, alpha, grid, trials, eps=0.5):
    """``|sigma_k(x, r1) - sigma_k(x, r2)| <= alpha^{-1/2} ||psi_k||_{L2_alpha} |r1 - r2|``."""
    models = _global_models(rng, alpha, eps)

    def one(model, n):
        x, r1, r2 = _pointwise_points(rng, n)
        ck = np.abs(model.c) * model.lam / np.sqrt(2.0 * model.lam - alpha) / math.sqrt(alpha)
        d = np.abs(model.eval_all(x, r1) - model.eval_all(x, r2))
        return np.max(d - ck[:, None] * np.abs(r1 - r2), axis=0)
    return _by_group(rng, trials, models, one)


def check_degenerate_psi_zero(rng, alpha, grid, trials):
    """With ``psi = 0`` every bound collapses to ``0 <= 0``."""
    model = builtin_zero(alpha)

    def one(_, n):
        v = _general(rng, grid, n, alpha)
        vh = np.sqrt(_h_alpha_sq(v, v[:, -1], grid, alpha))
        lhs = np.sqrt(_hs_h_sq(model, v, v[:, -1], grid, alpha))
        rhs = np.array([sigma_growth_bound(model, float(a), alpha) for a in vh])
        return lhs - rhs
    return _chunked(trials, one)


# ---------------------------------------------------------------------------
# driver

def _chunked(trials, fn, chunk=_CHUNK):
    out, done = [], 0
    while done < trials:
        n = min(chunk, trials - done)
        out.append(np.asarray(fn(None, n), dtype=float))
        done += n
    return np.concatenate(out)


CHECKS = {
    "l1_embedding": check_l1_embedding,
    "sup_decay_bound": check_sup_decay,
    "delta_embedding": check_delta_embedding,
    "shift_contraction_H": check_shift_contraction_H,
    "shift_contraction_L2": check_shift_contraction_L2,
    "resolvent_contraction_H": check_resolvent_contraction_H,
    "resolvent_positivity": check_resolvent_positivity,
    "yosida_dissipative": check_yosida_dissipative,
    "quadratic_drift_lipschitz": check_quadratic_drift_lipschitz,
    "f_Ig": check_f_ig,
    "sigma_growth_bound": check_sigma_growth_bound,
    "sigma_lipschitz": check_sigma_lipschitz,
    "beta_lipschitz": check_beta_lipschitz,
    "drift_lipschitz_premises": check_drift_lipschitz_premises,
    "cutoff_tail_pointwise": check_cutoff_tail_pointwise,
    "cutoff_slope_psi_norm": check_cutoff_slope_psi_norm,
    "cutoff_psi_norm": check_cutoff_psi_norm,
    "cutoff_sigma_domination": check_cutoff_sigma_domination,
    "cutoff_state_lipschitz": check_cutoff_state_lipschitz,
    "cutoff_d1_domination": check_cutoff_d1_domination,
    "cutoff_d2_domination": check_cutoff_d2_domination,
    "clamp_d1_domination": check_clamp_d1_domination,
    "clamp_d2_domination": check_clamp_d2_domination,
    "clamp_d2_lipschitz": check_clamp_d2_lipschitz,
    "global_hs_bound": check_global_hs_bound,
    "global_state_lipschitz": check_global_state_lipschitz,
    "degenerate_psi_zero": check_degenerate_psi_zero,
}


def run_check(name: str, alpha: float = 1.0, seed: int = 0, trials: int = 10_000,
              grid: Grid | None = None, slack: float = 1e-9) -> InequalityResult:
    """Run one named check with its own seeded generator."""
    grid = Grid.from_spacing(20.0, 0.05) if grid is None else grid
    key = sum(ord(ch) * 31 ** i for i, ch in enumerate(name)) % (2 ** 32)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))
    t0 = time.perf_counter()
    excess = CHECKS[name](rng, alpha, grid, trials)
    return InequalityResult(name, int(excess.size), int(np.sum(excess > slack)),
                            float(np.max(excess)), time.perf_counter() - t0)


def inequality_suite(alpha: float = 1.0, seed: int = 0, trials: int = 10_000,
                     grid: Grid | None = None, slack: float = 1e-9, names=None) -> Report:
    """Run every check and tabulate violations with the worst slack ``lhs - rhs``."""
    if not alpha > 0:
        raise ConfigurationError(f"alpha must be positive, got {alpha!r}")
    names = list(CHECKS) if names is None else list(names)
    t0 = time.perf_counter()
    rows = [run_check(n, alpha, seed, trials, grid, slack) for n in names]
    ok = all(r.passed for r in rows)
    metrics = {"alpha": alpha, "seed": seed, "slack": slack,
               "seconds": time.perf_counter() - t0,
               "table": [{"name": r.name, "trials": r.trials, "violations": r.violations,
                          "worst_slack": r.worst_slack, "seconds": r.seconds} for r in rows]}
    return Report("inequality_suite", "pass" if ok else "fail", metrics)


def format_table(report: Report) -> str:
    """Plain-text pass/fail table of an :func:`inequality_suite` report."""
    lines = [f"{'inequality':<26}{'trials':>8}{'viol':>6}{'worst slack':>14}  verdict"]
    for r in report.metrics["table"]:
        verdict = "PASS" if r["violations"] == 0 else "FAIL"
        lines.append(f"{r['name']:<26}{r['trials']:>8}{r['violations']:>6}{r['worst_slack']:>14.3e}  {verdict}")
    lines.append(f"total {report.metrics['seconds']:.1f} s: {report.verdict.upper()}")
    return "\n".join(lines)
