"""Numerical diagnostics of simulated forward curves and volatility ladders.

Every diagnostic returns a :class:`Report` with a stable JSON schema
``{report_type, verdict, metrics}`` and a plain-text rendering.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .hjm_drift import _drift_values, _superposition_values, sigma_lipschitz_constant
from .mild_solver import PathSet, SimConfig, simulate, simulate_yosida
from .sampling import random_curves
from .volatility_models import LadderedModel, VolatilityModel, psi_ladder_norms
from .weighted_spaces import Curve, Grid, _h_alpha_sq, _inner_weighted, _l2_weighted_sq

__all__ = [
    "Report",
    "SmoothNegEnergy",
    "positivity_report",
    "positivity_tolerance",
    "condition_c_probe",
    "condition_c_ratios",
    "neg_energy",
    "neg_energy_bound",
    "neg_energy_derivative",
    "neg_energy_derivative_check",
    "martingale_test",
    "discounted_bond",
    "ladder_convergence",
    "solution_ladder_convergence",
    "yosida_convergence",
    "negative_part_sigma_bound_check",
]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _short(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, (list, tuple, np.ndarray)):
        if len(v) > 8:
            return f"[{len(v)} values]"
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def _render(metrics: dict, lines: list, indent: str):
    for k, v in metrics.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            _render(v, lines, indent + "  ")
        elif isinstance(v, (list, tuple)) and v and all(isinstance(x, dict) for x in v):
            lines.append(f"{indent}{k}:")
            for row in v:
                lines.append(indent + "  - " + ", ".join(f"{a}={_short(b)}" for a, b in row.items()))
        else:
            lines.append(f"{indent}{k}: {_short(v)}")


@dataclass
class Report:
    """Outcome of a diagnostic.

    Attributes:
        report_type: Name of the diagnostic.
        verdict: ``pass``/``fail`` or a diagnostic-specific label.
        metrics: Numbers backing the verdict.
        config_hash: Hash of the configuration that produced the data, if any.
    """

    report_type: str
    verdict: str
    metrics: dict = field(default_factory=dict)
    config_hash: str | None = None

    PASSING = ("pass", "bounded")

    @property
    def passed(self) -> bool:
        return self.verdict in self.PASSING

    def to_dict(self) -> dict:
        d = {"report_type": self.report_type, "verdict": self.verdict,
             "metrics": _jsonable(self.metrics)}
        if self.config_hash is not None:
            d["config_hash"] = self.config_hash
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def text(self) -> str:
        lines = [f"{self.report_type}: {self.verdict}"]
        _render(self.metrics, lines, "  ")
        return "\n".join(lines)

    def __str__(self):
        return self.text()


# ---------------------------------------------------------------------------
# smooth negative-part energy

@dataclass(frozen=True)
class SmoothNegEnergy:
    """Piecewise-polynomial approximation ``g_n`` of ``x -> |x^-|^2 / 2``.

    ``g_n'' = clip(-n x, 0, 1)`` on ``x < 0`` and zero on ``x >= 0``, with
    ``g_n(0) = g_n'(0) = 0``.  Integrating twice gives, for ``-1/n <= x < 0``,
    ``g_n' = -n x^2/2`` and ``g_n = -n x^3/6``; below ``-1/n``,
    ``g_n' = x + 1/(2n)`` and ``g_n = x^2/2 + x/(2n) + 1/(6 n^2)``.
    The family increases with ``n`` and stays below the limit.
    """

    n: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ConfigurationError(f"n must be a positive integer, got {self.n!r}")

    def g(self, x):
        x = np.asarray(x, dtype=float)
        n = self.n
        inner = -n * x ** 3 / 6.0
        outer = 0.5 * x * x + x / (2.0 * n) + 1.0 / (6.0 * n * n)
        return np.where(x >= 0, 0.0, np.where(x >= -1.0 / n, inner, outer))

    def dg(self, x):
        x = np.asarray(x, dtype=float)
        n = self.n
        return np.where(x >= 0, 0.0, np.where(x >= -1.0 / n, -0.5 * n * x * x, x + 1.0 / (2.0 * n)))

    def ddg(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, 0.0, np.clip(-self.n * x, 0.0, 1.0))

    def error_bound(self, x):
        """Pointwise bound ``|x|/(2n) + 1/(6 n^2)`` on ``x < 0`` (zero elsewhere)."""
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, np.abs(x) / (2.0 * self.n) + 1.0 / (6.0 * self.n ** 2), 0.0)


def neg_energy(u: Curve, e: SmoothNegEnergy, alpha: float) -> float:
    """``G_n(u) = int g_n(u(x)) exp(-alpha x) dx`` by the trapezoid rule."""
    return float(np.sum(e.g(u.values) * u.grid.weighted_trapezoid(alpha, -1)))


def neg_energy_bound(u: Curve, e: SmoothNegEnergy, alpha: float) -> float:
    """Integrated pointwise bound on ``|G_n(u) - ||u^-||^2 / 2|``."""
    return float(np.sum(e.error_bound(u.values) * u.grid.weighted_trapezoid(alpha, -1)))


def neg_energy_derivative(u: Curve, v: Curve, e: SmoothNegEnergy, alpha: float) -> float:
    """Frechet derivative ``<g_n'(u), v>_{L2_-alpha}``."""
    return float(_inner_weighted(e.dg(u.values), v.values, u.grid, alpha, -1))


def neg_energy_derivative_check(u: Curve, v: Curve, e: SmoothNegEnergy, alpha: float,
                                eps=(1e-3, 1e-4, 1e-5)) -> Report:
    """Compare difference quotients of ``G_n`` with the analytic derivative.

    The remainder ``|(G(u + eps v) - G(u))/eps - G'(u) v|`` is at most
    ``eps ||v||^2 / 2`` because ``|g_n''| <= 1``; the observed order is the
    log-log slope of the remainders.
    """
    if not np.any(v.values != 0):
        raise PreconditionError("direction v must be nonzero")
    g0 = neg_energy(u, e, alpha)
    d = neg_energy_derivative(u, v, e, alpha)
    vv = float(_l2_weighted_sq(v.values, v.grid, alpha, -1))
    rems, bounds = [], []
    for ep in eps:
        q = (neg_energy(u + ep * v, e, alpha) - g0) / ep
        rems.append(abs(q - d))
        bounds.append(0.5 * ep * vv)
    rems = np.array(rems)
    pos = rems > 1e-14
    order = float("nan")
    if pos.sum() >= 2:
        le = np.log(np.asarray(eps)[pos])
        order = float(np.polyfit(le, np.log(rems[pos]), 1)[0])
    within = bool(np.all(rems <= np.array(bounds) * (1 + 1e-6) + 1e-12))
    trivially_zero = not pos.any()
    ok = within and (trivially_zero or math.isnan(order) or order > 0.8)
    return Report("neg_energy_derivative", "pass" if ok else "fail",
                  {"eps": list(eps), "derivative": d, "remainders": rems.tolist(),
                   "remainder_bounds": bounds, "observed_order": order})


# ---------------------------------------------------------------------------
# positivity

def positivity_tolerance(u0: Curve) -> float:
    """``1e-8 (1 + sup |u0|)``."""
    return 1e-8 * (1.0 + float(np.max(np.abs(u0.values))))


def positivity_report(ps: PathSet, tol: float | None = None) -> Report:
    """Global minimum and violations below ``-tol`` over all surviving samples.

    A sample is one ``(path, step)`` pair; it violates when the minimum of the
    curve over the grid lies below ``-tol``.
    """
    tol = positivity_tolerance(ps.u0) if tol is None else float(tol)
    if tol < 0:
        raise ConfigurationError("tol must be nonnegative")
    mins = ps.min_value
    valid = ~np.isnan(mins)
    bad = valid & (mins < -tol)
    count = int(bad.sum())
    first = None
    if count:
        steps, paths = np.nonzero(bad.T)
        j, p = int(steps[0]), int(paths[0])
        first = {"path": p, "step": j, "node": int(ps.argmin[p, j]), "value": float(mins[p, j])}
    n_valid = int(valid.sum())
    metrics = {
        "global_min": float(np.nanmin(mins)),
        "tol": tol,
        "violations": count,
        "samples": n_valid,
        "violation_fraction": count / n_valid if n_valid else float("nan"),
        "first_violation": first,
        "blown_up_paths": int((~ps.survived).sum()),
    }
    return Report("positivity", "pass" if count == 0 else "fail", metrics,
                  ps.config.config_hash())


# ---------------------------------------------------------------------------
# condition (c)

def condition_c_ratios(model: VolatilityModel, alpha: float, grid: Grid, states, drift_on=True):
    """``[-<h^-, beta(h)> + ||1_{h<=0} sigma(h)||^2] / ||h^-||^2`` in ``L2_-alpha`` (batched).

    Rows with ``h^- = 0`` give NaN.
    """
    h = np.atleast_2d(states)
    hneg = np.maximum(-h, 0.0)
    denom = _l2_weighted_sq(hneg, grid, alpha, -1)
    beta = _drift_values(model, h, grid) if drift_on else np.zeros_like(h)
    sig = _superposition_values(model, h, grid) * (h <= 0)
    num = -_inner_weighted(hneg, beta, grid, alpha, -1) + np.sum(_l2_weighted_sq(sig, grid, alpha, -1), axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), np.nan)


def condition_c_probe(model: VolatilityModel, alpha: float, grid: Grid, sampler=None,
                      n_states: int = 200, eps=(1.0, 1e-1, 1e-2, 1e-3, 1e-4), seed: int = 0,
                      drift_on: bool = True) -> Report:
    """Sweep the condition-(c) ratio over states ``h = eps h0``.

    The verdict comes from the log-log slope of ``max ratio`` against ``eps``
    over the three smallest scales: ``bounded`` if the slope is above
    ``-0.5``, ``diverging`` if it is at most ``-1``, ``inconclusive``
    otherwise or when no sampled state has a negative part.

    Args:
        sampler: Callable ``(rng, size) -> array of states``; defaults to
            random curves with a random level.
    """
    rng = np.random.default_rng(seed)
    if sampler is None:
        sampler = lambda r, size: random_curves(r, grid, size, alpha, level=True)
    h0 = np.asarray(sampler(rng, n_states), dtype=float)
    per_eps, counted = [], 0
    for ep in eps:
        ratios = condition_c_ratios(model, alpha, grid, ep * h0, drift_on)
        finite = ratios[np.isfinite(ratios)]
        counted += finite.size
        per_eps.append(float(finite.max()) if finite.size else float("nan"))
    per_eps = np.array(per_eps)
    metrics = {"eps": list(eps), "max_ratio_per_eps": per_eps.tolist(),
               "samples": counted, "max_ratio": float(np.nanmax(per_eps)) if counted else float("nan")}
    if counted == 0:
        return Report("condition_c", "inconclusive", metrics)
    order = np.argsort(eps)[:3]
    m = per_eps[order]
    if np.all(m <= 1e-300):
        slope = 0.0
    else:
        m = np.maximum(m, 1e-300)
        slope = float(np.polyfit(np.log(np.asarray(eps)[order]), np.log(m), 1)[0])
    metrics["small_eps_slope"] = slope
    verdict = "bounded" if slope > -0.5 else ("diverging" if slope <= -1.0 else "inconclusive")
    return Report("condition_c", verdict, metrics)


# ---------------------------------------------------------------------------
# martingale test

def discounted_bond(ps: PathSet, T: float, t: float) -> np.ndarray:
    """Per-path ``exp(-sum_{j<J} u(t_j, 0) dt - int_0^{T-t} u(t, x) dx)`` at ``t = J dt``.

    Paths that did not survive to ``t`` give NaN.
    """
    cfg = ps.config
    J = cfg.grid.lattice_index(t)
    M = cfg.grid.lattice_index(T - t)
    if J is None or M is None or M >= cfg.grid.n_points:
        raise PreconditionError(f"t={t} and T-t={T - t} must be lattice points within the grid")
    if J not in ps.snapshots:
        raise PreconditionError(f"no snapshot stored at t={t}; set snapshot_every accordingly")
    disc = np.sum(ps.short_rate[:, :J], axis=1) * cfg.dt
    u = ps.snapshots[J][:, : M + 1]
    bond = np.sum(0.5 * cfg.dt * (u[:, 1:] + u[:, :-1]), axis=1)
    return np.exp(-disc - bond)


def martingale_test(ps: PathSet, T: float, checkpoints=None, fine: PathSet | None = None) -> Report:
    """Check that the mean discounted bond price stays at its initial value.

    At each checkpoint the band is ``3 SE + b dt``.  The weak bias
    coefficient ``b`` is fitted from a run ``fine`` with half the step:
    ``b = 2 |mean_dt - mean_{dt/2}| / dt``; without it ``b = 0``.
    """
    cfg = ps.config
    if T > cfg.grid.x_max + 1e-12:
        raise PreconditionError("maturity T must not exceed x_max")
    if cfg.t_end > T + 1e-12:
        raise PreconditionError("t_end must not exceed T")
    if checkpoints is None:
        checkpoints = [cfg.dt * j for j in sorted(ps.snapshots) if j > 0]
    M0 = cfg.grid.lattice_index(T)
    u0 = ps.u0.values[: M0 + 1]
    b0 = math.exp(-float(np.sum(0.5 * cfg.dt * (u0[1:] + u0[:-1]))))
    rows, ok = [], True
    for t in checkpoints:
        vals = discounted_bond(ps, T, t)
        vals = vals[np.isfinite(vals)]
        n = vals.size
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
        b = 0.0
        if fine is not None:
            fv = discounted_bond(fine, T, t)
            b = 2.0 * abs(mean - float(np.nanmean(fv))) / cfg.dt
        band = 3.0 * se + b * cfg.dt
        dev = mean - b0
        inside = abs(dev) <= band
        ok &= inside
        rows.append({"t": t, "mean": mean, "se": se, "deviation": dev, "bias_coef": b,
                     "band": band, "inside": inside, "paths": n})
    metrics = {"T": T, "b0": b0, "checkpoints": rows,
               "insufficient_paths": bool(cfg.paths < 100)}
    return Report("martingale", "pass" if ok else "fail", metrics, cfg.config_hash())


# ---------------------------------------------------------------------------
# ladders

def _ladder(model: VolatilityModel, kind: str, i: int) -> LadderedModel:
    if kind == "maturity":
        return LadderedModel(model, maturity_cutoff=i)
    if kind == "state":
        return LadderedModel(model, state_clamp=i)
    if kind == "both":
        return LadderedModel(model, maturity_cutoff=i, state_clamp=i)
    raise ConfigurationError(f"ladder must be maturity, state or both, got {kind!r}")


def _hs_diff(m1: VolatilityModel, m2: VolatilityModel, values, grid: Grid, alpha: float):
    d = _superposition_values(m1, values, grid) - _superposition_values(m2, values, grid)
    return np.sqrt(np.sum(_h_alpha_sq(d, np.zeros(d.shape[:-1]), grid, alpha), axis=0))


def _monotone(seq, rel=1e-9, abs_tol=1e-15):
    seq = np.asarray(seq)
    return bool(np.all(seq[1:] <= seq[:-1] * (1 + rel) + abs_tol))


def ladder_convergence(model: VolatilityModel, ladder: str, samples, alpha: float, grid: Grid | None = None,
                       indices=(1, 2, 4, 8, 16), pairs=None, radius: float = 2.0,
                       decay_ratio: float = 1e-6, cap_variation: float = 0.05) -> Report:
    """Tabulate the ladder differences and sampled Lipschitz ratios.

    Args:
        model: Base volatility model.
        ladder: ``maturity``, ``state`` or ``both``.
        samples: Curves (or an array of samples on ``grid``) held fixed across the sweep.
        pairs: Optional ``(a, b)`` arrays of curves in the ball of ``radius``
            used for the Lipschitz ratios.

    The verdict requires, for every sample, non-increasing differences whose
    last entry is at most ``decay_ratio`` times the first, sampled ratios
    below the explicit Lipschitz constant of each laddered model, and a
    relative spread of the ratios below ``cap_variation``.
    """
    if isinstance(samples, np.ndarray):
        if grid is None:
            raise PreconditionError("grid required with array samples")
        values = np.atleast_2d(samples)
    else:
        samples = list(samples)
        grid = samples[0].grid
        values = np.stack([s.values for s in samples])
    base_beta = _drift_values(model, values, grid)
    sig_table, beta_table, ratio_table, cap_table = [], [], [], []
    if pairs is not None:
        pa, pb = pairs
        dv = np.sqrt(_h_alpha_sq(pa - pb, pa[:, -1] - pb[:, -1], grid, alpha))
    for i in indices:
        lm = _ladder(model, ladder, i)
        sig_table.append(_hs_diff(lm, model, values, grid, alpha))
        db = _drift_values(lm, values, grid) - base_beta
        beta_table.append(np.sqrt(_h_alpha_sq(db, np.zeros(db.shape[0]), grid, alpha)))
        if pairs is not None:
            num = _hs_diff_pairs(lm, pa, pb, grid, alpha)
            ratio_table.append(float(np.max(num / dv)))
            cap_table.append(sigma_lipschitz_constant(lm, alpha, radius))
    sig_table = np.array(sig_table)
    beta_table = np.array(beta_table)
    mono = all(_monotone(sig_table[:, s]) for s in range(values.shape[0]))
    decay = bool(np.all(sig_table[-1] <= decay_ratio * sig_table[0]))
    metrics = {"ladder": ladder, "indices": list(indices),
               "sigma_diff": sig_table.tolist(), "beta_diff": beta_table.tolist(),
               "sigma_diff_max": sig_table.max(axis=1).tolist(),
               "beta_diff_max": beta_table.max(axis=1).tolist(),
               "monotone": mono, "decayed": decay}
    ok = mono and decay
    if pairs is not None:
        ratios = np.array(ratio_table)
        spread = float((ratios.max() - ratios.min()) / ratios.max()) if ratios.max() > 0 else 0.0
        metrics.update({"lipschitz_ratio": ratios.tolist(), "lipschitz_cap": cap_table,
                        "ratio_spread": spread,
                        "below_cap": bool(np.all(ratios <= np.array(cap_table)))})
        ok = ok and metrics["below_cap"] and spread < cap_variation
    if ladder in ("maturity", "both"):
        metrics["psi_bar_norm"] = [psi_ladder_norms(model, i, alpha)[1] for i in indices]
        metrics["psi_norm"] = model.psi_norm(alpha)
    return Report("ladder_convergence", "pass" if ok else "fail", metrics)


def _hs_diff_pairs(model, a, b, grid, alpha):
    d = _superposition_values(model, a, grid) - _superposition_values(model, b, grid)
    return np.sqrt(np.sum(_h_alpha_sq(d, np.zeros(d.shape[:-1]), grid, alpha), axis=0))


def _pathwise_sup_diff(a: PathSet, b: PathSet):
    """Largest sup-norm gap over stored snapshots, restricted to paths alive in both runs."""
    alive = a.survived & b.survived
    gap = 0.0
    for j in a.snapshots:
        d = np.abs(a.snapshots[j][alive] - b.snapshots[j][alive])
        if d.size:
            gap = max(gap, float(d.max()))
    return gap, int((~alive).sum())


def solution_ladder_convergence(cfg: SimConfig, u0: Curve, m_values=(2, 4, 8, 16),
                                n_values=(2, 4, 8, 16), n_fixed: int | None = None) -> Report:
    """Pathwise convergence of the laddered solutions.

    First the state clamp ``m`` is swept with the maturity cutoff fixed at
    ``n_fixed`` (default: beyond the grid), comparing against the run with
    the cutoff only; then the cutoff ``n`` is swept against the run without
    ladders.  All runs share the seed, and snapshots are taken every step.
    """
    base = cfg.model.base if isinstance(cfg.model, LadderedModel) else cfg.model
    n_fixed = int(math.ceil(cfg.grid.x_max)) + 1 if n_fixed is None else n_fixed
    run = lambda model: simulate(replace(cfg, model=model, snapshot_every=1), u0)
    ref_n = run(LadderedModel(base, maturity_cutoff=n_fixed))
    m_gaps, excluded = [], 0
    for m in m_values:
        gap, ex = _pathwise_sup_diff(run(LadderedModel(base, n_fixed, m)), ref_n)
        m_gaps.append(gap)
        excluded = max(excluded, ex)
    ref = run(base)
    n_gaps = []
    for n in n_values:
        gap, ex = _pathwise_sup_diff(run(LadderedModel(base, maturity_cutoff=n)), ref)
        n_gaps.append(gap)
        excluded = max(excluded, ex)
    limit = 10.0 * cfg.dt
    ok = (_monotone(m_gaps, rel=1e-6, abs_tol=1e-12) and _monotone(n_gaps, rel=1e-6, abs_tol=1e-12)
          and m_gaps[-1] < limit and n_gaps[-1] < limit)
    metrics = {"m_values": list(m_values), "m_gaps": m_gaps, "n_fixed": n_fixed,
               "n_values": list(n_values), "n_gaps": n_gaps, "limit": limit,
               "excluded_paths": excluded}
    return Report("solution_ladder_convergence", "pass" if ok else "fail", metrics, cfg.config_hash())


def negative_part_sigma_bound_check(model: VolatilityModel, alpha: float, grid: Grid, samples=1000,
                                    seed: int = 0, slack: float = 1e-9) -> Report:
    """Check ``||sigma(v) 1_{v<=0}||_{l2(L2_-alpha)} <= C eta~(m+1) ||psi|| ||v^-||``.

    Here ``C = 1/sqrt(alpha)``, ``m`` is the state clamp of a laddered model
    (or ``sup |v|`` rounded up when there is none) and ``||psi||`` is the
    ``l2(L2_alpha)`` norm of the base model's domination function.  The
    bound follows from ``|sigma_k(x, r)| <= eta_k |r| int_x^inf psi_k`` for
    models vanishing at ``r = 0``, combined with the pointwise estimate
    ``int_x^inf psi_k <= alpha^{-1/2} exp(-alpha x / 2) ||psi_k||``.
    """
    base = model.base if isinstance(model, LadderedModel) else model
    rng = np.random.default_rng(seed)
    v = random_curves(rng, grid, samples, alpha, level=True)
    hneg = np.sqrt(_l2_weighted_sq(np.maximum(-v, 0.0), grid, alpha, -1))
    sig = _superposition_values(model, v, grid) * (v <= 0)
    lhs = np.sqrt(np.sum(_l2_weighted_sq(sig, grid, alpha, -1), axis=0))
    m = getattr(model, "m", None)
    level = (m + 1) if m is not None else np.ceil(np.max(np.abs(v), axis=1))
    eta = np.asarray(model.eta_tilde(np.asarray(level, dtype=float)), dtype=float)
    rhs = eta * base.psi_norm(alpha) * hneg / math.sqrt(alpha)
    excess = lhs - rhs
    worst = float(np.max(excess))
    return Report("negative_part_sigma_bound", "pass" if worst <= slack else "fail",
                  {"samples": int(samples), "worst_slack": worst,
                   "violations": int(np.sum(excess > slack))})


def yosida_convergence(cfg: SimConfig, u0: Curve, lambdas=(0.4, 0.2, 0.1, 0.05)) -> Report:
    """Paired-seed sup-norm gap between the regularized and the splitting scheme.

    Every run keeps all snapshots; the gap is the largest ``|u_lam - u|`` over
    every sample of every path.  The verdict requires the gaps to decrease with
    ``lambda`` and the last one to be below ``10 min(lambdas)``.
    """
    lambdas = [float(v) for v in lambdas]
    if any(not v > 0 for v in lambdas):
        raise ConfigurationError("Yosida parameters must be positive")
    full = replace(cfg, snapshot_every=1)
    ref = simulate(full, u0)
    gaps, excluded = [], 0
    for lam in lambdas:
        gap, ex = _pathwise_sup_diff(simulate_yosida(full, u0, lam), ref)
        gaps.append(gap)
        excluded = max(excluded, ex)
    order = np.argsort(lambdas)[::-1]
    ordered = [gaps[i] for i in order]
    limit = 10.0 * min(lambdas)
    ok = _monotone(ordered, rel=0.0, abs_tol=0.0) and ordered[-1] < limit
    return Report("yosida_convergence", "pass" if ok else "fail",
                  {"lambdas": lambdas, "gaps": gaps, "limit": limit, "excluded_paths": excluded},
                  cfg.config_hash())
