"""Monte Carlo time stepping of the Musiela equation.

``du + A u dt = beta(u) dt + sum_k sigma_k(u) dw_k`` is advanced by Lie
splitting: an Euler reaction step followed by the exact lattice transport
``S(dt)`` (``dt = dx``, so the transport is an index shift)::

    u_{j+1} = S(dt) [u_j + dt beta(u_j) + sqrt(dt) sum_k sigma_k(u_j) xi_{jk}]

The regularized variant replaces the transport by the bounded operator
``A_lambda`` and takes a plain Euler step.  Paths are simulated in fixed-size
blocks of rows, optionally on several threads (``MUSIELA_THREADS``); the
Gaussian draws of a path depend only on ``(seed, path, step, factor)``.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, CorruptedStateError
from .hjm_drift import _cumtrapz, _kahan_sum
from .shift_semigroup import _shift_values, _yosida_values
from .volatility_models import VolatilityModel
from .weighted_spaces import Curve, Grid, _l2_weighted_sq

__all__ = ["SimConfig", "PathSet", "step", "simulate", "simulate_yosida", "path_noise",
           "content_hash", "BLOCK_PATHS"]

BLOCK_PATHS = 128


def content_hash(payload: dict) -> str:
    """Git-style blob hash of the canonical JSON encoding of ``payload``."""
    body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


@dataclass(frozen=True)
class SimConfig:
    """Configuration of a Monte Carlo run.

    Attributes:
        grid: Spatial grid.
        dt: Time step; must equal ``grid.dx``.
        t_end: Horizon, a multiple of ``dt``.
        model: Volatility model (possibly laddered).
        alpha: Weight exponent of the state space.
        K: Number of factors driven by noise (defaults to ``model.K``).
        paths: Number of Monte Carlo paths.
        seed: Master seed.
        yosida_lambda: Parameter of the regularized variant.
        blowup_threshold: Sup-norm level that ends a path's lifetime.
        drift_mode: ``"hjm"`` for the no-arbitrage drift, ``"zero"`` to switch it off.
        noise_substeps: Each step consumes this many consecutive unit draws,
            summed and rescaled, so that a run with step ``dt`` shares its
            Brownian path with a run at ``dt / noise_substeps``.
        snapshot_every: Keep full curves every this many steps (0: first and last only).
    """

    grid: Grid
    dt: float
    t_end: float
    model: VolatilityModel
    alpha: float = 1.0
    K: int | None = None
    paths: int = 500
    seed: int = 42
    yosida_lambda: float | None = None
    blowup_threshold: float = 1e6
    drift_mode: str = "hjm"
    noise_substeps: int = 1
    snapshot_every: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")
        if abs(self.dt - self.grid.dx) > 1e-12 * self.grid.dx:
            raise ConfigurationError(f"dt={self.dt} must equal dx={self.grid.dx} (lattice transport)")
        n = self.t_end / self.dt
        if self.t_end <= 0 or abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ConfigurationError(f"t_end={self.t_end} must be a positive multiple of dt={self.dt}")
        if not (isinstance(self.paths, (int, np.integer)) and self.paths >= 1):
            raise ConfigurationError(f"paths must be a positive integer, got {self.paths}")
        K = self.model.K if self.K is None else int(self.K)
        if not 0 <= K <= self.model.K:
            raise ConfigurationError(f"K={K} exceeds the model's {self.model.K} factors")
        object.__setattr__(self, "K", K)
        if self.yosida_lambda is not None and not self.yosida_lambda > 0:
            raise ConfigurationError("yosida_lambda must be positive")
        if self.drift_mode not in ("hjm", "zero"):
            raise ConfigurationError(f"drift_mode must be 'hjm' or 'zero', got {self.drift_mode!r}")
        if not (isinstance(self.noise_substeps, (int, np.integer)) and self.noise_substeps >= 1):
            raise ConfigurationError("noise_substeps must be a positive integer")
        if not self.blowup_threshold > 0:
            raise ConfigurationError("blowup_threshold must be positive")
        if self.snapshot_every < 0:
            raise ConfigurationError("snapshot_every must be nonnegative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def snapshot_steps(self) -> list[int]:
        n = self.n_steps
        if self.snapshot_every:
            steps = set(range(0, n + 1, self.snapshot_every))
        else:
            steps = set()
        return sorted(steps | {0, n})

    def to_dict(self) -> dict:
        describe = getattr(self.model, "describe", None)
        return {
            "alpha": self.alpha,
            "x_max": self.grid.x_max,
            "n_points": self.grid.n_points,
            "dx": self.grid.dx,
            "dt": self.dt,
            "t_end": self.t_end,
            "K": self.K,
            "paths": self.paths,
            "seed": self.seed,
            "yosida_lambda": self.yosida_lambda,
            "blowup_threshold": self.blowup_threshold,
            "drift_mode": self.drift_mode,
            "noise_substeps": self.noise_substeps,
            "snapshot_every": self.snapshot_every,
            "model": describe() if describe else repr(self.model),
        }

    def config_hash(self) -> str:
        return content_hash(self.to_dict())


def path_noise(seed: int, path: int, n_steps: int, K: int, substeps: int = 1) -> np.ndarray:
    """Standard normal draws of one path, shape ``(n_steps, K)``.

    Draw ``(j, k)`` at unit resolution is entry ``j K + k`` of the stream seeded
    by ``SeedSequence(seed, spawn_key=(path,))``.  With ``substeps > 1`` each
    step sums ``substeps`` consecutive unit draws and rescales.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(path,)))
    z = rng.standard_normal((n_steps * substeps, K))
    if substeps > 1:
        z = z.reshape(n_steps, substeps, K).sum(axis=1) / math.sqrt(substeps)
    return z


@dataclass
class PathSet:
    """Trajectories and per-step diagnostics of a Monte Carlo run.

    Arrays indexed ``[path, step]`` hold NaN after a path's lifetime.

    Attributes:
        config: The configuration that produced the run.
        u0: Initial curve.
        method: ``"splitting"`` or ``"yosida"``.
        min_value: Minimum of the curve over the grid.
        argmin: Node where the minimum is attained.
        neg_norm: ``||u^-||_{L2_-alpha}``.
        short_rate: ``u(t, 0)``.
        lifetime: First step whose state exceeded the blow-up threshold or
            was not finite, ``-1`` if the path survived.
        snapshots: Map from step index to a ``(paths, n_points)`` array.
    """

    config: SimConfig
    u0: Curve
    method: str
    min_value: np.ndarray
    argmin: np.ndarray
    neg_norm: np.ndarray
    short_rate: np.ndarray
    lifetime: np.ndarray
    snapshots: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.config.n_steps + 1) * self.config.dt

    @property
    def survived(self) -> np.ndarray:
        return self.lifetime < 0

    def curve(self, path: int, step: int) -> Curve:
        if step not in self.snapshots:
            raise KeyError(f"step {step} was not stored; stored steps: {sorted(self.snapshots)}")
        return Curve(self.config.grid, self.snapshots[step][path], self.u0.value_at_infinity)

    def diag_csv(self) -> str:
        """``step,path,min,neg_norm,short_rate`` rows in step-major order."""
        lines = ["step,path,min,neg_norm,short_rate"]
        n_paths, n_cols = self.min_value.shape
        for j in range(n_cols):
            mins, negs, rates = self.min_value[:, j], self.neg_norm[:, j], self.short_rate[:, j]
            for p in range(n_paths):
                if math.isnan(mins[p]):
                    continue
                lines.append(f"{j},{p},{mins[p]!r},{negs[p]!r},{rates[p]!r}")
        return "\n".join(lines) + "\n"

    def meta(self) -> dict:
        cfg = self.config.to_dict()
        return {
            "config": cfg,
            "config_hash": content_hash(cfg),
            "method": self.method,
            "u0_value_at_infinity": self.u0.value_at_infinity,
            "blown_up_paths": int((~self.survived).sum()),
            "snapshot_steps": sorted(int(s) for s in self.snapshots),
        }

    def save(self, directory, write_curves: bool = False) -> Path:
        """Write ``meta.json``, ``diag.csv`` and optionally ``curves/p<i>_t<j>.csv``."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "meta.json").write_text(json.dumps(self.meta(), indent=2, sort_keys=True) + "\n")
        (d / "diag.csv").write_text(self.diag_csv())
        if write_curves:
            cdir = d / "curves"
            cdir.mkdir(exist_ok=True)
            for j, arr in sorted(self.snapshots.items()):
                for p in range(arr.shape[0]):
                    if np.all(np.isfinite(arr[p])):
                        self.curve(p, j).to_csv(cdir / f"p{p}_t{j}.csv")
        return d


# ---------------------------------------------------------------------------
# stepping kernels

def _reaction(model: VolatilityModel, u, grid: Grid, dt: float, xi, drift_on: bool, K: int):
    """``dt beta(u) + sqrt(dt) sum_k sigma_k(u) xi_k`` for a block of rows."""
    sig = model.eval_all(grid.nodes, u)[:K]
    out = np.sqrt(dt) * _kahan_sum(sig * xi.T[:, :, None]) if K else np.zeros_like(u)
    if drift_on and K:
        out = out + dt * _kahan_sum(sig * _cumtrapz(sig, grid.dx))
    return out


def _advance(cfg: SimConfig, u, vinf, xi, method: str):
    react = _reaction(cfg.model, u, cfg.grid, cfg.dt, xi, cfg.drift_mode == "hjm", cfg.K)
    if method == "splitting":
        return _shift_values(u + react, 1, vinf)
    gen = _yosida_values(u, vinf, cfg.grid.dx, cfg.yosida_lambda)
    return u - cfg.dt * gen + react


def step(u: Curve, model: VolatilityModel, cfg: SimConfig, noise) -> Curve:
    """One splitting step from ``u`` with the given ``K`` standard normal draws.

    Raises:
        CorruptedStateError: If the new state is not finite.
    """
    xi = np.asarray(noise, dtype=float).reshape(1, -1)
    if xi.shape[1] != cfg.K:
        raise ConfigurationError(f"expected {cfg.K} draws, got {xi.shape[1]}")
    run_cfg = cfg if model is cfg.model else _replace_model(cfg, model)
    with np.errstate(over="ignore", invalid="ignore"):
        new = _advance(run_cfg, u.values[None, :], u.value_at_infinity, xi, "splitting")[0]
    if not np.all(np.isfinite(new)):
        raise CorruptedStateError("step produced non-finite values (blow-up)")
    return Curve(u.grid, new, u.value_at_infinity)


def _replace_model(cfg: SimConfig, model: VolatilityModel) -> SimConfig:
    from dataclasses import replace
    return replace(cfg, model=model, K=min(cfg.K, model.K))


def _run_block(cfg: SimConfig, u0: Curve, first: int, last: int, method: str, keep: set[int]):
    n_rows, n_steps, N = last - first, cfg.n_steps, cfg.grid.n_points
    noise = np.stack([path_noise(cfg.seed, p, n_steps, cfg.K, cfg.noise_substeps)
                      for p in range(first, last)]) if cfg.K else np.zeros((n_rows, n_steps, 0))
    shape = (n_rows, n_steps + 1)
    mins = np.full(shape, np.nan)
    argmin = np.full(shape, -1, dtype=np.int64)
    negs = np.full(shape, np.nan)
    rates = np.full(shape, np.nan)
    lifetime = np.full(n_rows, -1, dtype=np.int64)
    snaps = {j: np.full((n_rows, N), np.nan) for j in keep}
    u = np.repeat(u0.values[None, :], n_rows, axis=0)
    vinf = u0.value_at_infinity
    wneg = cfg.grid.weighted_trapezoid(cfg.alpha, -1)
    active = np.arange(n_rows)
    for j in range(n_steps + 1):
        ua = u[active]
        ia = np.argmin(ua, axis=1)
        argmin[active, j] = ia
        mins[active, j] = ua[np.arange(active.size), ia]
        neg = np.minimum(ua, 0.0)
        negs[active, j] = np.sqrt(np.sum(neg * neg * wneg, axis=1))
        rates[active, j] = ua[:, 0]
        if j in snaps:
            snaps[j][active] = ua
        if j == n_steps or active.size == 0:
            break
        with np.errstate(over="ignore", invalid="ignore"):
            new = _advance(cfg, ua, vinf, noise[active, j, :], method)
            ok = np.all(np.isfinite(new), axis=1) & (np.max(np.abs(new), axis=1) <= cfg.blowup_threshold)
        u[active[ok]] = new[ok]
        lifetime[active[~ok]] = j + 1
        active = active[ok]
    return mins, argmin, negs, rates, lifetime, snaps


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MUSIELA_THREADS", "1")))
    except ValueError:
        return 1


def _simulate(cfg: SimConfig, u0: Curve, method: str) -> PathSet:
    if u0.grid != cfg.grid:
        raise ConfigurationError("u0 lives on a different grid than the configuration")
    if not np.all(np.isfinite(u0.values)):
        raise CorruptedStateError("u0 is not finite")
    keep = set(cfg.snapshot_steps())
    blocks = [(a, min(a + BLOCK_PATHS, cfg.paths)) for a in range(0, cfg.paths, BLOCK_PATHS)]
    work = lambda ab: _run_block(cfg, u0, ab[0], ab[1], method, keep)
    threads = min(_threads(), len(blocks))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    cat = lambda i: np.concatenate([r[i] for r in results])
    snaps = {j: np.concatenate([r[5][j] for r in results]) for j in sorted(keep)}
    return PathSet(cfg, u0, method, cat(0), cat(1), cat(2), cat(3), cat(4), snaps)


def simulate(cfg: SimConfig, u0: Curve) -> PathSet:
    """Run ``cfg.paths`` independent splitting trajectories from ``u0``."""
    return _simulate(cfg, u0, "splitting")


def simulate_yosida(cfg: SimConfig, u0: Curve, lam: float | None = None) -> PathSet:
    """Run the regularized scheme ``u + dt(-A_lambda u + beta(u)) + sqrt(dt) sum sigma_k xi_k``.

    Uses exactly the same draws as :func:`simulate` for the same configuration.
    """
    if lam is not None:
        from dataclasses import replace
        cfg = replace(cfg, yosida_lambda=lam)
    if cfg.yosida_lambda is None:
        raise ConfigurationError("simulate_yosida needs yosida_lambda")
    return _simulate(cfg, u0, "yosida")
