"""JSON experiment configurations and the ``musiela-sim`` command.

An experiment is a JSON document.  Only ``name``, ``kind`` and (for every
kind except ``inequalities``) ``model`` are required::

    {"name": "pos", "kind": "positivity",
     "model": {"family": "exp_tanh", "K": 5,
               "c": {"scale": 0.05, "power": 1}, "lam": {"base": 1.0, "slope": 0.5}},
     "u0": {"type": "exp", "level": 0.02, "amplitude": 0.01, "rate": 1.0}}

Running it writes ``meta.json``, ``diag.csv`` and ``report.json`` to the
output directory; every file carries the hash of the normalized document.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import (
    Report,
    condition_c_probe,
    ladder_convergence,
    martingale_test,
    positivity_report,
    yosida_convergence,
)
from .errors import ConfigurationError, CorruptedStateError
from .inequalities import format_table, inequality_suite
from .mild_solver import SimConfig, content_hash, simulate
from .sampling import random_ball, random_curves
from .volatility_models import ExponentialFactorModel, LadderedModel
from .weighted_spaces import Curve, Grid

__all__ = ["ExperimentSpec", "KINDS", "DEFAULTS", "parse_config", "build_model", "build_u0", "run", "main"]

KINDS = ("simulate", "positivity", "condition-c", "martingale", "ladder", "yosida-sweep", "inequalities")

DEFAULTS = {
    "alpha": 1.0,
    "x_max": 20.0,
    "dx": 0.05,
    "t_end": 5.0,
    "paths": 500,
    "seed": 42,
    "drift": "hjm",
    "blowup_threshold": 1e6,
    "u0": {"type": "exp", "level": 0.02, "amplitude": 0.01, "rate": 1.0},
    "tol": None,
    "output_dir": None,
    "martingale": {"T": 10.0, "checkpoints": [1, 2, 3, 4, 5], "halving": True},
    "yosida": {"lambdas": [0.4, 0.2, 0.1, 0.05]},
    "ladder": {"ladders": ["maturity", "state"], "indices": [1, 2, 4, 8, 16],
               "samples": 20, "pairs": 200, "radius": 2.0},
    "condition_c": {"states": 200, "eps": [1.0, 0.1, 0.01, 0.001, 0.0001]},
    "inequalities": {"trials": 10000},
}

_TOP_KEYS = {"name", "kind", "model", "dt"} | set(DEFAULTS)
_MODEL_KEYS = {"family", "K", "c", "lam", "maturity_cutoff", "state_clamp"}
_FAMILIES = {"exp_tanh": "tanh", "additive": "one", "exp_sin": "sin", "zero": None}

HELP_DEFAULTS = "\n".join(
    ["configuration defaults:"]
    + [f"  {k} = {json.dumps(v)}" for k, v in DEFAULTS.items()]
    + ["  dt = dx (any other value is rejected)",
       "  model.c: number, list, or {\"scale\": s, \"power\": p} meaning s / k^p",
       "  model.lam: number, list, or {\"base\": b, \"slope\": a} meaning b + a k",
       "  u0.type: exp (level + amplitude exp(-rate x)), constant (value), csv (path)"])


@dataclass
class ExperimentSpec:
    """A validated experiment.

    Attributes:
        name: Identifier used for the default output directory.
        kind: One of :data:`KINDS`.
        config: Simulation configuration (``None`` for ``inequalities``).
        output_dir: Directory receiving the artifacts.
        document: The normalized document with every default filled in.
        u0: Initial curve for simulation kinds.
    """

    name: str
    kind: str
    config: SimConfig | None
    output_dir: Path
    document: dict = field(default_factory=dict)
    u0: Curve | None = None

    @property
    def config_hash(self) -> str:
        return content_hash(self.document)


# ---------------------------------------------------------------------------
# validation

def _fail(path: str, msg: str):
    raise ConfigurationError(f"{path}: {msg}")


def _number(doc, key, path, positive=False, integer=False):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(path, f"must be a finite number, got {v!r}")
    if integer and (not float(v).is_integer()):
        _fail(path, f"must be an integer, got {v!r}")
    if positive and not v > 0:
        _fail(path, f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _merge(defaults: dict, given, path: str) -> dict:
    if not isinstance(given, dict):
        _fail(path, "must be an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        _fail(f"{path}.{unknown[0]}", "unknown key")
    return {**defaults, **given}


def _factor_params(spec, K: int, path: str, kind: str) -> list[float]:
    ks = np.arange(1, K + 1)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return [float(spec)] * K
    if isinstance(spec, list):
        if len(spec) < K or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in spec):
            _fail(path, f"must list at least K={K} numbers")
        return [float(v) for v in spec]
    if isinstance(spec, dict):
        if kind == "c":
            d = _merge({"scale": 1.0, "power": 1.0}, spec, path)
            return [float(v) for v in d["scale"] / ks ** float(d["power"])]
        d = _merge({"base": 1.0, "slope": 0.0}, spec, path)
        return [float(v) for v in d["base"] + d["slope"] * ks]
    _fail(path, "must be a number, a list or an object")


def build_model(spec: dict, alpha: float, path: str = "model"):
    """Build a volatility model from its JSON description."""
    if not isinstance(spec, dict):
        _fail(path, "must be an object")
    unknown = sorted(set(spec) - _MODEL_KEYS)
    if unknown:
        _fail(f"{path}.{unknown[0]}", "unknown key")
    family = spec.get("family")
    if family not in _FAMILIES:
        _fail(f"{path}.family", f"must be one of {sorted(_FAMILIES)}, got {family!r}")
    if family == "zero":
        base = ExponentialFactorModel([0.0], [max(1.0, alpha)], "one", K=1, alpha=alpha)
    else:
        K = spec.get("K", 1)
        if isinstance(K, bool) or not isinstance(K, int) or K < 1:
            _fail(f"{path}.K", f"must be a positive integer, got {K!r}")
        c = _factor_params(spec.get("c", 0.02), K, f"{path}.c", "c")
        lam = _factor_params(spec.get("lam", 1.0), K, f"{path}.lam", "lam")
        try:
            base = ExponentialFactorModel(c, lam, _FAMILIES[family], K=K, alpha=alpha)
        except ConfigurationError as exc:
            _fail(path, str(exc))
    n, m = spec.get("maturity_cutoff"), spec.get("state_clamp")
    for key, v in (("maturity_cutoff", n), ("state_clamp", m)):
        if v is not None and (isinstance(v, bool) or not isinstance(v, int) or v < 1):
            _fail(f"{path}.{key}", f"must be a positive integer or null, got {v!r}")
    if n is None and m is None:
        return base
    return LadderedModel(base, n, m)


def build_u0(spec: dict, grid: Grid, path: str = "u0") -> Curve:
    """Build the initial curve from its JSON description."""
    if not isinstance(spec, dict) or "type" not in spec:
        _fail(path, "must be an object with a 'type'")
    kind = spec["type"]
    if kind == "exp":
        d = _merge({"type": "exp", "level": 0.02, "amplitude": 0.01, "rate": 1.0}, spec, path)
        lv, amp, rate = (_number(d, k, f"{path}.{k}") for k in ("level", "amplitude", "rate"))
        return Curve.from_function(grid, lambda x: lv + amp * np.exp(-rate * x), lv)
    if kind == "constant":
        d = _merge({"type": "constant", "value": 0.0}, spec, path)
        return Curve.constant(grid, _number(d, "value", f"{path}.value"))
    if kind == "csv":
        d = _merge({"type": "csv", "path": ""}, spec, path)
        try:
            curve = Curve.from_csv(Path(d["path"]))
        except OSError as exc:
            _fail(f"{path}.path", f"cannot read: {exc}")
        if curve.grid != grid:
            _fail(f"{path}.path", "curve grid differs from the configured grid")
        return curve
    _fail(f"{path}.type", f"must be exp, constant or csv, got {kind!r}")


def parse_config(text: str, output_dir=None) -> ExperimentSpec:
    """Validate a JSON experiment document and fill in the defaults.

    Raises:
        ConfigurationError: With a ``field.path: message`` text on any schema violation.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"<document>: malformed JSON ({exc})") from None
    if not isinstance(doc, dict):
        _fail("<document>", "must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        _fail(unknown[0], "unknown key")
    for key in ("name", "kind"):
        if key not in doc:
            _fail(key, "is required")
    name, kind = doc["name"], doc["kind"]
    if not isinstance(name, str) or not name or "/" in name:
        _fail("name", "must be a nonempty string without '/'")
    if kind not in KINDS:
        _fail("kind", f"must be one of {list(KINDS)}, got {kind!r}")
    full = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULTS.items()}
    for key, value in doc.items():
        if key in ("name", "kind", "model", "dt"):
            continue
        if isinstance(DEFAULTS.get(key), dict) and key != "u0":
            full[key] = _merge(DEFAULTS[key], value, key)
        else:
            full[key] = value
    full["name"], full["kind"] = name, kind
    alpha = _number(full, "alpha", "alpha", positive=True)
    x_max = _number(full, "x_max", "x_max", positive=True)
    dx = _number(full, "dx", "dx", positive=True)
    if "dt" in doc:
        dt = _number(doc, "dt", "dt", positive=True)
        if abs(dt - dx) > 1e-12 * dx:
            _fail("dt", f"must equal dx={dx} (lattice transport), got {dt}")
    full["dt"] = dx
    if kind != "inequalities" and "model" not in doc:
        _fail("model", "is required")
    out = Path(output_dir or full["output_dir"] or Path("runs") / name)
    if kind == "inequalities":
        _number(full["inequalities"], "trials", "inequalities.trials", positive=True, integer=True)
        _number(full, "seed", "seed", integer=True)
        return ExperimentSpec(name, kind, None, out, full)
    full["model"] = doc["model"]
    try:
        grid = Grid.from_spacing(x_max, dx)
    except ConfigurationError as exc:
        _fail("x_max", str(exc))
    model = build_model(doc["model"], alpha)
    u0 = build_u0(full["u0"], grid)
    if full["drift"] not in ("hjm", "zero"):
        _fail("drift", f"must be 'hjm' or 'zero', got {full['drift']!r}")
    paths = _number(full, "paths", "paths", positive=True, integer=True)
    seed = _number(full, "seed", "seed", integer=True)
    if seed < 0:
        _fail("seed", "must be nonnegative")
    t_end = _number(full, "t_end", "t_end", positive=True)
    if full["tol"] is not None and _number(full, "tol", "tol") < 0:
        _fail("tol", "must be nonnegative")
    try:
        cfg = SimConfig(grid, dx, t_end, model, alpha=alpha, paths=paths, seed=seed,
                        blowup_threshold=_number(full, "blowup_threshold", "blowup_threshold", positive=True),
                        drift_mode=full["drift"])
    except ConfigurationError as exc:
        _fail("<config>", str(exc))
    if kind == "martingale":
        mt = full["martingale"]
        T = _number(mt, "T", "martingale.T", positive=True)
        if T > x_max or t_end > T:
            _fail("martingale.T", f"need t_end <= T <= x_max, got T={T}")
        for i, t in enumerate(mt["checkpoints"]):
            if grid.lattice_index(t) is None or not 0 < t <= t_end:
                _fail(f"martingale.checkpoints[{i}]", f"{t} is not a lattice time in (0, t_end]")
    if kind == "yosida-sweep":
        lams = full["yosida"]["lambdas"]
        if not isinstance(lams, list) or not lams or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 for v in lams):
            _fail("yosida.lambdas", "must be a nonempty list of positive numbers")
    if kind == "ladder":
        for i, lad in enumerate(full["ladder"]["ladders"]):
            if lad not in ("maturity", "state", "both"):
                _fail(f"ladder.ladders[{i}]", f"must be maturity, state or both, got {lad!r}")
    return ExperimentSpec(name, kind, cfg, out, full, u0)


# ---------------------------------------------------------------------------
# execution

def _table_csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(repr(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _martingale(spec: ExperimentSpec):
    cfg = spec.config
    mt = spec.document["martingale"]
    checkpoints = [float(t) for t in mt["checkpoints"]]
    steps = [cfg.grid.lattice_index(t) for t in checkpoints]
    every = int(np.gcd.reduce(steps))
    from dataclasses import replace
    fine = None
    if mt["halving"]:
        coarse_cfg = replace(cfg, snapshot_every=every, noise_substeps=2)
        ps = simulate(coarse_cfg, spec.u0)
        fgrid = Grid.from_spacing(cfg.grid.x_max, cfg.grid.dx / 2)
        fu0 = Curve.from_function(fgrid, lambda x: np.interp(x, cfg.grid.nodes, spec.u0.values),
                                  spec.u0.value_at_infinity)
        fine_cfg = replace(cfg, grid=fgrid, dt=fgrid.dx, snapshot_every=2 * every)
        fine = simulate(fine_cfg, fu0)
    else:
        ps = simulate(replace(cfg, snapshot_every=every), spec.u0)
    report = martingale_test(ps, float(mt["T"]), checkpoints, fine)
    rows = [(r["t"], r["mean"], r["se"], r["deviation"], r["bias_coef"], r["band"], int(r["inside"]))
            for r in report.metrics["checkpoints"]]
    return report, ps, _table_csv(["t", "mean", "se", "deviation", "bias_coef", "band", "inside"], rows)


def _ladder(spec: ExperimentSpec):
    cfg = spec.config
    lad = spec.document["ladder"]
    base = cfg.model.base if isinstance(cfg.model, LadderedModel) else cfg.model
    rng = np.random.default_rng(cfg.seed)
    samples = random_curves(rng, cfg.grid, int(lad["samples"]), cfg.alpha, level=True)
    pa = random_ball(rng, cfg.grid, int(lad["pairs"]), cfg.alpha, float(lad["radius"]))
    pb = random_ball(rng, cfg.grid, int(lad["pairs"]), cfg.alpha, float(lad["radius"]))
    reports, rows = {}, []
    for kind in lad["ladders"]:
        rep = ladder_convergence(base, kind, samples, cfg.alpha, cfg.grid, tuple(lad["indices"]),
                                 pairs=(pa, pb), radius=float(lad["radius"]))
        reports[kind] = rep.to_dict()
        for i, idx in enumerate(rep.metrics["indices"]):
            rows.append((kind, idx, rep.metrics["sigma_diff_max"][i], rep.metrics["beta_diff_max"][i],
                         rep.metrics["lipschitz_ratio"][i], rep.metrics["lipschitz_cap"][i]))
    ok = all(r["verdict"] == "pass" for r in reports.values())
    report = Report("ladder_sweep", "pass" if ok else "fail", {"ladders": reports})
    return report, None, _table_csv(["ladder", "index", "sigma_diff_max", "beta_diff_max",
                                     "lipschitz_ratio", "lipschitz_cap"], rows)


def _execute(spec: ExperimentSpec):
    kind, cfg = spec.kind, spec.config
    if kind == "inequalities":
        ineq = spec.document["inequalities"]
        report = inequality_suite(float(spec.document["alpha"]), int(spec.document["seed"]),
                                  int(ineq["trials"]))
        rows = [(r["name"], r["trials"], r["violations"], r["worst_slack"]) for r in report.metrics["table"]]
        return report, None, _table_csv(["name", "trials", "violations", "worst_slack"], rows)
    if kind in ("simulate", "positivity"):
        ps = simulate(cfg, spec.u0)
        report = positivity_report(ps, spec.document["tol"])
        if kind == "simulate":
            report = Report("simulate", "pass", report.metrics, report.config_hash)
        return report, ps, ps.diag_csv()
    if kind == "martingale":
        return _martingale(spec)
    if kind == "condition-c":
        cc = spec.document["condition_c"]
        report = condition_c_probe(cfg.model, cfg.alpha, cfg.grid, n_states=int(cc["states"]),
                                   eps=tuple(cc["eps"]), seed=cfg.seed, drift_on=cfg.drift_mode == "hjm")
        rows = list(zip(report.metrics["eps"], report.metrics["max_ratio_per_eps"]))
        return report, None, _table_csv(["eps", "max_ratio"], rows)
    if kind == "ladder":
        return _ladder(spec)
    if kind == "yosida-sweep":
        report = yosida_convergence(cfg, spec.u0, spec.document["yosida"]["lambdas"])
        rows = list(zip(report.metrics["lambdas"], report.metrics["gaps"]))
        return report, None, _table_csv(["lambda", "sup_gap"], rows)
    raise ConfigurationError(f"kind: unsupported {kind!r}")


def run(spec: ExperimentSpec, quiet: bool = False) -> int:
    """Execute an experiment and persist its artifacts.

    Returns:
        0 when the verdict passes, 1 when it fails, 2 on a configuration
        error and 3 when the artifacts cannot be written.
    """
    t0 = time.perf_counter()
    try:
        report, ps, diag = _execute(spec)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CorruptedStateError as exc:
        print(f"corrupted state: {exc}", file=sys.stderr)
        return 1
    report.config_hash = spec.config_hash
    meta = {"name": spec.name, "kind": spec.kind, "config_hash": spec.config_hash, "document": spec.document}
    if ps is not None:
        meta["simulation"] = ps.meta()
    out = report.to_dict()
    out["seconds"] = time.perf_counter() - t0
    try:
        spec.output_dir.mkdir(parents=True, exist_ok=True)
        (spec.output_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        (spec.output_dir / "diag.csv").write_text(diag)
        (spec.output_dir / "report.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    if not quiet:
        print(format_table(report) if spec.kind == "inequalities" else report.text())
        print(f"artifacts: {spec.output_dir}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# command line

def _load(path: str, output_dir, kind=None) -> ExperimentSpec:
    text = Path(path).read_text()
    if kind is not None:
        doc = json.loads(text)
        if isinstance(doc, dict):
            doc["kind"] = kind
            text = json.dumps(doc)
    return parse_config(text, output_dir)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="musiela-sim", description="Musiela forward-rate experiments.",
                                epilog=HELP_DEFAULTS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment document", epilog=HELP_DEFAULTS,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    r.add_argument("config", help="path to the JSON experiment document")
    r.add_argument("--output-dir", help="override the output directory")
    s = sub.add_parser("suite", help="run a property suite")
    s.add_argument("suite", choices=["inequalities"])
    s.add_argument("--alpha", type=float, default=1.0, help="weight exponent (default 1.0)")
    s.add_argument("--seed", type=int, default=0, help="seed (default 0)")
    s.add_argument("--trials", type=int, default=10000, help="trials per inequality (default 10000)")
    s.add_argument("--output-dir", help="also write artifacts to this directory")
    w = sub.add_parser("sweep", help="run a ladder or Yosida sweep from an experiment document",
                       epilog=HELP_DEFAULTS, formatter_class=argparse.RawDescriptionHelpFormatter)
    w.add_argument("sweep", choices=["ladder", "yosida"])
    w.add_argument("config", help="path to the JSON experiment document")
    w.add_argument("--output-dir", help="override the output directory")
    return p


def main(argv=None) -> int:
    """Entry point of the ``musiela-sim`` console script."""
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            spec = _load(args.config, args.output_dir)
        elif args.command == "sweep":
            spec = _load(args.config, args.output_dir, "ladder" if args.sweep == "ladder" else "yosida-sweep")
        else:
            doc = {"name": "inequalities", "kind": "inequalities", "alpha": args.alpha, "seed": args.seed,
                   "inequalities": {"trials": args.trials}}
            spec = parse_config(json.dumps(doc), args.output_dir)
            if args.output_dir is None:
                report = inequality_suite(spec.document["alpha"], args.seed, args.trials)
                print(format_table(report))
                return 0 if report.passed else 1
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, json.JSONDecodeError) else 3
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
