"""Desk-scale acceptance criteria.

Every experiment goes through :func:`musiela.cli_runner.parse_config` and
:func:`musiela.cli_runner.run`, the same path as ``musiela-sim run``.  Each
test records one PASS/FAIL line, repeated in the terminal summary.
"""
import json
import math
import time

import numpy as np
import pytest

from musiela import (
    Curve,
    Grid,
    Report,
    SmoothNegEnergy,
    builtin_additive,
    drift,
    integral_op,
    neg_energy,
    neg_energy_derivative_check,
    resolvent,
)
from musiela.cli_runner import parse_config, run
from musiela.diagnostics import neg_energy_bound
from musiela.inequalities import format_table, psi_ladder_closed_form
from musiela.sampling import random_curves
from musiela.weighted_spaces import Weight, negative_part, norm_L2_weighted

pytestmark = pytest.mark.acceptance

EXP_TANH = {"family": "exp_tanh", "K": 5, "c": {"scale": 0.05, "power": 1}, "lam": {"base": 1.0, "slope": 0.5}}


def execute(tmp_path, doc, name="run"):
    """Run a configuration document and return the parsed report and the output directory."""
    out = tmp_path / name
    spec = parse_config(json.dumps({"name": name, **doc}), output_dir=out)
    code = run(spec, quiet=True)
    report = json.loads((out / "report.json").read_text())
    assert code == (0 if report["verdict"] in ("pass", "bounded") else 1)
    return report, out


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv("MUSIELA_THREADS", "1")


def test_criterion_01_positivity_of_compliant_model(tmp_path, single_thread, verdict):
    t0 = time.perf_counter()
    rep, _ = execute(tmp_path, {"kind": "positivity", "model": EXP_TANH})
    seconds = time.perf_counter() - t0
    m = rep["metrics"]
    ok = m["violations"] == 0 and m["tol"] == pytest.approx(1e-8 * 1.03) and seconds < 60.0
    verdict("1 positivity (exp-tanh, 500 paths, t_end=5)", ok,
            f"violations={m['violations']} of {m['samples']}, min={m['global_min']:.3e}, {seconds:.1f} s")


def test_criterion_02_positivity_falsification(tmp_path, verdict):
    rep, _ = execute(tmp_path, {"kind": "positivity", "drift": "zero",
                                "model": {"family": "additive", "K": 1, "c": 0.02, "lam": 1.0},
                                "u0": {"type": "constant", "value": 0.001}, "tol": 1e-8})
    m = rep["metrics"]
    frac = m["violations"] / m["samples"]
    verdict("2 positivity monitor detects additive violations", rep["verdict"] == "fail" and frac >= 0.01,
            f"fraction below -1e-8 = {frac:.3f}")


def test_criterion_03_martingale_check(tmp_path, verdict):
    good, _ = execute(tmp_path, {"kind": "martingale", "model": EXP_TANH}, "compliant")
    bad, _ = execute(tmp_path, {"kind": "martingale", "drift": "zero", "paths": 4000,
                                "model": {"family": "additive", "K": 1, "c": 0.1, "lam": 1.0}}, "driftless")
    last = {r["t"]: r for r in bad["metrics"]["checkpoints"]}[5.0]
    rows = good["metrics"]["checkpoints"]
    worst = max(abs(r["deviation"]) / r["band"] for r in rows)
    ok = good["verdict"] == "pass" and not last["inside"]
    verdict("3 discounted bonds: compliant inside band, drift-zero outside at t=5", ok,
            f"compliant max |dev|/band={worst:.2f}; drift-zero t=5 |dev|/band="
            f"{abs(last['deviation']) / last['band']:.2f}")


def test_criterion_04_closed_form_oracles(verdict):
    g = Grid.from_spacing(20.0, 0.05)
    x, dx = g.nodes, g.dx
    e = Curve(g, np.exp(-x), 0.0)
    errs = []
    for lam in (0.05, 0.2, 1.0):
        errs.append(np.max(np.abs(resolvent(e, lam).values - np.exp(-x) / (1 + lam))) / (5 * dx ** 2))
    for sigma_bar, lam in ((0.02, 1.0), (0.1, 0.5), (0.05, 2.0)):
        alpha = min(1.0, lam)
        beta = drift(builtin_additive(1, sigma_bar, lam, alpha=alpha), Curve.constant(g, 0.03), alpha=alpha).beta
        exact = sigma_bar ** 2 * np.exp(-lam * x) * (1 - np.exp(-lam * x)) / lam
        errs.append(np.max(np.abs(beta.values - exact)) / (5 * dx ** 2 * sigma_bar ** 2 / lam))
    errs.append(np.max(np.abs(integral_op(e).values - (1 - np.exp(-x)))) / dx ** 2)
    worst = float(max(errs))
    verdict("4 resolvent, Vasicek drift and integral oracles", worst <= 1.0,
            f"worst error / tolerance = {worst:.3f}")


def test_criterion_05_inequality_suite(tmp_path, verdict):
    t0 = time.perf_counter()
    rep, _ = execute(tmp_path, {"kind": "inequalities", "model": {"family": "zero"}})
    seconds = time.perf_counter() - t0
    table = rep["metrics"]["table"]
    bad = [r["name"] for r in table if r["violations"] > 0 or r["trials"] < 10_000]
    print(format_table(Report(rep["report_type"], rep["verdict"], rep["metrics"])))
    verdict("5 inequality suite (10^4 trials each)", not bad and seconds < 120.0,
            f"{len(table)} inequalities, failing={bad}, {seconds:.1f} s")


@pytest.fixture(scope="module")
def ladder_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("ladder")
    spec = parse_config(json.dumps({"name": "ladder", "kind": "ladder", "model": EXP_TANH}), output_dir=out)
    run(spec, quiet=True)
    return json.loads((out / "report.json").read_text())["metrics"]["ladders"]


def test_criterion_06_ladder_convergence(ladder_report, exp_tanh_model, verdict):
    details, ok = [], True
    for kind in ("maturity", "state"):
        m = ladder_report[kind]["metrics"]
        sig = np.array(m["sigma_diff"])
        ok &= sig.shape[1] == 20 and m["monotone"] and m["decayed"]
        live = sig[0] > 0
        details.append(f"{kind} top/first={np.max(sig[-1][live] / sig[0][live]):.1e} on {live.sum()} curves")
    m = ladder_report["maturity"]["metrics"]
    closed = [math.sqrt(float(np.sum(psi_ladder_closed_form(exp_tanh_model.lam, n, 1.0)[1])))
              for n in m["indices"]]
    gap = float(np.max(np.abs(np.array(m["psi_bar_norm"]) - closed)))
    ok &= gap <= 1e-8
    details.append(f"psi_bar gap={gap:.1e}")
    verdict("6 ladder differences decrease and decay; psi_bar table", ok, ", ".join(details))


def test_criterion_07_uniform_lipschitz_caps(ladder_report, verdict):
    details, ok = [], True
    for kind in ("maturity", "state"):
        m = ladder_report[kind]["metrics"]
        ok &= m["ratio_spread"] < 0.05 and m["below_cap"]
        details.append(f"{kind} spread={100 * m['ratio_spread']:.2f}% "
                       f"max ratio/cap={max(r / c for r, c in zip(m['lipschitz_ratio'], m['lipschitz_cap'])):.3f}")
    verdict("7 Lipschitz ratios uniform in the ladder index and below the cap", ok, ", ".join(details))


def test_criterion_08_yosida_convergence(tmp_path, verdict):
    rep, _ = execute(tmp_path, {"kind": "yosida-sweep", "paths": 20, "model": {"family": "zero"}})
    m = rep["metrics"]
    gaps = ", ".join(f"{lam}:{g:.2e}" for lam, g in zip(m["lambdas"], m["gaps"]))
    verdict("8 Yosida gap decreases and ends below 10 lambda_min", rep["verdict"] == "pass", gaps)


def test_criterion_09_smooth_negative_energy(verdict):
    g = Grid.from_spacing(20.0, 0.05)
    rng = np.random.default_rng(2024)
    worst, ok = 0.0, True
    for values in random_curves(rng, g, 100, 1.0):
        u = Curve(g, values)
        target = 0.5 * norm_L2_weighted(negative_part(u), Weight(1.0, -1)) ** 2
        errs = []
        for n in (1, 2, 4, 8, 16, 32, 64):
            e = SmoothNegEnergy(n)
            err = target - neg_energy(u, e, 1.0)
            bound = neg_energy_bound(u, e, 1.0)
            ok &= -1e-15 <= err <= bound + 1e-15
            worst = max(worst, err / bound if bound > 0 else 0.0)
            errs.append(err)
        ok &= all(a >= b for a, b in zip(errs, errs[1:]))
    u = Curve.from_function(g, lambda x: np.sin(2 * x) - 0.2)
    v = Curve.from_function(g, lambda x: np.exp(-0.3 * x) * np.cos(x))
    fd = neg_energy_derivative_check(u, v, SmoothNegEnergy(8), 1.0)
    order = fd.metrics["observed_order"]
    ok &= fd.passed and abs(order - 1.0) < 0.2
    verdict("9 G_n energy within its bound on 100 curves; first-order remainder", ok,
            f"max error/bound={worst:.3f}, remainder order={order:.3f}")


def test_criterion_10_byte_identical_diag(tmp_path, verdict):
    doc = {"kind": "positivity", "model": EXP_TANH}
    _, a = execute(tmp_path, doc, "first")
    _, b = execute(tmp_path, doc, "second")
    same = (a / "diag.csv").read_bytes() == (b / "diag.csv").read_bytes()
    verdict("10 repeated run gives a byte-identical diag.csv", same,
            f"{len((a / 'diag.csv').read_bytes())} bytes")
