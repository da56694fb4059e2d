import json
import shutil
import subprocess

import numpy as np
import pytest

from musiela import ConfigurationError
from musiela.cli_runner import DEFAULTS, build_model, main, parse_config, run

SMALL = {"x_max": 5.0, "dx": 0.1, "t_end": 1.0, "paths": 8}
EXP_TANH = {"family": "exp_tanh", "K": 5, "c": {"scale": 0.05, "power": 1}, "lam": {"base": 1.0, "slope": 0.5}}


def write_doc(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def doc_for(tmp_path, **extra):
    doc = {"name": "t", "kind": "positivity", "model": EXP_TANH, **SMALL,
           "output_dir": str(tmp_path / "out")}
    doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# validation

def test_parse_fills_defaults_and_hash(tmp_path):
    spec = parse_config(json.dumps(doc_for(tmp_path)))
    assert spec.document["seed"] == DEFAULTS["seed"]
    assert spec.document["dt"] == 0.1
    assert spec.config.grid.n_points == 51
    assert len(spec.config_hash) == 40
    again = parse_config(json.dumps(doc_for(tmp_path)))
    assert again.config_hash == spec.config_hash
    changed = parse_config(json.dumps(doc_for(tmp_path, seed=1)))
    assert changed.config_hash != spec.config_hash


def test_default_output_dir_uses_name(tmp_path):
    doc = doc_for(tmp_path)
    del doc["output_dir"]
    assert str(parse_config(json.dumps(doc)).output_dir) == "runs/t"


@pytest.mark.parametrize("mutation,field", [
    ({"colour": "red"}, "colour"),
    ({"dt": 0.05}, "dt"),
    ({"alpha": 0.0}, "alpha"),
    ({"alpha": -1.0}, "alpha"),
    ({"kind": "dance"}, "kind"),
    ({"model": {**EXP_TANH, "sigma": 1}}, "model.sigma"),
    ({"martingale": {"T": 10.0, "when": 1}}, "martingale.when"),
    ({"paths": 2.5}, "paths"),
    ({"seed": -3}, "seed"),
    ({"x_max": 5.05}, "x_max"),
    ({"drift": "none"}, "drift"),
])
def test_parse_rejects_with_field_path(tmp_path, mutation, field):
    with pytest.raises(ConfigurationError) as exc:
        parse_config(json.dumps(doc_for(tmp_path, **mutation)))
    assert str(exc.value).startswith(field)


def test_parse_rejects_missing_model_and_malformed_json(tmp_path):
    doc = doc_for(tmp_path)
    del doc["model"]
    with pytest.raises(ConfigurationError, match="model"):
        parse_config(json.dumps(doc))
    with pytest.raises(ConfigurationError, match="malformed"):
        parse_config("{not json")


def test_build_model_families():
    m = build_model(EXP_TANH, 1.0)
    np.testing.assert_allclose(m.c, 0.05 / np.arange(1, 6))
    np.testing.assert_allclose(m.lam, 1.0 + 0.5 * np.arange(1, 6))
    lad = build_model({**EXP_TANH, "maturity_cutoff": 3, "state_clamp": 2}, 1.0)
    assert (lad.n, lad.m) == (3, 2)
    assert build_model({"family": "zero"}, 1.0).K == 1
    with pytest.raises(ConfigurationError):
        build_model({"family": "rough"}, 1.0)


def test_csv_initial_curve(tmp_path):
    from musiela import Curve, Grid
    g = Grid.from_spacing(5.0, 0.1)
    Curve.constant(g, 0.015).to_csv(tmp_path / "u0.csv")
    spec = parse_config(json.dumps(doc_for(tmp_path, u0={"type": "csv", "path": str(tmp_path / "u0.csv")})))
    assert spec.u0.values[0] == 0.015


# ---------------------------------------------------------------------------
# exit codes and artifacts

def test_exit_zero_on_passing_run_with_artifacts(tmp_path, capsys):
    code = main(["run", write_doc(tmp_path, doc_for(tmp_path))])
    assert code == 0
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    meta = json.loads((out / "meta.json").read_text())
    assert report["verdict"] == "pass"
    assert report["config_hash"] == meta["config_hash"]
    assert (out / "diag.csv").read_text().startswith("step,path,min,neg_norm,short_rate")
    assert "positivity: pass" in capsys.readouterr().out


def test_exit_one_on_failing_verdict(tmp_path):
    doc = doc_for(tmp_path, drift="zero", model={"family": "additive", "K": 1, "c": 0.02, "lam": 1.0},
                  u0={"type": "constant", "value": 0.001})
    assert main(["run", write_doc(tmp_path, doc)]) == 1


def test_exit_two_on_configuration_error(tmp_path, capsys):
    assert main(["run", write_doc(tmp_path, doc_for(tmp_path, dt=0.2))]) == 2
    assert "dt" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["run", str(bad)]) == 2


def test_exit_three_on_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", write_doc(tmp_path, doc_for(tmp_path)), "--output-dir", str(blocker / "sub")]) == 3
    assert main(["run", str(tmp_path / "missing.json")]) == 3


def test_diag_csv_is_byte_identical_across_runs(tmp_path):
    cfg = write_doc(tmp_path, doc_for(tmp_path))
    assert main(["run", cfg, "--output-dir", str(tmp_path / "a")]) == 0
    assert main(["run", cfg, "--output-dir", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "diag.csv").read_bytes() == (tmp_path / "b" / "diag.csv").read_bytes()


def test_suite_subcommand(tmp_path, capsys):
    assert main(["suite", "inequalities", "--trials", "20", "--output-dir", str(tmp_path / "s")]) == 0
    report = json.loads((tmp_path / "s" / "report.json").read_text())
    assert report["report_type"] == "inequality_suite"
    assert "total" in capsys.readouterr().out
    assert main(["suite", "inequalities", "--alpha", "-1", "--trials", "5"]) == 2


def test_sweep_subcommands(tmp_path):
    doc = doc_for(tmp_path, ladder={"samples": 3, "pairs": 10, "indices": [1, 2, 4, 8, 16]})
    assert main(["sweep", "ladder", write_doc(tmp_path, doc), "--output-dir", str(tmp_path / "l")]) == 0
    rows = (tmp_path / "l" / "diag.csv").read_text().splitlines()
    assert rows[0] == "ladder,index,sigma_diff_max,beta_diff_max,lipschitz_ratio,lipschitz_cap"
    assert len(rows) == 11
    ydoc = doc_for(tmp_path, model={"family": "zero"}, paths=2)
    assert main(["sweep", "yosida", write_doc(tmp_path, ydoc, "y.json"), "--output-dir", str(tmp_path / "y")]) == 0


def test_condition_c_and_martingale_kinds(tmp_path):
    cc = doc_for(tmp_path, kind="condition-c", condition_c={"states": 20})
    assert main(["run", write_doc(tmp_path, cc), "--output-dir", str(tmp_path / "c")]) == 0
    assert json.loads((tmp_path / "c" / "report.json").read_text())["verdict"] == "bounded"
    mt = doc_for(tmp_path, kind="martingale", model={"family": "zero"}, paths=4, x_max=5.0,
                 u0={"type": "constant", "value": 0.02},
                 martingale={"T": 3.0, "checkpoints": [0.5, 1.0]})
    assert main(["run", write_doc(tmp_path, mt, "m.json"), "--output-dir", str(tmp_path / "m")]) == 0
    bad = doc_for(tmp_path, kind="martingale", martingale={"T": 3.0, "checkpoints": [0.55]})
    assert main(["run", write_doc(tmp_path, bad, "b.json")]) == 2


def test_help_lists_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--help"])
    assert exc.value.code == 0
    assert "paths = 500" in capsys.readouterr().out


@pytest.mark.skipif(shutil.which("musiela-sim") is None, reason="console script not installed")
def test_console_script_entry_point(tmp_path):
    proc = subprocess.run(["musiela-sim", "run", write_doc(tmp_path, doc_for(tmp_path, alpha=0))],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "alpha" in proc.stderr


def test_run_accepts_a_parsed_experiment(tmp_path):
    spec = parse_config(json.dumps(doc_for(tmp_path, kind="simulate")))
    assert run(spec, quiet=True) == 0
    assert (spec.output_dir / "meta.json").exists()
