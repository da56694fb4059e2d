"""Forward rates under a saturating volatility stay nonnegative; an additive one does not.

Run with ``python3 demos/positivity_demo.py``.  Takes a few seconds.
"""
import numpy as np

from musiela import (
    Curve,
    Grid,
    SimConfig,
    builtin_additive,
    builtin_exp_saturating,
    condition_c_probe,
    positivity_report,
    simulate,
)

# %% Desk grid and the initial curve u0(x) = 0.02 + 0.01 exp(-x)
grid = Grid.from_spacing(20.0, 0.05)
u0 = Curve.from_function(grid, lambda x: 0.02 + 0.01 * np.exp(-x), 0.02)

# %% Five exponential factors whose state dependence saturates and vanishes at zero rates
k = np.arange(1, 6)
compliant = builtin_exp_saturating(5, 0.05 / k, 1.0 + 0.5 * k)
print(compliant.describe())

ps = simulate(SimConfig(grid, 0.05, 5.0, compliant, paths=200, seed=1), u0)
print(positivity_report(ps).text())

# %% The probe of the drift near the boundary: the ratio stays bounded as eps -> 0
print(condition_c_probe(compliant, 1.0, grid, n_states=50).text())

# %% A state-independent volatility with no drift pushes a low flat curve below zero
additive = builtin_additive(1, 0.02, 1.0)
cfg = SimConfig(grid, 0.05, 5.0, additive, paths=200, seed=1, drift_mode="zero")
ps_bad = simulate(cfg, Curve.constant(grid, 0.001))
rep = positivity_report(ps_bad, tol=1e-8)
print(rep.text())
print(f"fraction of (path, step) samples below -1e-8: {rep.metrics['violation_fraction']:.3f}")

# %% Its boundary ratio diverges like eps^-2
print(condition_c_probe(additive, 1.0, grid, n_states=50).text())
