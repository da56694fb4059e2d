"""Discounted bond prices are martingales exactly when the drift is the no-arbitrage one.

Run with ``python3 demos/martingale_demo.py``.  Takes about a minute.
"""
from dataclasses import replace

import numpy as np

from musiela import Curve, Grid, SimConfig, builtin_additive, builtin_exp_saturating, martingale_test, simulate


def halving_pair(cfg, u0):
    """A coarse run and a run on half the step that share the Brownian path."""
    coarse = simulate(replace(cfg, snapshot_every=20, noise_substeps=2), u0)
    fgrid = Grid.from_spacing(cfg.grid.x_max, cfg.grid.dx / 2)
    fu0 = Curve.from_function(fgrid, lambda x: np.interp(x, cfg.grid.nodes, u0.values), u0.value_at_infinity)
    fine = simulate(replace(cfg, grid=fgrid, dt=fgrid.dx, snapshot_every=40), fu0)
    return coarse, fine


grid = Grid.from_spacing(20.0, 0.05)
u0 = Curve.from_function(grid, lambda x: 0.02 + 0.01 * np.exp(-x), 0.02)

# %% The compliant model with the HJM drift: every checkpoint sits inside 3 SE + b dt
k = np.arange(1, 6)
model = builtin_exp_saturating(5, 0.05 / k, 1.0 + 0.5 * k)
coarse, fine = halving_pair(SimConfig(grid, 0.05, 5.0, model, paths=500, seed=42), u0)
print(martingale_test(coarse, 10.0, [1, 2, 3, 4, 5], fine).text())

# %% Dropping the drift of a large additive volatility biases the bond price upward
cfg = SimConfig(grid, 0.05, 5.0, builtin_additive(1, 0.1, 1.0), paths=2000, seed=42, drift_mode="zero")
coarse, fine = halving_pair(cfg, u0)
print(martingale_test(coarse, 10.0, [1, 2, 3, 4, 5], fine).text())
