"""Maturity cutoffs and state clamps approximate the volatility with uniform Lipschitz constants.

Run with ``python3 demos/ladders_demo.py``.  Takes a few seconds.
"""
import numpy as np

from musiela import Grid, builtin_exp_saturating, ladder_convergence, psi_ladder_norms
from musiela.inequalities import psi_ladder_closed_form
from musiela.sampling import random_ball, random_curves

grid = Grid.from_spacing(20.0, 0.05)
k = np.arange(1, 6)
model = builtin_exp_saturating(5, 0.05 / k, 1.0 + 0.5 * k)
rng = np.random.default_rng(0)
samples = random_curves(rng, grid, 20, 1.0)
pairs = (random_ball(rng, grid, 200, 1.0, 2.0), random_ball(rng, grid, 200, 1.0, 2.0))

# %% Differences to the untruncated volatility and sampled Lipschitz ratios per index
for kind in ("maturity", "state"):
    rep = ladder_convergence(model, kind, samples, 1.0, grid, pairs=pairs)
    m = rep.metrics
    print(f"{kind} ladder: {rep.verdict}")
    for i, d, r, c in zip(m["indices"], m["sigma_diff_max"], m["lipschitz_ratio"], m["lipschitz_cap"]):
        print(f"  index {i:>2}: max diff {d:.3e}  ratio {r:.4f}  cap {c:.3f}")
    print(f"  ratio spread {100 * m['ratio_spread']:.2f}%")

# %% The cutoff slope norm against its closed form
for n in (1, 2, 4, 8, 16):
    quad = psi_ladder_norms(model, n, 1.0)[1]
    closed = float(np.sqrt(np.sum(psi_ladder_closed_form(model.lam, n, 1.0)[1])))
    print(f"n={n:>2}: quadrature {quad:.6e}  closed form {closed:.6e}")
