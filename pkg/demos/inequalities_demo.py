"""Randomized checks of the functional inequalities with their explicit constants.

Run with ``python3 demos/inequalities_demo.py``.  Takes a few seconds.
"""
import numpy as np

from musiela import Curve, Grid, SmoothNegEnergy, inequality_suite, neg_energy
from musiela.inequalities import format_table
from musiela.weighted_spaces import Weight, negative_part, norm_L2_weighted

# %% Every inequality on 1000 random inputs: the worst slack is lhs - rhs
print(format_table(inequality_suite(alpha=1.0, seed=0, trials=1000)))

# %% The smooth negative-part energy approaches half the squared negative norm from below
grid = Grid.from_spacing(20.0, 0.05)
u = Curve.from_function(grid, lambda x: np.sin(2 * x) - 0.2)
target = 0.5 * norm_L2_weighted(negative_part(u), Weight(1.0, -1)) ** 2
for n in (1, 4, 16, 64):
    print(f"n={n:>2}: gap {target - neg_energy(u, SmoothNegEnergy(n), 1.0):.3e}")
