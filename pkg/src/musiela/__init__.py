"""Monte Carlo and functional-analytic toolkit for the Musiela forward-rate equation.

The package is organized bottom-up:

* :mod:`~musiela.weighted_spaces`: grids, curves and weighted norms.
* :mod:`~musiela.shift_semigroup`: the shift semigroup and its resolvent.
* :mod:`~musiela.volatility_models`: superposition volatilities and their ladders.
* :mod:`~musiela.hjm_drift`: the no-arbitrage drift and its explicit constants.
* :mod:`~musiela.mild_solver`: the splitting and regularized Monte Carlo schemes.
* :mod:`~musiela.diagnostics`: verdict reports on simulated paths.
* :mod:`~musiela.inequalities`: randomized checks of the functional inequalities.
* :mod:`~musiela.cli_runner`: JSON experiments and the ``musiela-sim`` command.
"""
from .errors import ConfigurationError, CorruptedStateError, MusielaError, PreconditionError
from .weighted_spaces import (
    Curve,
    Grid,
    Weight,
    inner_L2_weighted,
    negative_part,
    norm_H_alpha,
    norm_L1,
    norm_L2_weighted,
    sup_norm_bound_check,
)
from .shift_semigroup import YosidaParam, resolvent, shift, yosida_apply, yosida_negative_pairing
from .volatility_models import (
    ExponentialFactorModel,
    FunctionModel,
    LadderedModel,
    apply_ladder,
    builtin_additive,
    builtin_exp_saturating,
    builtin_zero,
    psi_ladder_norms,
)
from .hjm_drift import drift, hjm_drift_check, hs_norm_H, integral_op, lipschitz_probe_beta, superposition
from .mild_solver import PathSet, SimConfig, simulate, simulate_yosida, step
from .diagnostics import (
    Report,
    SmoothNegEnergy,
    condition_c_probe,
    ladder_convergence,
    martingale_test,
    neg_energy,
    neg_energy_derivative_check,
    positivity_report,
    solution_ladder_convergence,
    yosida_convergence,
)
from .inequalities import inequality_suite

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
