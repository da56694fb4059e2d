import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from musiela import Curve, Grid, builtin_exp_saturating

settings.register_profile(
    "musiela",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("musiela")


@pytest.fixture
def desk_grid():
    """The desk grid: x_max = 20, dx = 0.05."""
    return Grid.from_spacing(20.0, 0.05)


@pytest.fixture
def small_grid():
    return Grid.from_spacing(10.0, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def exp_tanh_model():
    """Compliant exp-tanh family with K=5, c_k = 0.05/k, lam_k = 1 + k/2."""
    k = np.arange(1, 6)
    return builtin_exp_saturating(5, 0.05 / k, 1.0 + 0.5 * k)


@pytest.fixture
def desk_u0(desk_grid):
    return Curve.from_function(desk_grid, lambda x: 0.02 + 0.01 * np.exp(-x), 0.02)


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line per acceptance criterion and assert it."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def record(label: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
