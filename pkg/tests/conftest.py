import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from nlslab import EnergyModel, SolverOptions, make_grid, minimize  # noqa: E402

settings.register_profile(
    "nlslab", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("nlslab")

CUBIC_OPTS = SolverOptions(step=4.0, seed_width=3.0)


@pytest.fixture(scope="session")
def cubic_grid():
    return make_grid(1, 20.0, 512)


@pytest.fixture(scope="session")
def cubic_model(cubic_grid):
    return EnergyModel(cubic_grid, "second", 4, 0.0, 1.0)


@pytest.fixture(scope="session")
def cubic_gs(cubic_model):
    gs = minimize(cubic_model, 1.0, CUBIC_OPTS)
    assert gs.converged
    return gs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_field(g, rng, scale=1.0):
    noise = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    return np.fft.ifftn(np.fft.fftn(noise) * np.exp(-0.5 * scale**2 * g.k2))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
