import numpy as np
import pytest

from heisenberg_xy.model import ModelParams

FIG1 = ModelParams(omega=1.0, j=0.1, delta=0.1, gamma=0.3)
FIG2 = ModelParams(omega=1.0, j=0.1, delta=0.458, gamma=0.458)

# Filled by tests/test_acceptance.py; reported once at the end of the run.
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def fig1():
    return FIG1


@pytest.fixture
def fig2():
    return FIG2


def random_valid_params(rng, nbar=0.0):
    """Random parameters inside the single-decay-rate validity window."""
    omega = rng.uniform(0.5, 2.0)
    j = rng.uniform(-0.1, 0.1) * omega
    delta = rng.choice([-1.0, 1.0]) * rng.uniform(0.02, 0.45) * omega
    gamma = rng.uniform(0.1, 1.0)
    return ModelParams(omega=omega, j=j, delta=delta, gamma=gamma, nbar=nbar)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if ok else 'FAIL'}  {detail}")
