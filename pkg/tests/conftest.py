import numpy as np
import pytest

from csdyn.spectrum import ModelParams, ReducedDynamics

FIG1 = ModelParams(omega0=1.0, omega=1.0, delta=0.01, n_spins=100, temperature=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def fig1():
    return FIG1


@pytest.fixture(scope="session")
def dyn():
    return ReducedDynamics(FIG1)


@pytest.fixture(scope="session")
def unitary_dyn():
    return ReducedDynamics(FIG1.replace(delta=0.0))


def random_states(rng, count):
    """Random qubit density matrices, uniformly inside the Bloch ball."""
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= rng.uniform(size=(count, 1)) ** (1 / 3)
    rho = np.empty((count, 2, 2), dtype=complex)
    rho[:, 0, 0] = (1 + v[:, 2]) / 2
    rho[:, 1, 1] = (1 - v[:, 2]) / 2
    rho[:, 0, 1] = (v[:, 0] - 1j * v[:, 1]) / 2
    rho[:, 1, 0] = rho[:, 0, 1].conj()
    return rho


# acceptance criteria register a one-line verdict here; printed at the end
ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
