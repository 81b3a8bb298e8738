import numpy as np
import pytest

from discord_witness.states import PAULIS, SINGLET

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def singlet_vec():
    return SINGLET.copy()


def pauli_correlations(rho):
    """T[i, j] = Tr[rho sigma_i (x) sigma_j] computed with np.kron directly."""
    return np.array([[np.real(np.trace(rho @ np.kron(si, sj))) for sj in PAULIS] for si in PAULIS])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
