import math

import numpy as np
import pytest

from dispeq.placement import solve_reduced
from dispeq.presets import REFERENCE_TRIPLE, REFERENCE_WINDING, reference_stack, two_mode_setup
from dispeq.transfer import composite_matrix


@pytest.fixture(scope="session")
def setup():
    return two_mode_setup()


@pytest.fixture(scope="session")
def solution(setup):
    return solve_reduced(REFERENCE_WINDING, setup.fi, setup.fz, initial=REFERENCE_TRIPLE)


@pytest.fixture(scope="session")
def period(setup, solution):
    def sweep(w):
        return composite_matrix(solution.lengths, setup.scatterer, setup.phase, w, repetitions=2)
    return sweep


@pytest.fixture(scope="session")
def bare_guide(setup, solution):
    from dispeq.transfer import propagation_matrix

    def sweep(w):
        return propagation_matrix(setup.phase, 2 * solution.period, w)
    return sweep


@pytest.fixture(scope="session")
def stack():
    return reference_stack()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n, scale=1.0):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (z + z.conj().T) / 2


TWO_PI = 2 * math.pi


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
