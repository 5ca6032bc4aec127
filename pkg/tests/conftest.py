import math

import numpy as np
import pytest

from psnet.core import Ordering, SeededStream, SubEnsembleLayout


def fock_squeezed_vacuum(r, cutoff=200):
    """Photon-number probabilities of a squeezed vacuum by direct summation.

    Only even photon numbers are populated; amplitudes follow the ratio
    ``c_{2k+2} / c_{2k} = -tanh(r) sqrt((2k+1)/(2k+2))``.
    """
    p = np.zeros(cutoff + 1)
    t = math.tanh(r)
    amp = 1.0 / math.sqrt(math.cosh(r))
    for k in range(0, cutoff // 2 + 1):
        p[2 * k] = amp * amp
        amp *= -t * math.sqrt((2 * k + 1) / (2 * k + 2))
    return p


def fock_thermal(n, cutoff=400):
    k = np.arange(cutoff + 1)
    return n ** k / (1.0 + n) ** (k + 1)


@pytest.fixture
def pp():
    return Ordering.positive_p()


@pytest.fixture
def wig():
    return Ordering.wigner()


@pytest.fixture
def small_layout():
    return SubEnsembleLayout(10, 200)


@pytest.fixture
def seed():
    return SeededStream(1234)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
