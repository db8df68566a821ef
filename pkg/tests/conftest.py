from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from ptrg.model import XYZFieldParams, build_fields_xyz
from ptrg.qops import SpinSystem

EPS = (0.1, 0.3, 0.5, 0.7)
FIXTURES = Path(__file__).parent / "fixtures"

# lines collected by tests/test_acceptance.py and echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def xyz_couplings(g: float, field: complex, eps=EPS):
    return build_fields_xyz(XYZFieldParams(1.0, 1.0, 0.5, 0.5, field, field, eps, g))


@pytest.fixture(scope="session")
def frozen():
    return json.loads((FIXTURES / "frozen.json").read_text())


@pytest.fixture
def sys4():
    return SpinSystem(4)


@pytest.fixture
def fig2():
    return xyz_couplings(0.1, 0.5j)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def fig3_times():
    return np.arange(1001) * 0.05


@pytest.fixture(scope="session")
def fig3f_trajectory():
    """Lindblad run of the real-field set at g = 1 (the slowest shared computation)."""
    from ptrg.dynamics import LindbladSpec, evolve_lindblad
    from ptrg.model import build_charge
    from ptrg.qops import density_matrix

    s = SpinSystem(4)
    h = build_charge(s, xyz_couplings(1.0, 0.5), 0)
    return evolve_lindblad(h, density_matrix(s.basis_state("0000")), LindbladSpec(0.05, (0, 1, 2, 3)),
                           fig3_times())
