from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sectorwave import closedform, solver
from sectorwave.spectral import Grid1D, SpectralField

settings.register_profile(
    "suite", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("suite")

ORACLE = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())


@pytest.fixture(scope="session")
def oracle():
    return ORACLE


@pytest.fixture(scope="session")
def ref_grid() -> Grid1D:
    return Grid1D(40 * math.pi, 4096)


@pytest.fixture(scope="session")
def sech2(ref_grid) -> SpectralField:
    return SpectralField(ref_grid, values=3.0 / np.cosh(ref_grid.x / 2) ** 2)


@pytest.fixture(scope="session")
def solved_gkdv(ref_grid):
    """Converged gKdV profiles keyed by (l, V)."""
    out = {}
    for l in (1, 2, 3):
        for V in (1.5, 2.0, 3.0):
            out[(l, V)] = solver.petviashvili_solve(solver.make_gkdv_problem(l, V, ref_grid))
    return out


@pytest.fixture(scope="session")
def solved_ilw(ref_grid):
    from sectorwave.symbols import ilw

    prob = solver.SolitaryWaveProblem(ilw(0.0), 1.5, solver.Nonlinearity.monomial(2, 0.5), "kdv_type", ref_grid)
    return solver.petviashvili_solve(prob)


@pytest.fixture(scope="session")
def cases():
    return {name: closedform.get_case(name) for name in closedform.list_cases()}


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
