from __future__ import annotations

import time

import numpy as np
import pytest

from vortex_holonomy.core import Strengths
from vortex_holonomy.reduced3 import ReducedContext
from vortex_holonomy.survey import orbits_at_energy

TABLE_STRENGTHS = (7.615, -3.46, -3.155)
TABLE_MU = 1.0
TABLE_ENERGIES = (-11.9764, -10.1509, -9.2487, -7.45, -6.1434, -5.2727)

# label: (energy, theta_g, period, theta_d, theta_tot)
TABLE_ROWS = {
    "a": (-11.9764, 6.1127, 0.0828, 0.26, 0.0895),
    "b": (-10.1509, 5.8607, 0.2201, 0.6912, 0.2687),
    "c": (-9.2487, 4.8855, 0.675, 2.1195, 0.7218),
    "d": (-7.45, 3.5096, 0.9527, 2.9913, 0.2177),
    "e": (-6.1434, 1.9882, 1.4105, 4.4289, 0.1339),
    "f": (-7.45, 0.0094, 0.0107, 0.0337, 0.0431),
    "g": (-9.2487, 0.0828, 0.1346, 0.4227, 0.5054),
    "h": (-11.9764, -0.1214, 0.0646, 0.2027, 0.0813),
    "i": (-10.1509, -0.328, 0.1875, 0.5888, 0.2608),
    "j": (-5.2727, 0.5784, 1.8485, 5.8041, 0.0993),
}

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def table_strengths() -> Strengths:
    return Strengths(TABLE_STRENGTHS)


@pytest.fixture(scope="session")
def table_ctx(table_strengths) -> ReducedContext:
    return ReducedContext.build(table_strengths, TABLE_MU, 3)


@pytest.fixture(scope="session")
def table_survey(table_ctx):
    """Closed orbits at every tabulated energy, plus the wall time of the survey."""
    t0 = time.perf_counter()
    found = {e: orbits_at_energy(table_ctx, e) for e in TABLE_ENERGIES}
    return found, time.perf_counter() - t0


@pytest.fixture(scope="session")
def table_matches(table_survey):
    """Tabulated label -> the detected orbit at the same energy with the nearest period."""
    found, _ = table_survey
    out = {}
    for label, (energy, _, period, _, _) in TABLE_ROWS.items():
        cands = [f.orbit for f in found[energy]]
        if cands:
            out[label] = min(cands, key=lambda o: abs(o.period - period) / period)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
