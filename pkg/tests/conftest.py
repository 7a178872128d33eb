import math
import time

import numpy as np
import pytest

from twophoton.fock import find_crossings, scan_spectrum

MU3_KAPPA_STAR = 3 - 2 * math.sqrt(2)
MU3_E_STAR = 4 * math.sqrt(2) - 3

SCAN_GRID = np.linspace(0.02, 0.65, 400)

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


class Scans:
    """Full 400-point scans, computed once per mu and timed."""

    def __init__(self):
        self._cache = {}

    def get(self, mu):
        if mu not in self._cache:
            t0 = time.perf_counter()
            table = scan_spectrum(mu, SCAN_GRID, k=12, N=240)
            recs = find_crossings(table)
            self._cache[mu] = (table, recs, time.perf_counter() - t0)
        return self._cache[mu]


@pytest.fixture(scope="session")
def scans():
    return Scans()


@pytest.fixture(scope="session")
def mu3_table(scans):
    return scans.get(3.0)[0]


@pytest.fixture(scope="session")
def mu3_crossings(scans):
    return scans.get(3.0)[1]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
