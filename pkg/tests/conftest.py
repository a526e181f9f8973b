import functools

import numpy as np
import pytest

from lorentzfd.domain_carver import carve
from lorentzfd.groups import lifted_group, orbit_enumerate

ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def carved(signature, offsets=(0, 0, 0), vertex="auto", eps=0.1):
    group = lifted_group(signature, offsets, vertex)
    return carve(orbit_enumerate(group, eps))


@pytest.fixture(scope="session")
def e12():
    return carved((2, 3, 7))


@pytest.fixture(scope="session")
def e18():
    return carved((3, 3, 5), (-1, -1, -1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def record():
    """Store one acceptance line: ``record(criterion, ok, detail)``."""
    def _record(key, ok, detail):
        ACCEPTANCE[key] = (bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
