"""Shared rods and transforms; the expensive ones are built once per session."""

import numpy as np
import pytest

from rodknots.rod import build_rod, find_torus_rod


@pytest.fixture(scope="session")
def rod13_params():
    return find_torus_rod(1, 3)


@pytest.fixture(scope="session")
def rod25_params():
    return find_torus_rod(2, 5)


@pytest.fixture(scope="session")
def rod14_params():
    return find_torus_rod(1, 4)


@pytest.fixture(scope="session")
def rod13(rod13_params):
    # 4000 samples over the closing length
    return build_rod(1, 3, 1334, params=rod13_params)


@pytest.fixture(scope="session")
def rod25(rod25_params):
    return build_rod(2, 5, 800, params=rod25_params)


@pytest.fixture(scope="session")
def rod13_coarse(rod13_params):
    return build_rod(1, 3, 400, params=rod13_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    # acceptance report: one line per criterion that ran in this session
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines(done_only=True):
        terminalreporter.write_line(line)
