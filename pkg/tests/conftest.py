from pathlib import Path

import numpy as np
import pytest

from metallic_geom import fixtures

SPECS = Path(__file__).resolve().parents[1] / "src" / "metallic_geom" / "specs"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture
def fx():
    return fixtures.get


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
