import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

from dualconn.params import NetworkParams  # noqa: E402

# first calls compile numba kernels and build quadrature caches
settings.register_profile("default", deadline=None)
settings.load_profile("default")

_ACCEPTANCE = {}


def record_criterion(number, title, passed, detail):
    _ACCEPTANCE[number] = (title, bool(passed), detail)


@pytest.fixture
def criterion():
    return record_criterion


@pytest.fixture(scope="session")
def ref_params():
    return NetworkParams.reference(5.0)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number:>2}. {title}: {detail}")
