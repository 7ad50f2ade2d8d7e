import pathlib

import gmpy2
import pytest
from hypothesis import settings

DATA = pathlib.Path(__file__).parent / "data"
DESK_CACHE = DATA / "oracle_desk_grid.csv"

settings.register_profile("ksone", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("ksone")


@pytest.fixture(autouse=True)
def _mpfr_context():
    # keep any test that tweaks the MPFR context from leaking into others
    with gmpy2.context(gmpy2.get_context(), precision=300):
        yield


@pytest.fixture(scope="session")
def desk_cache_path():
    return DESK_CACHE


_CRITERIA = {}


@pytest.fixture(scope="session")
def criterion_log():
    """Record one summary line per acceptance criterion."""

    def log(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)

    return log


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
