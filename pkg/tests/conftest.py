import numpy as np
import pytest

from subgauss_ortho.expansion import KernelSpec, build_table
from subgauss_ortho.basis import BasisId
from subgauss_ortho.numerics import QuadSpec, TimeGrid


@pytest.fixture(scope="session")
def quad():
    return QuadSpec()


@pytest.fixture(scope="session")
def gauss_cos():
    return KernelSpec("gauss-cos")


@pytest.fixture(scope="session")
def hermite_table_small(gauss_cos, quad):
    """gauss-cos in the Hermite basis, orders 0..200 on 65 points of [0, 1]."""
    return build_table(gauss_cos, BasisId.HERMITE, 200, TimeGrid.uniform(1.0, 65), quad)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance_log():
    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES[number] = f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
