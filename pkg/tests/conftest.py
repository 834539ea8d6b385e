import numpy as np
import pytest

from coordsketch import SparseMatrix, available_backends, using_backend


def random_sparse(rng, n, d, density=0.5, zero_rows=()):
    dense = rng.standard_normal((n, d))
    dense[rng.random((n, d)) >= density] = 0.0
    for r in zero_rows:
        dense[r] = 0.0
    return SparseMatrix.from_dense(dense)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=available_backends())
def backend(request):
    with using_backend(request.param):
        yield request.param


# -- acceptance summary -----------------------------------------------------

ACCEPTANCE_LINES = []


def record_criterion(number, name, passed, detail):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {name} :: {detail}")


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
