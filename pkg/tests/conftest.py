import numpy as np
import pytest

from fastmm.ring import mpq


def rational_matrix(rows, cols, seed, den=7):
    """Seeded exact-rational matrix with small numerators and denominators."""
    rng = np.random.default_rng(seed)
    num = rng.integers(-9, 10, size=(rows, cols))
    dd = rng.integers(1, den + 1, size=(rows, cols))
    out = np.empty((rows, cols), dtype=object)
    for idx in np.ndindex(rows, cols):
        out[idx] = mpq(int(num[idx]), int(dd[idx]))
    return out


def exact_equal(X, Y):
    X, Y = np.asarray(X, dtype=object), np.asarray(Y, dtype=object)
    return X.shape == Y.shape and all(x == y for x, y in zip(X.ravel(), Y.ravel()))


@pytest.fixture
def rmat():
    return rational_matrix


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
