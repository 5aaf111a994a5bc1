import numpy as np
import pytest

from nclewis import Subspace, TracialAlgebra


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_subspace(rng, dims, n, weights=None):
    alg = TracialAlgebra(tuple(dims), weights)
    return Subspace(alg, [alg.random_op(rng) for _ in range(n)])


def corner_subspace(rng, m, r, n):
    """``n`` random elements of ``e M_m e`` with ``e`` the rank-``r`` diagonal projection."""
    alg = TracialAlgebra((m,))
    basis = []
    for _ in range(n):
        b = np.zeros((m, m), dtype=complex)
        b[:r, :r] = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
        basis.append(alg.op([b]))
    return Subspace(alg, basis)


def elementary(m, i, j):
    e = np.zeros((m, m))
    e[i, j] = 1.0
    return e


_SESSION = {}


def pytest_sessionstart(session):
    import time

    _SESSION["start"] = time.perf_counter()


def pytest_collection_modifyitems(session, config, items):
    # acceptance criteria run last so the timing criterion sees the whole session
    items.sort(key=lambda item: item.nodeid.startswith("tests/test_acceptance.py")
               or "test_acceptance.py" in item.nodeid.split("::")[0])


@pytest.fixture
def session_start():
    return _SESSION["start"]
