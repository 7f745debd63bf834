from functools import lru_cache

import numpy as np
import pytest

from hitchin_lab.limit_curve import sample_curve
from hitchin_lab.representations import bend, compose_irreducible, fuchsian_genus2


@lru_cache(maxsize=None)
def base():
    return fuchsian_genus2()


@lru_cache(maxsize=None)
def rep(n, tau=0.0):
    r = compose_irreducible(n, base())
    return bend(r, [tau] * (n - 1)) if tau else r


@lru_cache(maxsize=None)
def samples(n, tau=0.0, radius=5):
    return tuple(sample_curve(rep(n, tau), base(), radius))


def random_sl2(rng):
    m = rng.standard_normal((2, 2))
    if np.linalg.det(m) < 0:
        m[:, 0] = -m[:, 0]
    return m / np.sqrt(np.linalg.det(m))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
