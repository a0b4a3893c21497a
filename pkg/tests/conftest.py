import numpy as np
import pytest

from locc.states import BipartiteState

_ACCEPTANCE: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20021)


@pytest.fixture
def bell():
    return BipartiteState.from_schmidt([0.5, 0.5])


@pytest.fixture
def skewed():
    """State with squared Schmidt coefficients (0.8, 0.2)."""
    return BipartiteState.from_schmidt([0.8, 0.2])


@pytest.fixture
def acceptance_log():
    def record(criterion: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f": {detail}" if detail else "")
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


def random_matrix(rng, rows, cols, rank=None):
    g = lambda r, c: rng.standard_normal((r, c)) + 1j * rng.standard_normal((r, c))
    if rank is None:
        return g(rows, cols)
    return g(rows, rank) @ g(rank, cols)


def random_contraction(rng, rows, cols):
    m = random_matrix(rng, rows, cols)
    return m / (np.linalg.norm(m, 2) * rng.uniform(1.0, 2.0))


def random_doubly_stochastic(rng, n, terms):
    w = rng.dirichlet(np.ones(terms))
    return sum(wi * np.eye(n)[rng.permutation(n)] for wi in w)


def random_majorized_pair(rng, n):
    """``(x, y)`` with ``x`` majorized by ``y``: ``x = D y`` for random doubly stochastic ``D``."""
    y = np.sort(rng.dirichlet(np.ones(n) * rng.uniform(0.2, 2.0)))[::-1]
    d = random_doubly_stochastic(rng, n, int(rng.integers(1, 2 * n)))
    x = np.sort(d @ y)[::-1]
    return x, y
