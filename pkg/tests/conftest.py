import numpy as np
import pytest

from ellipt import Ellipse, EllipticPolytope

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


def disc(r=1.0):
    return Ellipse(r * E1, r * E2)


def swapped_disc():
    return Ellipse(E2, E1)


def rand_ellipse(rng, d, scale=1.0):
    return Ellipse(scale * rng.standard_normal(d), scale * rng.standard_normal(d))


def rand_polytope(rng, d, N):
    return EllipticPolytope(tuple(rand_ellipse(rng, d) for _ in range(N)))


def grid_margin(e0, p, n=100_000):
    """Largest separation margin over a fine half-circle grid (d = 2)."""
    t = np.linspace(0.0, np.pi, n, endpoint=False)
    X = np.column_stack([np.cos(t), np.sin(t)])
    h0 = (X @ e0.a) ** 2 + (X @ e0.b) ** 2
    hp = np.max((X @ p.A.T) ** 2 + (X @ p.B.T) ** 2, axis=1)
    return float(np.max(h0 - hp))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
