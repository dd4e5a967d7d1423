import numpy as np
import pytest

from conftest import E1, E2, disc, grid_margin, rand_ellipse, rand_polytope, swapped_disc
from ellipt import (DimensionError, Ellipse, EllipticPolytope, decide_ee_2d, decide_ee_3d,
                    exact_separator, separation_margin)
from ellipt.geometry import fibonacci_sphere

I3 = np.eye(3)
CROSS3 = EllipticPolytope((Ellipse(I3[0], I3[1]), Ellipse(I3[1], I3[2]), Ellipse(I3[0], I3[2])))


def test_2d_examples():
    P = EllipticPolytope((disc(),))
    assert decide_ee_2d(disc(0.5), P)
    assert not decide_ee_2d(Ellipse([1.5, 0.0], [0.0, 0.0]), P)
    assert decide_ee_2d(disc(), EllipticPolytope((swapped_disc(),)))


def test_3d_examples():
    assert decide_ee_3d(Ellipse(0.5 * I3[0], 0.5 * I3[1]), CROSS3)
    # grid oracle finds no separating direction either
    X = fibonacci_sphere(10_000)
    e0 = Ellipse(0.5 * I3[0], 0.5 * I3[1])
    h0 = (X @ e0.a) ** 2 + (X @ e0.b) ** 2
    hp = np.max((X @ CROSS3.A.T) ** 2 + (X @ CROSS3.B.T) ** 2, axis=1)
    assert np.all(h0 <= hp + 1e-12)
    assert not decide_ee_3d(Ellipse.segment(2 * I3[2]), CROSS3)
    assert decide_ee_3d(CROSS3[1], CROSS3)


def test_dimension_checks():
    with pytest.raises(DimensionError):
        decide_ee_2d(Ellipse(I3[0], I3[1]), CROSS3)
    with pytest.raises(DimensionError):
        decide_ee_3d(disc(), EllipticPolytope((disc(),)))


def test_separator_is_certified(rng):
    for _ in range(30):
        d = int(rng.integers(2, 4))
        p = rand_polytope(rng, d, 3)
        e0 = rand_ellipse(rng, d, 1.5)
        x = exact_separator(e0, p)
        if x is not None:
            assert separation_margin(e0, p, x) > 0


@pytest.mark.parametrize("seed", range(40))
def test_2d_against_grid(seed):
    rng = np.random.default_rng(seed)
    p = rand_polytope(rng, 2, int(rng.integers(1, 6)))
    e0 = rand_ellipse(rng, 2)
    m = grid_margin(e0, p)
    if abs(m) < 1e-6:
        pytest.skip("too close to the boundary for the grid")
    assert decide_ee_2d(e0, p) == (m < 0)


@pytest.mark.parametrize("seed", range(10))
def test_shrink_monotone(seed):
    rng = np.random.default_rng(seed)
    d = 2 + seed % 2
    p = rand_polytope(rng, d, 4)
    e0 = rand_ellipse(rng, d, 0.3)
    dec = decide_ee_2d if d == 2 else decide_ee_3d
    if dec(e0, p):
        for lam in (0.9, 0.5, 0.1):
            assert dec(e0.scaled(lam), p)


def test_vertical_slope_case():
    # separation only along x = 0 in slope coordinates
    p = EllipticPolytope((Ellipse([1.0, 0.0], [0.0, 0.5]),))
    assert not decide_ee_2d(Ellipse([0.0, 0.6], [0.0, 0.0]), p)
    assert decide_ee_2d(Ellipse([0.0, 0.5], [0.0, 0.0]), p)


def test_3d_equator_solution():
    # separating directions only with z = 0; needs the other charts
    p = EllipticPolytope((Ellipse(I3[0], I3[2]), Ellipse(I3[1], I3[2])))
    e0 = Ellipse(0.8 * I3[0], 0.8 * I3[1])
    assert not decide_ee_3d(e0, p)
    assert decide_ee_3d(Ellipse(0.7 * I3[0], 0.7 * I3[1]), p)
