import numpy as np
import pytest

from conftest import disc, rand_ellipse, rand_polytope, swapped_disc
from ellipt import (INSIDE, EllipticPolytope, assemble_wlin, build_lifted_polygon, choose_level,
                    decide_ee_2d, pe_norm_lp, pe_norm_socp, proj_decide)
from ellipt.projection import polygon_factor

DISC = EllipticPolytope((disc(),))


def _polygon_support(n, u):
    t = 2 * np.pi * np.arange(2 ** n) / 2 ** n
    return np.max(np.cos(t) * u[0] + np.sin(t) * u[1])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_lifted_polygon_is_regular(n):
    sysn = build_lifted_polygon(n)
    assert sysn.n_vars == 2 * n + 3
    assert sysn.n_constraints == 3 * n + 3
    for th in np.linspace(0, 2 * np.pi, 17):
        u = np.array([np.cos(th), np.sin(th)])
        assert sysn.support(u) == pytest.approx(_polygon_support(n, u), abs=1e-9)


def test_square_and_octagon():
    sq = build_lifted_polygon(2)
    assert sq.support([1.0, 0.0]) == pytest.approx(1.0)
    assert sq.support([1.0, 1.0]) == pytest.approx(1.0)
    oc = build_lifted_polygon(3)
    inr = oc.support([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    assert inr == pytest.approx(np.cos(np.pi / 8), abs=1e-9)
    assert round(inr, 4) == 0.9239 and int(inr * 1e4) / 1e4 == 0.9238


def test_level_one_rejected():
    with pytest.raises(ValueError):
        build_lifted_polygon(1)
    with pytest.raises(ValueError):
        pe_norm_lp(np.ones(2), DISC, 1)


def test_pe_norm_lp_examples():
    br = pe_norm_lp(np.array([0.5, 0.0]), DISC, 8)
    assert 0.5 - 1e-9 <= br.hi <= 0.5 / 0.9999
    assert br.contains(0.5, 1e-9)
    assert pe_norm_lp(np.array([1.0, 0.0]), DISC, 3).hi == pytest.approx(1.0, abs=1e-8)
    w = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)])
    assert pe_norm_lp(w, DISC, 3).hi == pytest.approx(1 / np.cos(np.pi / 8), abs=1e-8)


def test_choose_level():
    assert choose_level(0.99) == 5
    assert polygon_factor(6) == pytest.approx(0.9987, abs=1e-4)
    assert polygon_factor(6) ** 2 >= 0.99
    with pytest.raises(ValueError):
        choose_level(1.0)


@pytest.mark.parametrize("seed", range(12))
def test_sandwich_and_refinement(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 7))
    p = rand_polytope(rng, d, int(rng.integers(d, 9)))
    w = rng.standard_normal(d)
    v = pe_norm_socp(w, p).hi
    prev = np.inf
    for n in range(3, 7):
        r = pe_norm_lp(w, p, n).hi
        assert r * np.cos(np.pi / 2 ** n) - 1e-6 <= v <= r + 1e-6
        assert r <= prev + 1e-9
        prev = r


@pytest.mark.parametrize("seed", range(8))
def test_size_accounting(seed):
    rng = np.random.default_rng(seed)
    d, N, n = int(rng.integers(2, 9)), int(rng.integers(1, 12)), int(rng.integers(2, 9))
    p = rand_polytope(rng, d, N)
    lp = assemble_wlin(rng.standard_normal(d), p, n)
    assert lp.n_vars == (2 * n + 3) * N
    assert lp.n_constraints == (3 * n + 4) * N + d + 1
    assert lp.nnz <= (12 * n + 2 * d + 7) * N + d


def test_proj_decide_examples(rng):
    p = rand_polytope(rng, 3, 4)
    for n in (2, 4):
        assert proj_decide(p[1], p, n=n).outcome == INSIDE
    v = proj_decide(disc(), EllipticPolytope((swapped_disc(),)), q=0.99, n=6)
    assert v.outcome == INSIDE
    assert decide_ee_2d(disc(), EllipticPolytope((swapped_disc(),)))
    assert v.details["polygon_factor"] == pytest.approx(np.cos(np.pi / 64))


@pytest.mark.parametrize("seed", range(6))
def test_proj_decide_certified_factor(seed):
    rng = np.random.default_rng(80 + seed)
    p = rand_polytope(rng, 2, 3)
    e0 = rand_ellipse(rng, 2, 0.8)
    v = proj_decide(e0, p, q=0.99)
    inside = decide_ee_2d(e0, p)
    if v.outcome == INSIDE:
        assert inside
    elif v.outcome == "Outside":
        assert not inside
    else:
        assert v.q >= 0.99 and decide_ee_2d(e0.scaled(v.q * (1 - 1e-6)), p)
