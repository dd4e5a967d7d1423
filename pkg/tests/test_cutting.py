import numpy as np
import pytest

from conftest import E1, E2, disc, rand_ellipse, rand_polytope
from ellipt import (INSIDE, OUTSIDE, QINSIDE, Ellipse, EllipticPolytope, cut_decide,
                    decide_ee_2d, decide_ee_3d, ee_norm, pe_norm_socp, separation_margin)
from ellipt.cutting import Arc, corner_point

DISC = EllipticPolytope((disc(),))


def test_corner_point_examples():
    assert np.allclose(corner_point(disc(), Arc(0, np.pi / 2, 1)), [1.0, 1.0])
    assert np.allclose(corner_point(Ellipse([2.0, 0.0], E2), Arc(0, np.pi / 2, 1)), [2.0, 1.0])
    with pytest.raises(ValueError):
        corner_point(disc(), Arc(0, np.pi, 0))


def test_arc_validation():
    with pytest.raises(ValueError):
        Arc(1.0, 0.5, 1)
    a, b = Arc(0, np.pi / 2, 1).halves()
    assert a.level == b.level == 2 and a.end == b.start


def test_pe_norm_examples():
    assert pe_norm_socp(np.array([0.5, 0.0]), DISC).hi == pytest.approx(0.5, abs=1e-7)
    assert pe_norm_socp(np.array([3.0, 4.0]), DISC).hi == pytest.approx(5.0, abs=1e-6)
    cross = EllipticPolytope((Ellipse.segment(E1), Ellipse.segment(E2)))
    br = pe_norm_socp(np.array([1.0, 1.0]), cross)
    assert br.lo <= 2.0 + 1e-6 and br.hi == pytest.approx(2.0, abs=1e-6)
    assert pe_norm_socp(np.zeros(2), DISC).hi == 0.0


def test_pe_norm_outside_span():
    p = EllipticPolytope((Ellipse.segment([1.0, 0.0, 0.0]),))
    br = pe_norm_socp(np.array([0.0, 0.0, 1.0]), p)
    assert not br.in_span and br.lo == np.inf


@pytest.mark.parametrize("seed", range(10))
def test_pe_norm_bracket_against_boundary(seed):
    # w on the boundary of P (a point where the support is attained) has norm 1
    rng = np.random.default_rng(seed)
    p = rand_polytope(rng, 3, 4)
    x = rng.standard_normal(3)
    k = int(np.argmax((p.A @ x) ** 2 + (p.B @ x) ** 2))
    e = p[k]
    t = np.arctan2(e.b @ x, e.a @ x)
    w = e.point(t)
    br = pe_norm_socp(w, p)
    assert br.lo - 1e-6 <= 1.0 <= br.hi + 1e-6
    assert br.hi == pytest.approx(1.0, abs=1e-6)


def test_half_disc_inside_immediately():
    assert cut_decide(disc(0.5), DISC).outcome == INSIDE
    # two thin ellipses, so no single member holds E0 and the loop runs
    p = EllipticPolytope((Ellipse(E1, 0.4 * E2), Ellipse(0.4 * E1, E2)))
    v = cut_decide(disc(0.5), p)
    assert v.outcome == INSIDE
    assert v.details["iterations"] == 0


def test_slightly_large_disc_outside():
    v = cut_decide(disc(1.01), DISC, q=0.9999)
    assert v.outcome == OUTSIDE
    assert separation_margin(disc(1.01), DISC, v.direction) > 0
    # the corner rule alone would need arcs of length pi/32
    assert 1 / np.cos(np.pi / 2 ** 4) > 1.01 > 1 / np.cos(np.pi / 2 ** 5)


def test_equal_disc_inside():
    assert cut_decide(disc(), DISC).outcome == INSIDE


def test_argument_checks():
    with pytest.raises(ValueError):
        cut_decide(disc(), DISC, q=1.0)
    with pytest.raises(ValueError):
        cut_decide(disc(), DISC, max_iter=0)


def _run(seed, d=None):
    rng = np.random.default_rng(seed)
    d = d or int(rng.integers(2, 4))
    p = rand_polytope(rng, d, int(rng.integers(2, 6)))
    e0 = rand_ellipse(rng, d, float(rng.uniform(0.3, 1.2)))
    return e0, p, cut_decide(e0, p, q=0.99)


@pytest.mark.parametrize("seed", range(25))
def test_nu_monotone_and_certified(seed):
    e0, p, v = _run(seed)
    hist = v.details.get("nu_history", [])
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
    for s, it in v.details.get("level_reached", {}).items():
        assert it <= 2 ** s - 1
    exact = decide_ee_2d if p.d == 2 else decide_ee_3d
    if v.outcome == OUTSIDE:
        assert separation_margin(e0, p, v.direction) > 0
        assert not exact(e0, p)
    elif v.outcome == INSIDE:
        assert exact(e0, p)
        t = np.random.default_rng(seed).uniform(0, np.pi, 60)
        assert all(pe_norm_socp(w, p).hi <= 1 + 1e-6 for w in e0.point(t))
    else:
        assert v.q >= 0.99


@pytest.mark.parametrize("seed", range(6))
def test_ee_norm_bracket(seed):
    rng = np.random.default_rng(400 + seed)
    p = rand_polytope(rng, 2, 3)
    e0 = rand_ellipse(rng, 2)
    br = ee_norm(e0, p, q=0.999)
    assert br.lo >= 0.999 * br.hi - 1e-9
    # scaling by the bracket ends flips the exact answer
    assert decide_ee_2d(e0.scaled(1 / (br.hi * (1 + 1e-6))), p)
    assert not decide_ee_2d(e0.scaled(1 / (br.lo * (1 - 1e-6))), p)
