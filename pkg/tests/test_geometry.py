import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E1, E2, disc, rand_ellipse, swapped_disc
from ellipt import DimensionError, Ellipse, EllipticPolytope, separation_margin, support
from ellipt.geometry import (ComplexVertexSet, conjugate_closure, contained_in_single,
                             dump_ellipse_set, elliptic_rotate, polytope_from_json,
                             same_ellipse)

finite = st.floats(-10, 10, allow_nan=False)
vec2 = st.lists(finite, min_size=2, max_size=2).map(np.array)
vec3 = st.lists(finite, min_size=3, max_size=3).map(np.array)


def test_support_examples():
    assert support(Ellipse([3.0, 4.0], [0.0, 0.0]), [3.0, 4.0]) == pytest.approx(25.0)
    assert support(Ellipse([3.0, 0.0], [0.0, 4.0]), [1.0, 0.0]) == pytest.approx(3.0)
    assert support(Ellipse([2.0, 0.0], [0.0, 0.0]), [0.0, 1.0]) == 0.0
    assert support(Ellipse([2.0, 0.0], [0.0, 1.0]), [1.0, 1.0]) == pytest.approx(np.sqrt(5))


def test_support_dimension_mismatch():
    with pytest.raises(DimensionError):
        support(disc(), [1.0, 0.0, 0.0])


def test_support_matches_boundary_sampling(rng):
    e = rand_ellipse(rng, 4)
    t = np.linspace(0, 2 * np.pi, 20001)
    pts = e.point(t)
    for _ in range(5):
        x = rng.standard_normal(4)
        assert support(e, x) == pytest.approx(np.max(pts @ x), rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, vec3, st.floats(0, 50))
def test_support_homogeneous(a, b, x, lam):
    e = Ellipse(a, b)
    assert support(e, lam * x) == pytest.approx(lam * support(e, x), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, vec3, st.floats(-10, 10))
def test_rotation_keeps_support(a, b, x, s):
    e = Ellipse(a, b)
    scale = 1.0 + np.linalg.norm(a) + np.linalg.norm(b)
    assert support(elliptic_rotate(e, s), x) == pytest.approx(
        support(e, x), abs=1e-10 * scale * (1 + np.linalg.norm(x)))


@settings(max_examples=40, deadline=None)
@given(vec2, vec2, vec2)
def test_radius_exchange(a, b, x):
    assert support(Ellipse(a, b), x) == pytest.approx(support(Ellipse(b, a), x), abs=1e-12)


def test_rotate_examples():
    e = Ellipse([2.0, 0.0], [0.0, 1.0])
    r0 = elliptic_rotate(e, 0.0)
    assert np.allclose(r0.a, e.a) and np.allclose(r0.b, e.b)
    r = elliptic_rotate(e, np.pi / 4)
    assert np.allclose(r.a, [np.sqrt(2), np.sqrt(2) / 2])
    t = np.linspace(0, 2 * np.pi, 360, endpoint=False)
    X = np.column_stack([np.cos(t), np.sin(t)])
    assert np.allclose([support(r, x) for x in X], [support(e, x) for x in X], atol=1e-12)
    r90 = elliptic_rotate(disc(), np.pi / 2)
    assert np.allclose(r90.a, E2) and np.allclose(r90.b, -E1)
    assert same_ellipse(r90, disc())
    t = 0.37
    assert np.allclose(r.point(t), e.point(t + np.pi / 4))


def test_separation_margin_examples():
    x = np.array([0.3, -0.7])
    assert separation_margin(disc(), EllipticPolytope((disc(),)), x) == pytest.approx(0.0)
    seg = Ellipse([1.5, 0.0], [0.0, 0.0])
    assert separation_margin(seg, EllipticPolytope((disc(),)), E1) == pytest.approx(1.25)
    assert separation_margin(disc(0.5), EllipticPolytope((disc(),)), E2) == pytest.approx(-0.75)


def test_separation_margin_dimension_mismatch():
    with pytest.raises(DimensionError):
        separation_margin(Ellipse([1, 0, 0], [0, 1, 0]), EllipticPolytope((disc(),)), E1)


def test_conjugate_closure_examples():
    v = np.array([1.0, 1j])
    out = conjugate_closure(ComplexVertexSet((v,)))
    assert out.self_conjugate and len(out) == 2
    assert any(np.allclose(u, np.conj(v)) for u in out.vertices)
    again = conjugate_closure(out)
    assert len(again) == 2
    real = conjugate_closure(ComplexVertexSet((np.array([1.0, 2.0]),)))
    assert len(real) == 1


def test_same_ellipse_criteria():
    assert same_ellipse(disc(), swapped_disc())
    assert same_ellipse(Ellipse([1, 2, 3], [0, 1, 0]), Ellipse([1, 2, 3], [0, -1, 0]))
    assert not same_ellipse(disc(), disc(1.01))
    # parallel radii give a segment; other parametrisations of it match too
    assert same_ellipse(Ellipse([3.0, 0.0], [4.0, 0.0]), Ellipse.segment([5.0, 0.0]))


def test_degenerate_reduction():
    e = Ellipse([3.0, 0.0], [4.0, 0.0])
    assert e.is_degenerate()
    r = e.reduced()
    assert np.allclose(r.a, [5.0, 0.0]) and not r.b.any()
    assert not disc().is_degenerate()


def test_contained_in_single():
    assert contained_in_single(disc(0.5), disc())
    assert contained_in_single(swapped_disc(), disc())
    assert not contained_in_single(disc(1.01), disc())
    assert contained_in_single(Ellipse.segment([0.6, 0.8]), disc())


def test_polytope_validation():
    with pytest.raises(ValueError):
        EllipticPolytope(())
    with pytest.raises(DimensionError):
        EllipticPolytope((disc(), Ellipse([1, 0, 0], [0, 1, 0])))
    with pytest.raises(DimensionError):
        Ellipse([1.0, 0.0], [1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        Ellipse([np.nan, 0.0], [0.0, 1.0])


def test_json_roundtrip():
    p = EllipticPolytope((disc(), Ellipse([1.0, 2.0], [0.0, 0.5])))
    obj = json.loads(json.dumps(dump_ellipse_set(p, target=disc(0.5))))
    q = polytope_from_json(obj)
    assert q.N == 2 and np.allclose(q.A, p.A) and np.allclose(q.B, p.B)
    with pytest.raises(DimensionError):
        polytope_from_json({"dim": 3, "ellipses": [{"a": [1, 0], "b": [0, 1]}]})
