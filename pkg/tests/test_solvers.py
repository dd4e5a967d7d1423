import numpy as np
import pytest
from scipy.optimize import linprog

from ellipt.solvers import (FREE, INFEASIBLE, NONNEG, SOC, UNBOUNDED, ConeProgram,
                            LinearProgram, SolverError, solve_lp, solve_socp)


def test_lp_single_bound():
    rep = solve_lp(LinearProgram([1.0], lb=[1.0]))
    assert rep.ok and rep.value == pytest.approx(1.0)


def test_lp_equality():
    rep = solve_lp(LinearProgram([1.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[2.0]))
    assert rep.ok and rep.value == pytest.approx(2.0)


def test_lp_square_membership():
    # w = (1,1) as a combination of the vertices (+-1,0), (0,+-1) with least total weight
    V = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    rep = solve_lp(LinearProgram(np.ones(4), A_eq=V.T, b_eq=[1.0, 1.0]))
    assert rep.ok and rep.value == pytest.approx(2.0)


def test_lp_infeasible_and_unbounded():
    rep = solve_lp(LinearProgram([1.0], A_eq=[[1.0]], b_eq=[-1.0]))
    assert rep.status == INFEASIBLE
    rep = solve_lp(LinearProgram([-1.0], A_ub=[[-1.0]], b_ub=[0.0]))
    assert rep.status == UNBOUNDED
    with pytest.raises(SolverError):
        rep.require_optimal()


def test_lp_rejects_bad_data():
    with pytest.raises(ValueError):
        LinearProgram([1.0, np.inf])
    with pytest.raises(ValueError):
        LinearProgram([1.0], lb=[2.0], ub=[1.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0, 1.0], A_eq=[[1.0]], b_eq=[1.0])


@pytest.mark.parametrize("seed", range(25))
def test_lp_agrees_with_scipy(seed):
    rng = np.random.default_rng(seed)
    n, meq, mub = 8, 3, 5
    x0 = rng.random(n)
    Aeq = rng.standard_normal((meq, n))
    Aub = rng.standard_normal((mub, n))
    beq = Aeq @ x0
    bub = Aub @ x0 + rng.random(mub)
    c = rng.standard_normal(n)
    lb = np.where(rng.random(n) < 0.3, -np.inf, 0.0)
    ub = np.where(rng.random(n) < 0.5, 2.0, np.inf)
    ref = linprog(c, A_ub=Aub, b_ub=bub, A_eq=Aeq, b_eq=beq,
                  bounds=list(zip(np.where(np.isinf(lb), None, lb), np.where(np.isinf(ub), None, ub))),
                  method="highs")
    rep = solve_lp(LinearProgram(c, Aeq, beq, Aub, bub, lb, ub))
    if ref.status == 0:
        assert rep.ok
        assert rep.value == pytest.approx(ref.fun, abs=1e-7)
        x = rep.x
        assert np.allclose(Aeq @ x, beq, atol=1e-7)
        assert np.all(Aub @ x <= bub + 1e-7)
    elif ref.status == 3:
        assert rep.status == UNBOUNDED


def test_lp_deterministic():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((4, 9))
    lp = LinearProgram(rng.random(9), A, A @ rng.random(9))
    r1, r2 = solve_lp(lp), solve_lp(lp)
    assert np.array_equal(r1.x, r2.x) and r1.value == r2.value


def test_socp_min_radius():
    # variables (r, c, s) in one Lorentz cone, c = 1
    cp = ConeProgram([1.0, 0.0, 0.0], [[0.0, 1.0, 0.0]], [1.0], [(SOC, 3)])
    rep = solve_socp(cp)
    assert rep.ok and rep.value == pytest.approx(1.0, abs=1e-6)


def test_socp_disc_norm():
    # min r s.t. c e1 + s e2 = w, ||(c, s)|| <= r
    cp = ConeProgram([1.0, 0.0, 0.0], [[0, 1, 0], [0, 0, 1]], [0.5, 0.0], [(SOC, 3)])
    rep = solve_socp(cp)
    assert rep.ok and rep.value == pytest.approx(0.5, abs=1e-6)


def _random_socp(seed, k=4, m=5):
    # strictly feasible primal (x0 interior) and dual (z0 interior) by construction
    rng = np.random.default_rng(seed)
    sizes = [3] * k
    n = sum(sizes) + 2
    cones = [(SOC, s) for s in sizes] + [(NONNEG, 2)]
    A = rng.standard_normal((m, n))

    def interior():
        parts = []
        for s in sizes:
            t = rng.standard_normal(s - 1)
            parts.append(np.concatenate([[np.linalg.norm(t) + 1.0], t]))
        parts.append(rng.random(2) + 0.5)
        return np.concatenate(parts)

    x0, z0 = interior(), interior()
    y0 = rng.standard_normal(m)
    return ConeProgram(A.T @ y0 + z0, A, A @ x0, cones)


@pytest.mark.parametrize("seed", range(8))
def test_socp_gap_and_weak_duality(seed):
    cp = _random_socp(seed)
    rep = solve_socp(cp)
    assert rep.ok
    assert abs(rep.gap) <= 1e-6 * (1 + abs(rep.value))
    assert rep.dual_value <= rep.value + 1e-6 * (1 + abs(rep.value))
    assert np.allclose(cp.A @ rep.x, cp.b, atol=1e-6 * (1 + np.linalg.norm(cp.b)))
    off = 0
    for kind, size in cp.cones:
        blk = rep.x[off:off + size]
        if kind == SOC:
            assert np.linalg.norm(blk[1:]) <= blk[0] + 1e-6
        elif kind == NONNEG:
            assert np.all(blk >= -1e-6)
        off += size


def test_socp_deterministic():
    cp = _random_socp(11)
    r1, r2 = solve_socp(cp), solve_socp(cp)
    assert np.array_equal(r1.x, r2.x) and r1.value == r2.value


@pytest.mark.parametrize("seed", range(6))
def test_lp_and_socp_agree_without_cones(seed):
    rng = np.random.default_rng(100 + seed)
    n, m = 7, 3
    A = rng.standard_normal((m, n))
    b = A @ (rng.random(n) + 0.1)
    c = rng.random(n) + 0.1
    lp = solve_lp(LinearProgram(c, A, b))
    cp = solve_socp(ConeProgram(c, A, b, [(NONNEG, n)]))
    assert lp.ok and cp.ok
    # the cone solver stops on a relative gap of 1e-6
    assert cp.value == pytest.approx(lp.value, abs=1e-6 * (1 + abs(lp.value)))


def test_socp_free_block():
    # min x1 over free x0 with x0 - x1 = -1, x1 >= 0  ->  0
    cp = ConeProgram([0.0, 1.0], [[1.0, -1.0]], [-1.0], [(FREE, 1), (NONNEG, 1)])
    rep = solve_socp(cp)
    assert rep.ok and rep.value == pytest.approx(0.0, abs=1e-6)


def test_cone_program_validation():
    with pytest.raises(ValueError):
        ConeProgram([1.0], [[1.0]], [1.0], [(SOC, 1)])
    with pytest.raises(ValueError):
        ConeProgram([1.0, 1.0], [[1.0, 1.0]], [1.0], [(NONNEG, 1)])
    with pytest.raises(ValueError):
        ConeProgram([1.0], [[1.0]], [1.0], [("psd", 1)])
