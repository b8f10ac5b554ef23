"""Exact simplex and vertex enumeration against independent oracles."""

import random
from fractions import Fraction as F

import pytest
from sympy import Rational, symbols
from sympy.solvers.simplex import lpmax

from schreier.lp import mat_rank, polytope_vertices, solve_lp, solve_linear


def test_mat_rank():
    assert mat_rank([]) == 0
    assert mat_rank([[F(0), F(0)]]) == 0
    assert mat_rank([[F(1), F(2)], [F(2), F(4)]]) == 1
    assert mat_rank([[F(1), F(0)], [F(0), F(1)]]) == 2


def test_solve_linear():
    sol = solve_linear([[F(1), F(1)], [F(1), F(-1)]], [F(3), F(1)])
    assert sol == [F(2), F(1)]
    assert solve_linear([[F(1), F(1)], [F(2), F(2)]], [F(1), F(3)]) is None


def test_lp_known_optimum_with_duals():
    # max 2x + y on the unit square
    res = solve_lp([F(2), F(1)],
                   a_ub=[[F(1), F(0)], [F(0), F(1)], [F(-1), F(0)], [F(0), F(-1)]],
                   b_ub=[F(1), F(1), F(0), F(0)])
    assert res.status == "optimal"
    assert res.value == F(3)
    assert list(res.x) == [F(1), F(1)]
    # strong duality: b . y == value, y >= 0
    assert sum(b * y for b, y in zip([F(1), F(1), F(0), F(0)], res.dual_ub)) == F(3)
    assert all(y >= 0 for y in res.dual_ub)


def test_lp_equality_constraints():
    # min x - y subject to x + 2y <= 3, x == 1/2, y >= 0
    res = solve_lp([F(1), F(-1)],
                   a_ub=[[F(1), F(2)], [F(0), F(-1)]],
                   b_ub=[F(3), F(0)],
                   a_eq=[[F(1), F(0)]],
                   b_eq=[F(1, 2)],
                   sense="min")
    assert res.status == "optimal"
    assert res.value == F(-3, 4)
    assert list(res.x) == [F(1, 2), F(5, 4)]


def test_lp_infeasible_and_unbounded():
    bad = solve_lp([F(1)], a_ub=[[F(1)], [F(-1)]], b_ub=[F(-2), F(-2)])
    assert bad.status == "infeasible"
    free = solve_lp([F(1)], a_ub=[[F(-1)]], b_ub=[F(0)])
    assert free.status == "unbounded"


def test_lp_matches_sympy_on_random_instances():
    rng = random.Random(20240817)
    sym = symbols("v0 v1 v2", real=True)
    for trial in range(40):
        n = rng.randint(1, 3)
        m = rng.randint(1, 4)
        c = [F(rng.randint(-4, 4)) for _ in range(n)]
        rows = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
        rhs = [F(rng.randint(0, 5)) for _ in range(m)]
        # bound the box so every instance is bounded and feasible at 0
        for k in range(n):
            for s in (1, -1):
                row = [F(0)] * n
                row[k] = F(s)
                rows.append(row)
                rhs.append(F(6))
        res = solve_lp(c, a_ub=rows, b_ub=rhs)
        assert res.status == "optimal"
        expr = sum(int(ci) * sym[k] for k, ci in enumerate(c))
        cons = []
        for row, b in zip(rows, rhs):
            cons.append(
                sum(Rational(int(a.numerator), int(a.denominator)) * sym[k]
                    for k, a in enumerate(row[:n])) <= Rational(int(b)))
        val, _ = lpmax(expr, cons)
        assert Rational(res.value.numerator, res.value.denominator) == val
        # duality audit on every instance
        assert all(y >= 0 for y in res.dual_ub)
        assert sum(b * y for b, y in zip(rhs, res.dual_ub)) == res.value
        for k in range(n):
            lhs = sum(rows[i][k] * res.dual_ub[i] for i in range(len(rows)))
            assert lhs == c[k]


def test_vertices_of_square():
    hs = []
    for k in range(2):
        for s in (1, -1):
            row = [F(0), F(0)]
            row[k] = F(s)
            hs.append((row, F(1)))
    verts = polytope_vertices(hs, 2)
    assert verts == sorted([(F(1), F(1)), (F(1), F(-1)), (F(-1), F(1)), (F(-1), F(-1))])


def test_vertices_of_cross_polytope():
    hs = [(([F(a), F(b)]), F(1)) for a in (1, -1) for b in (1, -1)]
    verts = polytope_vertices(hs, 2)
    expect = sorted([(F(1), F(0)), (F(-1), F(0)), (F(0), F(1)), (F(0), F(-1))])
    assert verts == expect


def test_vertices_of_clipped_simplex_3d():
    # x,y,z >= 0, x+y+z <= 1
    hs = [([F(-1), F(0), F(0)], F(0)),
          ([F(0), F(-1), F(0)], F(0)),
          ([F(0), F(0), F(-1)], F(0)),
          ([F(1), F(1), F(1)], F(1))]
    verts = polytope_vertices(hs, 3)
    expect = sorted([(F(0), F(0), F(0)), (F(1), F(0), F(0)),
                     (F(0), F(1), F(0)), (F(0), F(0), F(1))])
    assert verts == expect


def test_vertices_satisfy_all_halfspaces_and_have_full_tight_rank():
    rng = random.Random(99)
    for trial in range(10):
        dim = rng.randint(2, 3)
        hs = []
        for _ in range(rng.randint(3, 6)):
            nrm = [F(rng.randint(-2, 2)) for _ in range(dim)]
            if all(v == 0 for v in nrm):
                continue
            hs.append((nrm, F(rng.randint(1, 3))))
        verts = polytope_vertices(hs, dim, box=2)
        for v in verts:
            tight = []
            for nrm, b in hs + _box_halfspaces(dim, 2):
                val = sum(a * x for a, x in zip(nrm, v))
                assert val <= b
                if val == b:
                    tight.append(nrm)
            assert mat_rank(tight) == dim


def _box_halfspaces(dim, box):
    out = []
    for k in range(dim):
        for s in (1, -1):
            row = [F(0)] * dim
            row[k] = F(s)
            out.append((row, F(box)))
    return out
