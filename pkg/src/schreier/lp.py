"""Exact linear programming and polytope vertex enumeration over Fractions.

The norms here are polyhedral, so every optimization this package needs
(dual norms, operator norms, minimum-norm preimages) reduces to small exact
linear programs.  The simplex below runs entirely in rational arithmetic
with Bland's rule, so it terminates and never rounds.  It also returns dual
multipliers, which downstream code turns into independently checkable
optimality certificates (a nonnegative combination of constraint rows that
reproduces the objective).

Vertex enumeration is incremental double description: start from a bounding
box, add one halfspace at a time, and cut edges found by an exact rank test
on common tight constraints.  It is meant for desk dimensions (<= 6 or so).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Row = tuple[Fraction, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# dense exact linear algebra helpers

def mat_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a small dense rational matrix by Gaussian elimination."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    col = 0
    while rank < len(m) and col < ncols:
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [v * inv for v in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        col += 1
    return rank


def solve_linear(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve a consistent square-or-rectangular system exactly.

    Returns one particular solution (free variables set to 0), or None when
    the system is inconsistent.
    """
    m = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    nrows = len(m)
    ncols = len(rows[0]) if nrows else 0
    pivots: list[tuple[int, int]] = []
    rank = 0
    for col in range(ncols):
        piv = next((r for r in range(rank, nrows) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [v * inv for v in m[rank]]
        for r in range(nrows):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        pivots.append((rank, col))
        rank += 1
    for r in range(rank, nrows):
        if m[r][ncols] != 0:
            return None
    x = [_ZERO] * ncols
    for r, col in pivots:
        x[col] = m[r][ncols]
    return x


# ---------------------------------------------------------------------------
# simplex

@dataclass(frozen=True)
class LPResult:
    status: str                      # "optimal" | "infeasible" | "unbounded"
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None
    dual_ub: tuple[Fraction, ...] | None = None
    dual_eq: tuple[Fraction, ...] | None = None


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int):
    inv = 1 / tab[row][col]
    tab[row] = [v * inv for v in tab[row]]
    piv_row = tab[row]
    for r in range(len(tab)):
        if r != row and tab[r][col] != 0:
            f = tab[r][col]
            tab[r] = [a - f * b for a, b in zip(tab[r], piv_row)]
    basis[row] = col


def _reduced_costs(tab, basis, cost, ncols):
    red = list(cost[:ncols])
    for r, b in enumerate(basis):
        cb = cost[b]
        if cb != 0:
            row = tab[r]
            for j in range(ncols):
                if row[j] != 0:
                    red[j] -= cb * row[j]
    return red

def _simplex_phase(tab: list[list[Fraction]], basis: list[int],
                   cost: list[Fraction], ncols: int) -> str:
    """Minimize cost over the tableau in place.  Bland's rule throughout."""
    while True:
        red = _reduced_costs(tab, basis, cost, ncols)
        enter = next((j for j in range(ncols) if red[j] < 0), None)
        if enter is None:
            return "optimal"
        best: tuple[Fraction, int] | None = None
        leave_row = None
        for r in range(len(tab)):
            a = tab[r][enter]
            if a > 0:
                ratio = tab[r][-1] / a
                key = (ratio, basis[r])
                if best is None or key < best:
                    best = key
                    leave_row = r
        if leave_row is None:
            return "unbounded"
        _pivot(tab, basis, leave_row, enter)


def solve_lp(objective: Sequence[Fraction],
             a_ub: Sequence[Sequence[Fraction]] = (),
             b_ub: Sequence[Fraction] = (),
             a_eq: Sequence[Sequence[Fraction]] = (),
             b_eq: Sequence[Fraction] = (),
             sense: str = "max") -> LPResult:
    """Exact LP over free variables: optimize c.x s.t. A_ub x <= b_ub, A_eq x = b_eq."""
    n = len(objective)
    m_ub, m_eq = len(a_ub), len(a_eq)
    c = [Fraction(v) for v in objective]
    if sense == "max":
        c = [-v for v in c]
    elif sense != "min":
        raise ValueError("sense must be 'max' or 'min'")

    # columns: u_0..u_{n-1}, v_0..v_{n-1} (x = u - v), slacks for ub rows
    nstruct = 2 * n + m_ub
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    sigma: list[Fraction] = []           # row sign flips applied to reach rhs >= 0
    for i in range(m_ub):
        row = [Fraction(v) for v in a_ub[i]]
        r = row + [-v for v in row] + [_ZERO] * m_ub
        r[2 * n + i] = _ONE
        rows.append(r)
        rhs.append(Fraction(b_ub[i]))
        sigma.append(_ONE)
    for i in range(m_eq):
        row = [Fraction(v) for v in a_eq[i]]
        rows.append(row + [-v for v in row] + [_ZERO] * m_ub)
        rhs.append(Fraction(b_eq[i]))
        sigma.append(_ONE)
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
            sigma[i] = -_ONE

    # phase 1: artificial basis
    m = len(rows)
    ncols = nstruct + m
    tab = [rows[i] + [_ONE if j == i else _ZERO for j in range(m)] + [rhs[i]]
           for i in range(m)]
    basis = [nstruct + i for i in range(m)]
    cost1 = [_ZERO] * nstruct + [_ONE] * m
    status = _simplex_phase(tab, basis, cost1, ncols)
    assert status == "optimal"            # phase-1 objective is bounded below by 0
    red = _reduced_costs(tab, basis, cost1, ncols)
    value1 = sum(cost1[b] * tab[r][-1] for r, b in enumerate(basis))
    if value1 != 0:
        return LPResult(status="infeasible")

    # drive artificials out of the basis; drop rows that turn out redundant
    keep_rows: list[int] = []
    for r in range(m):
        if basis[r] >= nstruct:
            col = next((j for j in range(nstruct) if tab[r][j] != 0), None)
            if col is None:
                continue                  # redundant constraint row
            _pivot(tab, basis, r, col)
        keep_rows.append(r)
    if len(keep_rows) != m:
        tab = [tab[r] for r in keep_rows]
        basis = [basis[r] for r in keep_rows]
    row_ids = keep_rows                    # original row index per surviving row
    tab = [row[:nstruct] + [row[-1]] for row in tab]
    ncols = nstruct

    cost2 = c + [-v for v in c] + [_ZERO] * m_ub
    status = _simplex_phase(tab, basis, cost2, ncols)
    if status == "unbounded":
        return LPResult(status="unbounded")

    xz = [_ZERO] * nstruct
    for r, b in enumerate(basis):
        xz[b] = tab[r][-1]
    x = tuple(xz[j] - xz[n + j] for j in range(n))
    value = sum(ci * xi for ci, xi in zip(objective, x))

    # duals: solve B^T y = c_B over the surviving original rows
    bmat = []
    for b in basis:
        col = []
        for r in row_ids:
            col.append(rows[r][b])
        bmat.append(col)                   # row per basic var: (column of M)^T
    y = solve_linear(bmat, [cost2[b] for b in basis])
    dual_full = [_ZERO] * (m_ub + m_eq)
    if y is not None:
        for k, r in enumerate(row_ids):
            dual_full[r] = sigma[r] * y[k]
    if sense == "max":
        dual_full = [-v for v in dual_full]
    dual_ub = tuple(dual_full[:m_ub])
    dual_eq = tuple(dual_full[m_ub:])
    return LPResult(status="optimal", x=x, value=value,
                    dual_ub=dual_ub, dual_eq=dual_eq)


# ---------------------------------------------------------------------------
# vertex enumeration (incremental double description)

def _tight_normals(point, halfspaces):
    out = []
    for a, beta in halfspaces:
        if sum(ai * pi for ai, pi in zip(a, point)) == beta:
            out.append(a)
    return out


def polytope_vertices(halfspaces: list[tuple[Row, Fraction]], dim: int,
                      box: Fraction = _ONE) -> list[Row]:
    """Vertices of {x : a.x <= beta for all (a, beta)} intersected with [-box, box]^dim.

    The box keeps the intermediate polytope bounded; callers pass a box that
    provably contains the target (for unit balls of norms with normalized
    basis vectors, box = 1 works).
    """
    box_hs: list[tuple[Row, Fraction]] = []
    for k in range(dim):
        e = tuple(_ONE if i == k else _ZERO for i in range(dim))
        ne = tuple(-v for v in e)
        box_hs.append((e, box))
        box_hs.append((ne, box))

    verts: list[Row] = []
    for mask in range(1 << dim):
        verts.append(tuple(box if (mask >> k) & 1 else -box for k in range(dim)))
    active = list(box_hs)

    for a, beta in halfspaces:
        vals = [sum(ai * vi for ai, vi in zip(a, v)) - beta for v in verts]
        if all(val <= 0 for val in vals):
            active.append((a, beta))
            continue
        keep = [v for v, val in zip(verts, vals) if val <= 0]
        new_pts: list[Row] = []
        for i, u in enumerate(verts):
            if vals[i] >= 0:
                continue
            for j, w in enumerate(verts):
                if vals[j] <= 0:
                    continue
                # u strictly inside, w strictly outside: cut the edge (u, w)
                common = []
                for nrm, b in active:
                    if (sum(ai * ui for ai, ui in zip(nrm, u)) == b
                            and sum(ai * wi for ai, wi in zip(nrm, w)) == b):
                        common.append(nrm)
                if mat_rank(common) < dim - 1:
                    continue
                t = (-vals[i]) / (vals[j] - vals[i])
                p = tuple(ui + t * (wi - ui) for ui, wi in zip(u, w))
                new_pts.append(p)
        seen = {tuple(v) for v in keep}
        for p in new_pts:
            if tuple(p) not in seen:
                seen.add(tuple(p))
                keep.append(p)
        verts = keep
        active.append((a, beta))

    # final filter: genuine vertices have d independent tight constraints
    out = []
    seen: set[Row] = set()
    for v in verts:
        if v in seen:
            continue
        seen.add(v)
        if mat_rank(_tight_normals(v, active)) == dim:
            out.append(v)
    out.sort()
    return out
