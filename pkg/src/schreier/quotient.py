"""Finite quotient-operator models.

A model is a surjection-like exact matrix T from a domain coordinate
space (carrying a 1-unconditional norm) into a codomain coordinate
space (carrying a bimonotone norm), together with a norm on the range:
either the quotient-induced norm min{|x|_dom : Tx = y} or a supplied
coordinate norm.  The covering constant C records how far the image of
the C-scaled domain ball covers the range ball.

Quotient norms are computed by exact constraint-generation linear
programming: minimise t subject to Tx = y and phi(x) <= t over the
facet functionals phi of the domain ball, with the domain norm's own
witness serving as the separation oracle.  At the optimum the preimage
satisfies |x|_dom = t exactly, so every evaluation doubles as a
checkable certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .config import Caps, DEFAULT_CAPS
from .errors import CapExceeded, InputError, NotInRange
from .lp import polytope_vertices, solve_lp, solve_linear
from .norms import (Leaf, NormCertificate, NormSpec, QuotientNormSpec,
                    QuotientWitness, SchreierNorm, SumNorm, SupNorm,
                    facet_functionals, is_lattice_norm, norm_eval)
from .seqvec import FinVec, Rat, as_rat


# ---------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class Matrix:
    """Dense exact-rational matrix sending domain coordinates to codomain rows."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(as_rat(v) for v in row) for row in self.entries)
        if not rows or not rows[0]:
            raise InputError("matrix needs at least one row and one column")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise InputError("matrix rows must share one width")
        object.__setattr__(self, "entries", rows)

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def ncols(self) -> int:
        return len(self.entries[0])

    def entry(self, r: int, c: int) -> Fraction:
        # 1-based, matching coordinate indices
        if not (1 <= r <= self.nrows and 1 <= c <= self.ncols):
            raise InputError(f"entry ({r}, {c}) outside {self.nrows}x{self.ncols}")
        return self.entries[r - 1][c - 1]

    def apply(self, x: FinVec) -> FinVec:
        if any(i > self.ncols for i in x.support()):
            raise InputError(
                f"vector support {x.support()} exceeds {self.ncols} columns")
        out: dict[int, Fraction] = {}
        for c in x.support():
            xc = x[c]
            col = [row[c - 1] for row in self.entries]
            for r, v in enumerate(col, start=1):
                if v:
                    out[r] = out.get(r, Fraction(0)) + v * xc
        return FinVec(out)

    def column(self, c: int) -> FinVec:
        return self.apply(FinVec.basis(c))

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(tuple(
            tuple(Fraction(1) if r == c else Fraction(0) for c in range(n))
            for r in range(n)))

    @staticmethod
    def from_dict(nrows: int, ncols: int,
                  data: dict[tuple[int, int], Rat]) -> "Matrix":
        rows = [[Fraction(0)] * ncols for _ in range(nrows)]
        for (r, c), v in data.items():
            if not (1 <= r <= nrows and 1 <= c <= ncols):
                raise InputError(f"entry ({r}, {c}) outside {nrows}x{ncols}")
            rows[r - 1][c - 1] = as_rat(v)
        return Matrix(tuple(tuple(row) for row in rows))


# ---------------------------------------------------------------------------
# models


_STRUCTURAL = (SupNorm, SumNorm, SchreierNorm)


@dataclass(frozen=True)
class QuotientModel:
    """Matrix plus norms plus covering constant.

    c_policy records where the stored constant came from:
      "induced"  -- range norm is the quotient norm itself, C = 1,
      "supplied" -- user-provided C (at least 1) with a supplied range norm,
      "minimal"  -- C = max(1, exact minimal covering constant).
    The stored constant is clamped to >= 1 because downstream estimates
    multiply by C expecting it to dominate the quotient map's openness;
    covering_constant still reports the exact minimal value.
    """

    matrix: Matrix
    domain_norm: NormSpec
    codomain_norm: NormSpec
    y_norm: Optional[NormSpec]          # None: quotient-induced
    covering_c: Fraction
    c_policy: str
    trusted: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "covering_c", as_rat(self.covering_c))
        if self.c_policy not in ("induced", "supplied", "minimal"):
            raise InputError(f"unknown covering policy {self.c_policy!r}")
        if self.covering_c < 1:
            raise InputError(f"stored covering constant {self.covering_c} below 1")
        for role, spec in (("domain", self.domain_norm),
                           ("codomain", self.codomain_norm)):
            if isinstance(spec, _STRUCTURAL):
                continue
            if not self.trusted:
                raise InputError(
                    f"{role} norm of kind {getattr(spec, 'kind', '?')!r} is not"
                    " structurally 1-unconditional and bimonotone; pass"
                    " trusted=True to accept it")
        if self.y_norm is not None and not isinstance(self.y_norm, _STRUCTURAL):
            if not self.trusted:
                raise InputError("supplied range norm must be a coordinate norm")
        if self.y_norm is None and self.c_policy != "induced":
            raise InputError("induced range norm forces the induced policy")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def induced(matrix: Matrix, domain_norm: NormSpec,
                codomain_norm: NormSpec, trusted: bool = False) -> "QuotientModel":
        return QuotientModel(matrix, domain_norm, codomain_norm, None,
                             Fraction(1), "induced", trusted)

    @staticmethod
    def supplied(matrix: Matrix, domain_norm: NormSpec, codomain_norm: NormSpec,
                 y_norm: NormSpec, covering_c: Rat,
                 trusted: bool = False) -> "QuotientModel":
        return QuotientModel(matrix, domain_norm, codomain_norm, y_norm,
                             as_rat(covering_c), "supplied", trusted)

    @staticmethod
    def minimal(matrix: Matrix, domain_norm: NormSpec, codomain_norm: NormSpec,
                y_norm: NormSpec, caps: Caps = DEFAULT_CAPS,
                trusted: bool = False) -> "QuotientModel":
        probe = QuotientModel(matrix, domain_norm, codomain_norm, y_norm,
                              Fraction(1), "supplied", trusted)
        exact = covering_constant(probe, caps).value
        return QuotientModel(matrix, domain_norm, codomain_norm, y_norm,
                             max(Fraction(1), exact), "minimal", trusted)

    # -- norm plumbing ------------------------------------------------------

    def apply(self, x: FinVec) -> FinVec:
        return self.matrix.apply(x)

    def image_norm(self, y: FinVec) -> NormCertificate:
        """Quotient-induced norm of y as a replayable certificate."""
        res = quotient_norm(self, y)
        witness = QuotientWitness(res.preimage, res.domain_certificate)
        return NormCertificate(res.value, witness, ())

    def y_norm_value(self, y: FinVec) -> Fraction:
        if self.y_norm is None:
            return quotient_norm(self, y).value
        return norm_eval(y, self.y_norm).value

    def as_norm_spec(self) -> QuotientNormSpec:
        return QuotientNormSpec(self)


# ---------------------------------------------------------------------------
# quotient norm by constraint generation


@dataclass(frozen=True)
class QuotientResult:
    value: Fraction
    preimage: FinVec
    domain_certificate: NormCertificate


def preimage_or_none(model: QuotientModel, y: FinVec) -> Optional[FinVec]:
    """Any particular solution of Tx = y, ignoring norms."""
    m = model.matrix
    if any(r > m.nrows for r in y.support()):
        return None
    rows = [[m.entries[r][c] for c in range(m.ncols)] for r in range(m.nrows)]
    rhs = [y[r + 1] for r in range(m.nrows)]
    sol = solve_linear(rows, rhs)
    if sol is None:
        return None
    return FinVec({c + 1: sol[c] for c in range(m.ncols) if sol[c]})


def quotient_norm(model: QuotientModel, y: FinVec,
                  caps: Caps = DEFAULT_CAPS) -> QuotientResult:
    """min{|x|_dom : Tx = y}, exact, with the minimising preimage.

    The LP value is a lower bound on the minimum (any preimage satisfies
    every facet inequality), and termination requires the LP optimum to
    have domain norm at most its own t, which forces equality; so the
    returned value is exact and the preimage attains it.
    """
    if not is_lattice_norm(model.domain_norm):
        raise InputError("quotient norms need a coordinate domain norm")
    m = model.matrix
    if y.is_zero():
        zero_cert = norm_eval(FinVec.zero(), model.domain_norm)
        return QuotientResult(Fraction(0), FinVec.zero(), zero_cert)
    if preimage_or_none(model, y) is None:
        raise NotInRange(f"no preimage: vector over rows {y.support()} "
                         f"is outside the range of the {m.nrows}x{m.ncols} matrix")
    n = m.ncols
    # variables x_1..x_n, t; objective: minimise t
    objective = [Fraction(0)] * n + [Fraction(1)]
    a_eq = []
    b_eq = []
    for r in range(m.nrows):
        a_eq.append([m.entries[r][c] for c in range(n)] + [Fraction(0)])
        b_eq.append(y[r + 1])

    funcs: list[NormCertificate] = []
    seen: set[tuple[tuple[int, int], ...]] = set()

    def add(cert: NormCertificate) -> None:
        key = tuple(cert.signs)
        if key in seen:
            raise CapExceeded("quotient norm separation repeated a functional")
        seen.add(key)
        funcs.append(cert)

    for i in range(1, n + 1):
        for s in (1, -1):
            add(NormCertificate(Fraction(1), Leaf((i,)), ((i, s),)))

    guard = 0
    while True:
        guard += 1
        if guard > caps.search_nodes:
            raise CapExceeded("quotient norm constraint generation did not settle")
        a_ub = []
        for cert in funcs:
            row = [Fraction(0)] * (n + 1)
            for i, s in cert.signs:
                row[i - 1] = Fraction(s)
            row[n] = Fraction(-1)
            a_ub.append(row)
        b_ub = [Fraction(0)] * len(funcs)
        res = solve_lp(objective, a_ub, b_ub, a_eq=a_eq, b_eq=b_eq, sense="min")
        if res.status != "optimal":
            raise NotInRange(f"quotient LP reported {res.status}")
        xstar = FinVec({i: res.x[i - 1] for i in range(1, n + 1)
                        if res.x[i - 1]})
        tstar = res.x[n]
        cert = norm_eval(xstar, model.domain_norm)
        if cert.value <= tstar:
            return QuotientResult(tstar, xstar, cert)
        add(cert)


def min_norm_preimage(model: QuotientModel, y: FinVec, slack: Rat = 1,
                      caps: Caps = DEFAULT_CAPS) -> FinVec:
    """A preimage x with Tx = y and |x|_dom within slack of the minimum.

    The solver is exact, so the returned preimage is optimal and any
    slack >= 1 is satisfied; the parameter stays in the signature as the
    contract downstream consumers rely on.
    """
    slack = as_rat(slack)
    if slack < 1:
        raise InputError(f"slack must be at least 1, got {slack}")
    res = quotient_norm(model, y, caps)
    check = model.apply(res.preimage)
    if check != y:
        raise InputError("preimage replay failed: Tx != y")
    if res.domain_certificate.value > slack * res.value:
        raise InputError("preimage norm exceeds the slack bound")
    return res.preimage


# ---------------------------------------------------------------------------
# covering constant


@dataclass(frozen=True)
class CoveringCertificate:
    """Exact minimal covering constant with the binding extreme point."""

    value: Fraction
    binding: Optional[FinVec]
    extreme_points: tuple[FinVec, ...]
    quotient_values: tuple[Fraction, ...]


def _column_space_basis(m: Matrix) -> list[list[Fraction]]:
    """Reduced basis of the column space: pivot rows carry identity blocks."""
    cols = [[m.entries[r][c] for r in range(m.nrows)] for c in range(m.ncols)]
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    for col in cols:
        vec = list(col)
        for b, p in zip(basis, pivots):
            factor = vec[p]
            if factor:
                vec = [v - factor * bv for v, bv in zip(vec, b)]
        pivot = next((r for r, v in enumerate(vec) if v), None)
        if pivot is None:
            continue
        scale = vec[pivot]
        vec = [v / scale for v in vec]
        # clear the new pivot row from earlier basis vectors
        basis = [[bv - b[pivot] * nv for bv, nv in zip(b, vec)] for b in basis]
        basis.append(vec)
        pivots.append(pivot)
    return basis


def covering_constant(model: QuotientModel,
                      caps: Caps = DEFAULT_CAPS) -> CoveringCertificate:
    """Smallest C with every range-ball extreme point of quotient norm <= C.

    The range ball is enumerated exactly: parametrise the range by a
    reduced column-space basis, cut the parameter space by every signed
    facet functional of the supplied range norm, list the vertices, and
    take the worst quotient norm among their images.
    """
    if model.y_norm is None:
        return CoveringCertificate(Fraction(1), None, (), ())
    basis = _column_space_basis(model.matrix)
    k = len(basis)
    if k > caps.vertex_dim:
        raise CapExceeded(
            f"range dimension {k} exceeds vertex enumeration cap {caps.vertex_dim}")
    universe = tuple(sorted({r + 1 for vec in basis
                             for r, v in enumerate(vec) if v}))
    halfspaces: list[tuple[list[Fraction], Fraction]] = []
    for psi in facet_functionals(universe, model.y_norm, caps):
        normal = [Fraction(0)] * k
        for r, s in psi.signs:
            for j, vec in enumerate(basis):
                if vec[r - 1]:
                    normal[j] += s * vec[r - 1]
        if all(v == 0 for v in normal):
            continue
        halfspaces.append((normal, Fraction(1)))
        halfspaces.append(([-v for v in normal], Fraction(1)))
    # reduced basis keeps every ball coordinate within 1, so box 2 is strict
    vertices_u = polytope_vertices(halfspaces, k, box=2)
    points: list[FinVec] = []
    values: list[Fraction] = []
    best: Optional[tuple[Fraction, FinVec]] = None
    for u in vertices_u:
        data: dict[int, Fraction] = {}
        for j, vec in enumerate(basis):
            if u[j]:
                for r, v in enumerate(vec):
                    if v:
                        data[r + 1] = data.get(r + 1, Fraction(0)) + u[j] * v
        y = FinVec(data)
        val = quotient_norm(model, y, caps).value
        points.append(y)
        values.append(val)
        if best is None or val > best[0]:
            best = (val, y)
    if best is None:
        raise InputError("range ball has no vertices; matrix may be zero")
    return CoveringCertificate(best[0], best[1], tuple(points), tuple(values))
