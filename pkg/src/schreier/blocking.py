"""Synchronized blocking search, gliding-hump selection, window verifiers.

Three stages live here.  First, a search for blockings of the domain and
codomain coordinates that make the operator two-diagonal up to certified
decay: each domain block maps into the matching codomain block and its
predecessor, and every other pairing stays strictly below a decreasing
threshold.  Second, a gliding-hump pass over candidate range vectors that
picks a subsequence whose humps occupy successive blocks, refining both
blockings along a shared cut sequence.  Third, exact replay of the window
inequalities the later constructions rely on, reported clause by clause.

Everything is rational arithmetic: a clause passes iff lhs < rhs holds
exactly, and hypothesis failures are reported as a gate instead of being
folded into pass/fail.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .config import Caps, DEFAULT_CAPS
from .errors import (CapExceeded, InputError, InsufficientDecay,
                     NotFoundWithinTruncation, SceneIncomplete,
                     TailDescriptorMissing)
from .lp import mat_rank, polytope_vertices, solve_lp
from .norms import (SchreierNorm, SumNorm, SupNorm, facet_functionals,
                    norm_eval, norm_value, operator_norm)
from .quotient import QuotientModel
from .schedule import EpsilonSchedule, validate_schedule
from .seqvec import Blocking, FinVec, as_rat, project, restrict


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class GateCheck:
    """One hypothesis item: if it fails, the inequality does not apply."""

    description: str
    ok: bool
    note: str = ""


@dataclass(frozen=True)
class ClauseRow:
    """One conclusion clause; ok is exactly lhs < rhs."""

    description: str
    lhs: Fraction
    rhs: Fraction
    ok: bool
    witness: tuple[int, ...] = ()


def _clause(description: str, lhs, rhs, witness: Sequence[int] = ()) -> ClauseRow:
    lhs = as_rat(lhs)
    rhs = as_rat(rhs)
    return ClauseRow(description, lhs, rhs, lhs < rhs, tuple(witness))


@dataclass(frozen=True)
class InequalityReport:
    """Gated clause list for one window inequality.

    The gate comes first: when any hypothesis item fails, the clauses are
    left empty and the verdict is "hypotheses violated" rather than a
    pass/fail that would not mean anything.
    """

    lemma: str
    hypotheses: tuple[GateCheck, ...]
    clauses: tuple[ClauseRow, ...]

    @property
    def hypotheses_ok(self) -> bool:
        return all(g.ok for g in self.hypotheses)

    @property
    def passed(self) -> bool:
        return self.hypotheses_ok and all(c.ok for c in self.clauses)

    def verdict(self) -> str:
        if not self.hypotheses_ok:
            return "hypotheses violated"
        return "pass" if all(c.ok for c in self.clauses) else "fail"


# ---------------------------------------------------------------------------
# scenes


@dataclass(frozen=True)
class Scene:
    """A verification context: model, schedule, blockings, window data.

    The range vectors ys live in the codomain coordinate space and are
    normalized there; every window estimate is measured in the codomain
    norm.  The optional fields carry whatever the requested inequality
    quantifies over: a coefficient vector for combinations, a window
    (n, m), staged index lists, or a domain argument with its block index.
    """

    model: QuotientModel
    schedule: EpsilonSchedule
    dom_blocking: Blocking
    cod_blocking: Blocking
    ys: tuple[FinVec, ...] = ()
    coeffs: tuple[Fraction, ...] = ()
    n: Optional[int] = None
    m: Optional[int] = None
    p_list: tuple[int, ...] = ()
    r_list: tuple[int, ...] = ()
    x: Optional[FinVec] = None
    block_index: Optional[int] = None

    def __post_init__(self) -> None:
        mat = self.model.matrix
        if self.dom_blocking.top != mat.ncols:
            raise InputError(
                f"domain blocking ends at {self.dom_blocking.top}, matrix has"
                f" {mat.ncols} columns")
        if self.cod_blocking.top != mat.nrows:
            raise InputError(
                f"codomain blocking ends at {self.cod_blocking.top}, matrix has"
                f" {mat.nrows} rows")
        if self.dom_blocking.length != self.cod_blocking.length:
            raise InputError("domain and codomain blockings need equally many blocks")
        object.__setattr__(self, "ys", tuple(self.ys))
        for k, y in enumerate(self.ys, start=1):
            if y.is_zero() or y.max_index() > mat.nrows:
                raise InputError(f"range vector {k} must live on the codomain coordinates")
            val = norm_value(y, self.model.codomain_norm)
            if val != 1:
                raise InputError(f"range vector {k} has norm {val}, expected 1")
        object.__setattr__(self, "coeffs", tuple(as_rat(c) for c in self.coeffs))
        object.__setattr__(self, "p_list", tuple(int(p) for p in self.p_list))
        object.__setattr__(self, "r_list", tuple(int(r) for r in self.r_list))
        if self.n is not None and self.n < 0:
            raise InputError(f"window start must be >= 0, got {self.n}")
        if self.n is not None and self.m is not None and self.m <= self.n:
            raise InputError(f"window ({self.n}, {self.m}) is empty")
        if self.x is not None and not self.x.is_zero() \
                and self.x.max_index() > mat.ncols:
            raise InputError("argument vector leaves the domain coordinates")
        if self.block_index is not None \
                and not 1 <= self.block_index <= self.dom_blocking.length:
            raise InputError(
                f"block index {self.block_index} outside 1..{self.dom_blocking.length}")

    # the range sits inside the codomain space, so its norm applies
    def cod_norm(self, v: FinVec) -> Fraction:
        return norm_value(v, self.model.codomain_norm)

    def dom_norm(self, v: FinVec) -> Fraction:
        return norm_value(v, self.model.domain_norm)

    def blocks(self) -> int:
        return self.cod_blocking.length


# ---------------------------------------------------------------------------
# two-diagonal blocking search


_CHAIN = (SupNorm, SumNorm, SchreierNorm)


def _require_chain(model: QuotientModel) -> None:
    for role, spec in (("domain", model.domain_norm),
                       ("codomain", model.codomain_norm)):
        if not isinstance(spec, _CHAIN):
            raise InputError(f"blocking search needs a structural {role} norm")


def _abs_submatrix_sum(model: QuotientModel, dom_range, cod_range) -> Fraction:
    total = Fraction(0)
    for r in cod_range:
        row = model.matrix.entries[r - 1]
        for c in dom_range:
            total += abs(row[c - 1])
    return total


def _pair_decay_holds(model: QuotientModel, bound: Fraction,
                      dom_range, cod_range, caps: Caps) -> bool:
    """Decide C * sup{|(Tx) on cod_range| : supp x in dom_range, |x| <= 1} < bound.

    Two certified shortcuts bracket the expensive exact computation: the
    absolute entry sum is an upper bound (coordinates are below any chain
    norm and every chain norm is below the sum norm), and the best single
    column is a lower bound (basis vectors are unit in every chain norm).
    """
    C = model.covering_c
    if C * _abs_submatrix_sum(model, dom_range, cod_range) < bound:
        return True
    cod = model.codomain_norm
    lower = Fraction(0)
    for c in dom_range:
        col = restrict(model.matrix.column(c), cod_range)
        if not col.is_zero():
            lower = max(lower, norm_value(col, cod))
    if C * lower >= bound:
        return False
    res = operator_norm(lambda v, rng=cod_range: restrict(model.matrix.apply(v), rng),
                        tuple(dom_range), tuple(cod_range),
                        model.domain_norm, cod, caps)
    return C * res.value < bound


def jz_blocking(model: QuotientModel, schedule: EpsilonSchedule, max_cuts: int,
                caps: Caps = DEFAULT_CAPS) -> tuple[Blocking, Blocking]:
    """Search for synchronized blockings that make the operator two-diagonal.

    For every domain block i and codomain block j other than i and i-1,
    arguments of norm up to the covering constant must have image mass in
    block j strictly below the companion threshold at index max(i, j).
    The search maximizes the block count (at most max_cuts), choosing cut
    positions depth-first in increasing order, so the result is the
    deterministic lexicographic-first witness at the finest feasible
    granularity.  A finite matrix can legitimately refuse: that outcome is
    reported as NotFoundWithinTruncation, not as an error.
    """
    _require_chain(model)
    if max_cuts < 2:
        raise InputError(f"the search needs room for at least 2 blocks, got {max_cuts}")
    mat = model.matrix
    top = min(max_cuts, mat.ncols, mat.nrows, schedule.last_index)
    explored = 0

    def pair_ok(i: int, j: int, dcuts: list[int], ccuts: list[int]) -> bool:
        dom_range = range(dcuts[i - 1] + 1, dcuts[i] + 1)
        cod_range = range(ccuts[j - 1] + 1, ccuts[j] + 1)
        return _pair_decay_holds(model, schedule.tilde_at(max(i, j)),
                                 dom_range, cod_range, caps)

    def descend(dcuts: list[int], ccuts: list[int], t: int, blocks: int):
        nonlocal explored
        if t == blocks:
            dfull = dcuts + [mat.ncols]
            cfull = ccuts + [mat.nrows]
            for j in range(1, blocks - 1):
                if not pair_ok(blocks, j, dfull, cfull):
                    return None
            for i in range(1, blocks):
                if not pair_ok(i, blocks, dfull, cfull):
                    return None
            return Blocking(dfull), Blocking(cfull)
        for d in range(dcuts[-1] + 1, mat.ncols - (blocks - t) + 1):
            explored += 1
            if explored > caps.search_nodes:
                raise CapExceeded("blocking search exceeded its node budget")
            dnew = dcuts + [d]
            if any(not pair_ok(t, j, dnew, ccuts) for j in range(1, t - 1)):
                continue
            for c in range(ccuts[-1] + 1, mat.nrows - (blocks - t) + 1):
                cnew = ccuts + [c]
                if any(not pair_ok(i, t, dnew, cnew) for i in range(1, t)):
                    continue
                found = descend(dnew, cnew, t + 1, blocks)
                if found is not None:
                    return found
        return None

    for blocks in range(top, 1, -1):
        found = descend([0], [0], 1, blocks)
        if found is not None:
            return found
    raise NotFoundWithinTruncation(
        "no synchronized blocking meets the decay thresholds at this size",
        payload={"blocks_tried": tuple(range(top, 1, -1)),
                 "prefixes_explored": explored})


def verify_blocking(model: QuotientModel, schedule: EpsilonSchedule,
                    dom_blocking: Blocking, cod_blocking: Blocking,
                    caps: Caps = DEFAULT_CAPS) -> tuple[ClauseRow, ...]:
    """Exact replay of the two-diagonal decay property, one row per pair.

    Zero submatrices short-circuit to an exact zero; every other pair goes
    through the full operator-norm computation, scaled by the covering
    constant.
    """
    _require_chain(model)
    mat = model.matrix
    if dom_blocking.length != cod_blocking.length:
        raise InputError("blockings need equally many blocks")
    if dom_blocking.top != mat.ncols or cod_blocking.top != mat.nrows:
        raise InputError("blockings do not fit the matrix dimensions")
    count = dom_blocking.length
    if schedule.last_index < count:
        raise InputError(f"schedule stops at {schedule.last_index}, need {count}")
    C = model.covering_c
    rows: list[ClauseRow] = []
    for i in range(1, count + 1):
        dom_range = dom_blocking.block(i)
        for j in range(1, count + 1):
            if j in (i, i - 1):
                continue
            cod_range = cod_blocking.block(j)
            if _abs_submatrix_sum(model, dom_range, cod_range) == 0:
                value = Fraction(0)
            else:
                res = operator_norm(
                    lambda v, rng=cod_range: restrict(mat.apply(v), rng),
                    tuple(dom_range), tuple(cod_range),
                    model.domain_norm, model.codomain_norm, caps)
                value = C * res.value
            rows.append(_clause(
                f"scaled image mass of domain block {i} in codomain block {j}",
                value, schedule.tilde_at(max(i, j)), (i, j)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# gliding-hump subsequence selection


@dataclass(frozen=True)
class SelectionResult:
    """Gliding-hump selection together with its replayed guarantees.

    indices are 1-based positions into the candidate list; q_cuts is the
    shared block-index cut sequence (starting at 0) refining both
    blockings.  coefficient_floors[t] is the exact minimum codomain norm
    over combinations with coefficient 1 at pick t+1, so a floor of at
    least 1/2 bounds every unit combination's coefficients by 2.
    localization holds the replayed off-diagonal mass rows.
    """

    indices: tuple[int, ...]
    q_cuts: tuple[int, ...]
    dom_blocking: Blocking
    cod_blocking: Blocking
    coefficient_floors: tuple[Fraction, ...]
    localization: tuple[ClauseRow, ...]


def _min_slice_norm(vectors: Sequence[FinVec], spec, fixed: int,
                    caps: Caps) -> Fraction:
    """min |sum a_t v_t| over a_fixed = 1, exact by facet cut generation.

    Same scheme as the minimum-norm preimage: the LP value never exceeds
    the minimum because any coefficient choice satisfies every facet
    inequality, and the loop only stops once the optimum's own norm
    matches its t, which forces equality.
    """
    count = len(vectors)
    objective = [Fraction(0)] * count + [Fraction(1)]
    a_eq = [[Fraction(1) if t == fixed - 1 else Fraction(0)
             for t in range(count)] + [Fraction(0)]]
    b_eq = [Fraction(1)]
    support = sorted({i for v in vectors for i in v.support()})
    rows_ub: list[list[Fraction]] = []
    seen: set[tuple[tuple[int, int], ...]] = set()

    def add(signs: tuple[tuple[int, int], ...]) -> None:
        if signs in seen:
            raise CapExceeded("slice minimization repeated a functional")
        seen.add(signs)
        row = [Fraction(0)] * (count + 1)
        for idx, s in signs:
            for t in range(count):
                val = vectors[t][idx]
                if val:
                    row[t] += s * val
        row[count] = Fraction(-1)
        rows_ub.append(row)

    for i in support:
        add(((i, 1),))
        add(((i, -1),))
    guard = 0
    while True:
        guard += 1
        if guard > caps.search_nodes:
            raise CapExceeded("slice minimization did not settle")
        res = solve_lp(objective, rows_ub, [Fraction(0)] * len(rows_ub),
                       a_eq=a_eq, b_eq=b_eq, sense="min")
        if res.status != "optimal":
            raise InputError(f"slice LP reported {res.status}")
        tstar = res.x[count]
        w = FinVec.zero()
        for t in range(count):
            if res.x[t]:
                w = w + vectors[t].scale(res.x[t])
        cert = norm_eval(w, spec)
        if cert.value <= tstar:
            return tstar
        add(cert.signs)


def coefficient_ball_vertices(vectors: Sequence[FinVec], spec,
                              caps: Caps = DEFAULT_CAPS
                              ) -> tuple[tuple[Fraction, ...], ...]:
    """Extreme points of the coefficient body {a : |sum a_t v_t| <= 1}.

    Exact vertex enumeration.  The vectors must be linearly independent so
    the body is bounded, and the count is capped because enumeration cost
    grows quickly with dimension; callers needing more vectors sample
    coefficients instead.
    """
    count = len(vectors)
    if count == 0:
        raise InputError("need at least one vector")
    if count > caps.vertex_dim:
        raise CapExceeded(f"vertex enumeration capped at dimension {caps.vertex_dim}")
    support = sorted({i for v in vectors for i in v.support()})
    if mat_rank([[v[i] for v in vectors] for i in support]) < count:
        raise InputError("vectors must be linearly independent for a bounded body")
    halfspaces: dict[tuple[Fraction, ...], Fraction] = {}
    for cert in facet_functionals(tuple(support), spec, caps):
        row = tuple(sum((s * v[i] for i, s in cert.signs), Fraction(0))
                    for v in vectors)
        halfspaces[row] = Fraction(1)
        halfspaces[tuple(-e for e in row)] = Fraction(1)
    floors = [_min_slice_norm(vectors, spec, t + 1, caps) for t in range(count)]
    box = max(Fraction(1) / f for f in floors) + 1
    verts = polytope_vertices(list(halfspaces.items()), count, box)
    return tuple(sorted(verts))


def select_subsequence(scene: Scene, max_blocks: int,
                       caps: Caps = DEFAULT_CAPS) -> SelectionResult:
    """Pick candidates whose humps glide past successive blocks.

    A candidate is accepted when its support ends strictly beyond the cuts
    made so far and its mass in every finished block stays strictly below
    the companion threshold at the candidate's prospective index; its own
    block then runs up to the block containing its last coordinate.  The
    final block absorbs the remaining tail, both blockings are refined
    along the same cut sequence, and two guarantees are replayed exactly:
    the off-diagonal localization of every pick, and the coefficient
    bound (a floor of 1/2 on every coefficient-1 slice of the span, which
    caps coefficients of unit combinations at 2).
    """
    if max_blocks < 2:
        raise InputError(f"selection needs at least 2 blocks, got {max_blocks}")
    if len(scene.ys) < 2:
        raise InputError("selection needs at least two candidate vectors")
    tilde_dom, tilde_cod = scene.dom_blocking, scene.cod_blocking
    sched = scene.schedule
    budget = min(max_blocks, sched.last_index)
    q = [0]
    coord_cuts = [0]
    picks: list[int] = []
    skipped: list[tuple[int, str]] = []
    for pos, y in enumerate(scene.ys, start=1):
        if len(picks) == budget:
            break
        hump = tilde_cod.block_of(y.max_index())
        if hump <= q[-1]:
            skipped.append((pos, "support ends inside the blocks already cut"))
            continue
        bound = sched.tilde_at(len(picks) + 1)
        verdict = ""
        for j in range(1, len(picks) + 1):
            early = restrict(y, range(coord_cuts[j - 1] + 1, coord_cuts[j] + 1))
            if early.is_zero():
                continue
            mass = scene.cod_norm(early)
            if mass >= bound:
                verdict = f"mass {mass} in block {j} is not below {bound}"
                break
        if verdict:
            skipped.append((pos, verdict))
            continue
        picks.append(pos)
        q.append(hump)
        coord_cuts.append(tilde_cod.cuts[hump])
    if len(picks) < 2:
        raise InsufficientDecay(
            "candidates concentrate on early coordinates; no gliding hump",
            payload={"picked": tuple(picks), "skipped": tuple(skipped)})
    q[-1] = tilde_cod.length            # last block absorbs the tail
    coord_cuts[-1] = tilde_cod.top
    cod_ref = Blocking(coord_cuts)
    dom_ref = Blocking([tilde_dom.cuts[k] for k in q])
    selected = [scene.ys[p - 1] for p in picks]
    count = len(picks)
    rows: list[ClauseRow] = []
    for i in range(1, count + 1):
        for j in range(1, count + 1):
            if i == j:
                continue
            lhs = scene.cod_norm(project(cod_ref, (j,), selected[i - 1]))
            rows.append(_clause(f"mass of pick {i} in foreign block {j}",
                                lhs, sched.tilde_at(max(i, j)), (i, j)))
    if not all(r.ok for r in rows):
        raise InsufficientDecay(
            "selected family fails exact localization replay",
            payload={"rows": tuple(rows)})
    floors = tuple(_min_slice_norm(selected, scene.model.codomain_norm, t, caps)
                   for t in range(1, count + 1))
    if any(f < Fraction(1, 2) for f in floors):
        raise InsufficientDecay(
            "a unit combination can carry a coefficient beyond 2",
            payload={"floors": floors})
    return SelectionResult(tuple(picks), tuple(q), dom_ref, cod_ref, floors,
                           tuple(rows))


def refined_scene(scene: Scene, selection: SelectionResult, **window) -> Scene:
    """Scene over the refined blockings and the selected family."""
    return Scene(model=scene.model, schedule=scene.schedule,
                 dom_blocking=selection.dom_blocking,
                 cod_blocking=selection.cod_blocking,
                 ys=tuple(scene.ys[p - 1] for p in selection.indices),
                 **window)


# ---------------------------------------------------------------------------
# window inequality verifiers


_LEMMAS = ("1.2", "1.3", "1.4", "1.5", "1.6a", "1.6b")


def check_lemma(lemma_id: str, scene: Scene) -> InequalityReport:
    """Replay one window inequality on the scene, exactly, clause by clause.

    Hypotheses are checked first and reported as a gate; conclusions are
    only evaluated when every gate item holds.  SceneIncomplete means the
    scene does not carry the objects the inequality quantifies over.
    """
    if lemma_id not in _LEMMAS:
        raise InputError(
            f"unknown inequality id {lemma_id!r}; choose from {', '.join(_LEMMAS)}")
    if lemma_id == "1.2":
        return _check_window_combination(scene)
    if lemma_id == "1.3":
        return _check_staged_combination(scene)
    if lemma_id == "1.4":
        return _check_single_block_image(scene)
    if lemma_id == "1.5":
        return _check_excluded_blocks_image(scene)
    return _check_adjacent_parts(scene, lemma_id)


def _gate_schedule(scene: Scene, gates: list[GateCheck]) -> None:
    try:
        rep = validate_schedule(scene.schedule)
    except TailDescriptorMissing as exc:
        gates.append(GateCheck("schedule passes its validator", False, str(exc)))
        return
    note = ""
    if not rep.passed:
        bad = rep.failing()[0]
        note = f"clause {bad.clause!r} fails at p={bad.p}"
    gates.append(GateCheck("schedule passes its validator", rep.passed, note))


def _gate_range(scene: Scene, gates: list[GateCheck], needed: int) -> bool:
    ok = scene.schedule.last_index >= needed
    gates.append(GateCheck(
        f"schedule reaches index {needed}", ok,
        "" if ok else f"schedule stops at {scene.schedule.last_index}"))
    return ok


def _gate_family(scene: Scene, gates: list[GateCheck]) -> None:
    """Every candidate's mass in a foreign block is below the index pair's bound."""
    count = scene.blocks()
    worst = ""
    for i, y in enumerate(scene.ys, start=1):
        for j in range(1, count + 1):
            if j == i:
                continue
            part = project(scene.cod_blocking, (j,), y)
            if part.is_zero():
                continue
            mass = scene.cod_norm(part)
            bound = scene.schedule.tilde_at(max(i, j))
            if mass >= bound:
                worst = f"vector {i} carries {mass} in block {j}, bound {bound}"
                break
        if worst:
            break
    gates.append(GateCheck("family is localized to matching blocks",
                           not worst, worst))


def _combination(scene: Scene, coeffs: Sequence[Fraction],
                 vectors: Sequence[FinVec]) -> FinVec:
    y = FinVec.zero()
    for a, v in zip(coeffs, vectors):
        if a:
            y = y + v.scale(a)
    return y


def _check_window_combination(scene: Scene) -> InequalityReport:
    """Combinations supported off a window have small projections inside it."""
    if not scene.ys:
        raise SceneIncomplete("needs the range family ys")
    if not scene.coeffs:
        raise SceneIncomplete("needs a coefficient vector")
    if scene.n is None or scene.m is None:
        raise SceneIncomplete("needs the window (n, m)")
    count = scene.blocks()
    if len(scene.ys) != count:
        raise SceneIncomplete(f"{len(scene.ys)} range vectors for {count} blocks")
    if len(scene.coeffs) != count:
        raise SceneIncomplete("one coefficient per range vector")
    n, m = scene.n, scene.m
    gates: list[GateCheck] = []
    _gate_schedule(scene, gates)
    if not _gate_range(scene, gates, count):
        return InequalityReport("1.2", tuple(gates), ())
    gates.append(GateCheck(f"window 0 <= {n} < {m} <= {count + 1}",
                           0 <= n < m <= count + 1))
    inside = [i for i in range(n + 1, min(m, count + 1))
              if scene.coeffs[i - 1] != 0]
    gates.append(GateCheck("coefficients vanish inside the window", not inside,
                           f"nonzero at {inside}" if inside else ""))
    y = _combination(scene, scene.coeffs, scene.ys)
    norm_y = scene.cod_norm(y)
    gates.append(GateCheck("combination has norm one", norm_y == 1,
                           f"norm {norm_y}"))
    big = [a for a in scene.coeffs if abs(a) > 2]
    gates.append(GateCheck("coefficients bounded by two", not big,
                           f"oversized {big}" if big else ""))
    _gate_family(scene, gates)
    if not all(g.ok for g in gates):
        return InequalityReport("1.2", tuple(gates), ())
    clauses: list[ClauseRow] = []
    for j in range(n + 1, m):
        lhs = scene.cod_norm(project(scene.cod_blocking, (j,), y))
        clauses.append(_clause(f"window block {j} projection", lhs,
                               scene.schedule.eps_at(j), (j,)))
    window = tuple(range(n + 1, m))
    lhs = scene.cod_norm(project(scene.cod_blocking, window, y))
    clauses.append(_clause("whole window projection", lhs,
                           scene.schedule.eps_at(n), window))
    return InequalityReport("1.2", tuple(gates), tuple(clauses))


def _check_staged_combination(scene: Scene) -> InequalityReport:
    """Interval projections of a staged combination track their single terms."""
    if not scene.ys:
        raise SceneIncomplete("needs the range family ys")
    if not scene.p_list:
        raise SceneIncomplete("needs the staged index list p")
    if not scene.r_list:
        raise SceneIncomplete("needs the separator list r (starting at 1)")
    if not scene.coeffs:
        raise SceneIncomplete("needs a coefficient vector")
    count = scene.blocks()
    if len(scene.ys) != count:
        raise SceneIncomplete(f"{len(scene.ys)} range vectors for {count} blocks")
    if len(scene.r_list) != len(scene.p_list) + 1:
        raise SceneIncomplete("separators must be one longer than the staged indices")
    if len(scene.coeffs) != len(scene.p_list):
        raise SceneIncomplete("one coefficient per staged index")
    gates: list[GateCheck] = []
    _gate_schedule(scene, gates)
    if not _gate_range(scene, gates, count):
        return InequalityReport("1.3", tuple(gates), ())
    ok_seq = scene.r_list[0] == 1
    prev = 1
    if ok_seq:
        for p_i, r_i in zip(scene.p_list, scene.r_list[1:]):
            if not prev < p_i < r_i:
                ok_seq = False
                break
            prev = r_i
    gates.append(GateCheck("indices interleave: 1 = r_0 < p_1 < r_1 < p_2 < ...",
                           ok_seq))
    ok_bounds = ok_seq and scene.r_list[-1] <= count
    gates.append(GateCheck("separators stay within the blocking", ok_bounds))
    staged = [scene.ys[p - 1] for p in scene.p_list] if ok_bounds else []
    y = _combination(scene, scene.coeffs, staged)
    norm_y = scene.cod_norm(y)
    gates.append(GateCheck("combination has norm one", norm_y == 1,
                           f"norm {norm_y}"))
    big = [a for a in scene.coeffs if abs(a) > 2]
    gates.append(GateCheck("coefficients bounded by two", not big,
                           f"oversized {big}" if big else ""))
    _gate_family(scene, gates)
    if not all(g.ok for g in gates):
        return InequalityReport("1.3", tuple(gates), ())
    clauses: list[ClauseRow] = []
    for i in range(1, len(scene.p_list) + 1):
        lo, hi = scene.r_list[i - 1], scene.r_list[i]
        interval = tuple(range(lo, hi + 1))
        target = scene.ys[scene.p_list[i - 1] - 1].scale(scene.coeffs[i - 1])
        lhs = scene.cod_norm(project(scene.cod_blocking, interval, y) - target)
        p_prev = scene.p_list[i - 2] if i >= 2 else 0
        clauses.append(_clause(
            f"interval [{lo}, {hi}] tracks term {i}", lhs,
            scene.schedule.eps_at(p_prev - 1), (lo, hi, scene.p_list[i - 1])))
    return InequalityReport("1.3", tuple(gates), tuple(clauses))


def _check_single_block_image(scene: Scene) -> InequalityReport:
    """Images of one-block arguments have small mass in distant blocks.

    The tail clause starts one past the block: the image legitimately
    occupies the matching block and its predecessor, so only strictly
    later blocks are required to decay.
    """
    if scene.x is None:
        raise SceneIncomplete("needs the argument vector x")
    if scene.block_index is None:
        raise SceneIncomplete("needs the block index")
    i = scene.block_index
    count = scene.blocks()
    gates: list[GateCheck] = []
    _gate_schedule(scene, gates)
    blk = set(scene.dom_blocking.block(i))
    outside = [c for c in scene.x.support() if c not in blk]
    gates.append(GateCheck(f"argument supported in domain block {i}", not outside,
                           f"support leaks to {outside}" if outside else ""))
    nx = scene.dom_norm(scene.x)
    C = scene.model.covering_c
    gates.append(GateCheck("argument norm within the covering constant",
                           nx <= C, f"norm {nx} vs {C}"))
    if not all(g.ok for g in gates):
        return InequalityReport("1.4", tuple(gates), ())
    img = scene.model.apply(scene.x)
    sched = scene.schedule
    clauses: list[ClauseRow] = []
    for j in range(1, count + 1):
        if j in (i, i - 1):
            continue
        lhs = scene.cod_norm(project(scene.cod_blocking, (j,), img))
        clauses.append(_clause(f"distant block {j}", lhs,
                               sched.eps_at(max(i, j)), (j,)))
    prefix = tuple(range(1, i - 1))
    lhs = scene.cod_norm(project(scene.cod_blocking, prefix, img))
    clauses.append(_clause(f"prefix [1, {i - 2}]", lhs, sched.eps_at(i - 1),
                           prefix))
    tail = tuple(range(i + 1, count + 1))
    lhs = scene.cod_norm(project(scene.cod_blocking, tail, img))
    clauses.append(_clause(f"tail [{i + 1}, {count}]", lhs, sched.eps_at(i - 1),
                           tail))
    return InequalityReport("1.4", tuple(gates), tuple(clauses))


def _check_excluded_blocks_image(scene: Scene) -> InequalityReport:
    """Omitting two adjacent blocks leaves almost nothing in the first one."""
    if scene.x is None:
        raise SceneIncomplete("needs the argument vector x")
    if scene.block_index is None:
        raise SceneIncomplete("needs the block index")
    j = scene.block_index
    gates: list[GateCheck] = []
    _gate_schedule(scene, gates)
    banned = set(scene.dom_blocking.block(j))
    if j + 1 <= scene.dom_blocking.length:
        banned |= set(scene.dom_blocking.block(j + 1))
    leaking = [c for c in scene.x.support() if c in banned]
    gates.append(GateCheck(f"argument avoids domain blocks {j} and {j + 1}",
                           not leaking,
                           f"support at {leaking}" if leaking else ""))
    nx = scene.dom_norm(scene.x)
    C = scene.model.covering_c
    gates.append(GateCheck("argument norm within the covering constant",
                           nx <= C, f"norm {nx} vs {C}"))
    if not all(g.ok for g in gates):
        return InequalityReport("1.5", tuple(gates), ())
    img = scene.model.apply(scene.x)
    lhs = scene.cod_norm(project(scene.cod_blocking, (j,), img))
    clause = _clause(f"block {j} image mass", lhs,
                     scene.schedule.eps_at(j - 1), (j,))
    return InequalityReport("1.5", tuple(gates), (clause,))


def _adjacent_parts(scene: Scene) -> tuple[dict[int, FinVec], dict[int, FinVec]]:
    """Per block j: the image parts landing one block early and on the block."""
    count = scene.blocks()
    a: dict[int, FinVec] = {}
    b: dict[int, FinVec] = {}
    for j in range(1, count + 1):
        omega = restrict(scene.x, scene.dom_blocking.block(j))
        img = scene.model.apply(omega)
        if j >= 2:
            a[j - 1] = project(scene.cod_blocking, (j - 1,), img)
        b[j] = project(scene.cod_blocking, (j,), img)
    return a, b


def _check_adjacent_parts(scene: Scene, lemma_id: str) -> InequalityReport:
    """Adjacent image parts nearly cancel; runs sum to their end parts."""
    if scene.x is None:
        raise SceneIncomplete("needs the argument vector x")
    if scene.n is None or scene.m is None:
        raise SceneIncomplete("needs the window (n, m)")
    n, m = scene.n, scene.m
    count = scene.blocks()
    gates: list[GateCheck] = []
    _gate_schedule(scene, gates)
    gates.append(GateCheck(f"window 1 <= {n} < {m} <= {count}",
                           1 <= n < m <= count))
    nx = scene.dom_norm(scene.x)
    C = scene.model.covering_c
    gates.append(GateCheck("argument norm within the covering constant",
                           nx <= C, f"norm {nx} vs {C}"))
    if all(g.ok for g in gates):
        img = scene.model.apply(scene.x)
        worst = ""
        for j in range(n + 1, m):
            mass = scene.cod_norm(project(scene.cod_blocking, (j,), img))
            bound = 2 * scene.schedule.eps_at(j - 1)
            if not mass < bound:
                worst = f"block {j} carries {mass}, needs below {bound}"
                break
        gates.append(GateCheck("window image mass below twice the threshold",
                               not worst, worst))
    if not all(g.ok for g in gates):
        return InequalityReport(lemma_id, tuple(gates), ())
    a, b = _adjacent_parts(scene)
    sched = scene.schedule
    clauses: list[ClauseRow] = []
    if lemma_id == "1.6a":
        for j in range(n + 1, m):
            lhs = scene.cod_norm(a[j] + b[j])
            clauses.append(_clause(f"adjacent parts at {j}", lhs,
                                   3 * sched.eps_at(j - 1), (j,)))
    else:
        for r in range(n + 1, m):
            for s in range(r + 1, m):
                total = FinVec.zero()
                for j in range(r + 1, s + 1):
                    omega = restrict(scene.x, scene.dom_blocking.block(j))
                    total = total + scene.model.apply(omega)
                lhs = scene.cod_norm(total - (a[r] + b[s]))
                clauses.append(_clause(f"run ({r}, {s}] against its end parts",
                                       lhs, 5 * sched.eps_at(r - 1), (r, s)))
    return InequalityReport(lemma_id, tuple(gates), tuple(clauses))
