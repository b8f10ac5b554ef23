"""Staged extraction, decomposition certificates, and saturation probes.

Everything here composes the lower layers into end-to-end procedures.
The staged machinery picks range indices at the smallest spacing whose
gaps can host a ramp window, flattens every gap slice of the minimal
preimage, and reassembles vectors whose images track single terms
interval by interval.  On top of that sit the certificate producers and
their independent checkers: sign-unconditionality of an extracted
subsequence, bounded decompositions of preimages, a fixed-point probe
for c0-like families, hierarchical average recipes with equivalence
constants, a witness search over level-one domains, a checker for
contradiction traces, and two small classifiers over vector samples.

Producers compute rows with exact arithmetic; checkers recompute every
cited quantity from raw data and never trust a stored value.
"""

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, product

from .blocking import (ClauseRow, GateCheck, InequalityReport, Scene, _clause,
                       check_lemma)
from .config import DEFAULT_CAPS, Caps
from .errors import (BudgetExhausted, EmptyF, FlattenFailed, InputError,
                     InsufficientVectors, NotC0Like, SceneIncomplete,
                     SignCapExceeded, SubsetCapExceeded, TargetUnreachable,
                     TooFewIndices, TraceIncomplete, WindowExhausted)
from .flatten import FlattenResult, flatten
from .norms import (SchreierNorm, diagonal_operator_norm, norm_value,
                    operator_norm, sup_abs)
from .quotient import QuotientModel, min_norm_preimage
from .seqvec import (Blocking, BlockVector, FinVec, as_rat, block_decompose,
                     project, restrict)

# Smallest geometry the ramp search accepts: the first staged index, the
# gap between consecutive ones, and the room the last window needs.  One
# gap must fit the first search attempt (base n+1, widths up to n+6).
FIRST_INDEX = 2
STAGE_GAP = 7
TAIL_ROOM = 6


def _require_family(scene: Scene) -> int:
    count = scene.blocks()
    if not scene.ys:
        raise SceneIncomplete("needs the range family ys")
    if len(scene.ys) != count:
        raise SceneIncomplete(f"{len(scene.ys)} range vectors for {count} blocks")
    if scene.schedule.last_index < count:
        raise InputError(f"schedule stops at {scene.schedule.last_index}, "
                         f"blocking has {count} blocks")
    return count


def _staged_indices(count: int, stages: int) -> tuple[int, ...]:
    """Greedy minimal picks: each consecutive gap hosts one ramp window."""
    need = FIRST_INDEX + STAGE_GAP * (stages - 1) + TAIL_ROOM
    if count < need:
        raise TooFewIndices(
            f"{stages} staged indices need {need} blocks, blocking has {count}")
    return tuple(FIRST_INDEX + STAGE_GAP * i for i in range(stages))


def _combine(vectors, coefficients) -> FinVec:
    total = FinVec({})
    for vec, coef in zip(vectors, coefficients):
        if coef:
            total = total + vec.scale(coef)
    return total


def _operator_bound(model: QuotientModel, caps: Caps) -> Fraction:
    """Exact operator norm, via the diagonal fast path when it applies."""
    mat = model.matrix
    rows, cols = mat.nrows, mat.ncols
    if rows == cols and model.domain_norm == model.codomain_norm:
        off_diagonal = any(mat.entries[r][c] != 0
                           for r in range(rows) for c in range(cols) if r != c)
        if not off_diagonal:
            diag = {i: mat.entries[i - 1][i - 1] for i in range(1, cols + 1)}
            return diagonal_operator_norm(diag, model.domain_norm)
    return operator_norm(model.apply, tuple(range(1, cols + 1)),
                         tuple(range(1, rows + 1)), model.domain_norm,
                         model.codomain_norm, caps).value


def _sign_maximum(vectors, coefficients, spec, caps: Caps) -> Fraction:
    """Largest norm of the sign-flipped combination, modulo a global flip."""
    terms = [v.scale(a) for v, a in zip(vectors, coefficients) if a != 0]
    if not terms:
        raise InputError("sign enumeration needs a nonzero coefficient")
    if len(terms) > caps.sign_vectors:
        raise SignCapExceeded(
            f"{len(terms)} signed terms exceed cap {caps.sign_vectors}")
    best = Fraction(0)
    for signs in product((1, -1), repeat=len(terms) - 1):
        total = terms[0]
        for sign, term in zip(signs, terms[1:]):
            total = total + term if sign > 0 else total - term
        best = max(best, norm_value(total, spec))
    return best


# ---------------------------------------------------------------------------
# staged assembly shared by the extraction and decomposition procedures


@dataclass(frozen=True)
class StageRecord:
    """One gap flattening: the slice's window and its verified result."""

    start: int
    stop: int
    result: FlattenResult

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "stop", int(self.stop))


def _slice_bounds(p: tuple[int, ...], count: int) -> list[tuple[int, int]]:
    """Half-open block ranges [p_i, next) whose union with the head is all."""
    bounds = []
    for i, n in enumerate(p):
        stop = p[i + 1] if i + 1 < len(p) else count + 1
        bounds.append((n, stop))
    return bounds


def _staged_build(scene: Scene, coefficients, p: tuple[int, ...], caps: Caps):
    """Flatten every gap slice of the minimal preimage of the combination.

    Returns the preimage, the per-stage records, the deleted blocks, the
    assembled vector, and its parts between consecutive deleted blocks.
    The combination must be exactly normalized in the codomain.
    """
    count = scene.blocks()
    dom = scene.dom_blocking
    staged = [scene.ys[q - 1] for q in p]
    y = _combine(staged, coefficients)
    ny = scene.cod_norm(y)
    if ny != 1:
        raise InputError(f"staged combination must have norm one, got {ny}")
    x = min_norm_preimage(scene.model, y, caps=caps)
    xbar = project(dom, range(1, p[0]), x)
    records: list[StageRecord] = []
    separators: list[int] = []
    for i, (n, stop) in enumerate(_slice_bounds(p, count)):
        g = project(dom, range(n, stop), x)
        end = stop - 1 if i + 1 < len(p) else count
        try:
            result = flatten(g, scene, n, scene.schedule.eps_at(n),
                             caps=caps, end=end)
        except WindowExhausted as exc:
            raise FlattenFailed(
                f"stage {i + 1} found no ramp window in ({n}, {end})",
                payload={"stage": i + 1, "window": (n, end),
                         "indices": tuple(p), "detail": exc.payload}) from exc
        records.append(StageRecord(n, end, result))
        separators.append(result.deleted_block)
        xbar = xbar + result.flattened
    parts = _cut_parts(dom, xbar, separators)
    return x, tuple(records), tuple(separators), xbar, parts


def _cut_parts(dom: Blocking, xbar: FinVec, separators) -> BlockVector:
    cuts = (0,) + tuple(dom.cuts[r] for r in separators)
    core = restrict(xbar, range(1, cuts[-1] + 1))
    return block_decompose(core, Blocking(cuts))


def _staged_rows(scene: Scene, p, coefficients, x, flattened, separators,
                 parts: BlockVector):
    """Recompute every row of one staged assembly from its raw data.

    Used identically by the producer and the independent checker, so a
    stored certificate can be compared row for row against a recount.
    """
    count = scene.blocks()
    dom, cod = scene.dom_blocking, scene.cod_blocking
    sched = scene.schedule
    model = scene.model
    stages = len(p)
    head = project(dom, range(1, p[0]), x)
    slices = [project(dom, range(n, stop), x)
              for n, stop in _slice_bounds(p, count)]
    xbar = head
    for piece in flattened:
        xbar = xbar + piece

    gates: list[GateCheck] = []
    for i, (g, piece, r) in enumerate(zip(slices, flattened, separators),
                                      start=1):
        over = [c for c, v in piece.items()
                if not (abs(v) <= abs(g[c]) and (v == 0 or g[c] * v > 0))]
        gates.append(GateCheck(
            f"stage {i} stays coefficientwise under its slice", not over,
            f"coordinates {over}" if over else ""))
        deleted = project(dom, (r,), piece)
        gates.append(GateCheck(
            f"stage {i} vanishes on deleted block {r}", deleted.is_zero()))
    interleaved = all(a < b for a, b in zip((1,) + tuple(separators),
                                            tuple(p) + (count + 1,))) \
        and all(q < r for q, r in zip(p, separators))
    gates.append(GateCheck(
        "indices interleave: 1 <= p_1 < r_1 < p_2 < ...", interleaved))
    expected_cuts = (0,) + tuple(dom.cuts[r] for r in separators)
    gates.append(GateCheck("parts are cut at the deleted blocks",
                           parts.blocking.cuts == expected_cuts))
    gates.append(GateCheck("parts exhaust the assembly",
                           parts.sum() == xbar,
                           "mass remains past the last deleted block"
                           if parts.sum() != xbar else ""))

    drift: list[ClauseRow] = []
    for i, (g, piece) in enumerate(zip(slices, flattened), start=1):
        lhs = scene.cod_norm(model.apply(g) - model.apply(piece))
        drift.append(_clause(f"stage {i} image drift", lhs,
                             sched.eps_at(p[i - 1]), (p[i - 1],)))

    interval = check_lemma("1.3", replace(
        scene, coeffs=tuple(coefficients), p_list=tuple(p),
        r_list=(1,) + tuple(separators)))

    claims: list[ClauseRow] = []
    image_x = model.apply(x)
    for i in range(1, stages + 1):
        p_prev = p[i - 2] if i >= 2 else 0
        target = scene.ys[p[i - 1] - 1].scale(coefficients[i - 1])
        lhs = scene.cod_norm(model.apply(parts.part(i)) - target)
        claims.append(_clause(
            f"claim {i}: the part image tracks term {i}", lhs,
            4 * sched.eps_at(p_prev - 1), (p[i - 1],)))

    subclaims: list[ClauseRow] = []
    r_full = (1,) + tuple(separators)
    for i in range(1, stages + 1):
        lo, hi = r_full[i - 1], r_full[i]
        window = tuple(range(lo, hi + 1))
        p_prev = p[i - 2] if i >= 2 else 0
        trio = _combine(
            [head if i == 1 else slices[i - 2],
             slices[i - 1],
             slices[i] if i < stages else FinVec({})], (1, 1, 1))
        trio_bar = _combine(
            [head if i == 1 else flattened[i - 2],
             flattened[i - 1],
             flattened[i] if i < stages else FinVec({})], (1, 1, 1))
        part_image = model.apply(parts.part(i))
        rows = (
            (f"subclaim {i}: distant stages inside [{lo}, {hi}]",
             scene.cod_norm(project(cod, window,
                                    image_x - model.apply(trio))),
             sched.eps_at(lo - 1)),
            (f"subclaim {i}: flattening drift inside [{lo}, {hi}]",
             scene.cod_norm(project(cod, window,
                                    model.apply(trio) - model.apply(trio_bar))),
             sched.eps_at(p_prev - 1)),
            (f"subclaim {i}: neighbour remainder around [{lo}, {hi}]",
             scene.cod_norm(project(cod, window, model.apply(trio_bar))
                            - part_image),
             sched.eps_at(lo - 1)),
            (f"subclaim {i}: the window image tracks part {i}",
             scene.cod_norm(project(cod, window, image_x) - part_image),
             3 * sched.eps_at(p_prev - 1)),
        )
        subclaims.extend(_clause(d, lhs, rhs, (lo, hi)) for d, lhs, rhs in rows)
    return tuple(gates), tuple(drift), interval, tuple(claims), tuple(subclaims)


# ---------------------------------------------------------------------------
# unconditionality extraction and its independent checker


@dataclass(frozen=True)
class UncondRun:
    """One coefficient set's staged assembly with its verified estimates."""

    coefficients: tuple[Fraction, ...]
    separators: tuple[int, ...]
    preimage: FinVec
    stages: tuple[StageRecord, ...]
    parts: BlockVector
    gates: tuple[GateCheck, ...]
    drift: tuple[ClauseRow, ...]
    interval: InequalityReport
    claims: tuple[ClauseRow, ...]
    subclaims: tuple[ClauseRow, ...]
    sign_maximum: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients",
                           tuple(as_rat(c) for c in self.coefficients))
        object.__setattr__(self, "separators",
                           tuple(int(r) for r in self.separators))
        object.__setattr__(self, "sign_maximum", as_rat(self.sign_maximum))

    @property
    def passed(self) -> bool:
        return (all(g.ok for g in self.gates)
                and all(c.ok for c in self.drift)
                and all(rec.result.passed for rec in self.stages)
                and self.interval.passed
                and all(c.ok for c in self.claims)
                and all(c.ok for c in self.subclaims))


@dataclass(frozen=True)
class UncondCertificate:
    """Sign-unconditionality certificate for an extracted subsequence.

    indices are the staged picks; each run binds one coefficient set to
    its full assembly.  measured is the largest signed-combination norm
    over all runs, and the soundness requirement is measured <= bound
    with every stored row strict.  The constructor only normalizes; the
    cross-field requirements live in verify_unconditionality so that a
    tampered certificate can still be built and then flagged.
    """

    indices: tuple[int, ...]
    operator_value: Fraction
    covering: Fraction
    bound: Fraction
    measured: Fraction
    runs: tuple[UncondRun, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(q) for q in self.indices))
        for field in ("operator_value", "covering", "bound", "measured"):
            object.__setattr__(self, field, as_rat(getattr(self, field)))
        object.__setattr__(self, "runs", tuple(self.runs))

    @property
    def passed(self) -> bool:
        return (self.measured <= self.bound
                and bool(self.runs)
                and all(run.passed for run in self.runs))


def extract_unconditional(scene: Scene, coefficient_sets=None,
                          n_indices: int | None = None,
                          caps: Caps = DEFAULT_CAPS) -> UncondCertificate:
    """Extract staged indices and certify sign-unconditional tracking.

    Coefficient sets default to the standard basis vectors, one run per
    staged index; each supplied set needs entries bounded by two and a
    combination of codomain norm exactly one at the chosen indices.
    """
    count = _require_family(scene)
    if coefficient_sets is None:
        stages = 3 if n_indices is None else int(n_indices)
        if stages < 3:
            raise TooFewIndices(f"needs at least three staged indices, got {stages}")
        sets = tuple(tuple(Fraction(int(k == t)) for k in range(stages))
                     for t in range(stages))
    else:
        sets = tuple(tuple(as_rat(c) for c in s) for s in coefficient_sets)
        if not sets:
            raise InputError("needs at least one coefficient set")
        lengths = {len(s) for s in sets}
        if len(lengths) != 1:
            raise InputError("coefficient sets must share one length")
        stages = lengths.pop()
        if n_indices is not None and int(n_indices) != stages:
            raise InputError(
                f"n_indices {n_indices} disagrees with set length {stages}")
        if stages < 3:
            raise TooFewIndices(f"needs at least three staged indices, got {stages}")
        for t, s in enumerate(sets, start=1):
            oversized = [c for c in s if abs(c) > 2]
            if oversized:
                raise InputError(f"coefficient set {t} exceeds two: {oversized}")
    p = _staged_indices(count, stages)
    operator_value = _operator_bound(scene.model, caps)
    covering = scene.model.covering_c
    bound = 1 + covering * operator_value
    staged_ys = [scene.ys[q - 1] for q in p]
    runs = []
    for a in sets:
        x, records, separators, _, parts = _staged_build(scene, a, p, caps)
        gates, drift, interval, claims, subclaims = _staged_rows(
            scene, p, a, x, [rec.result.flattened for rec in records],
            separators, parts)
        sign_max = _sign_maximum(staged_ys, a, scene.model.codomain_norm, caps)
        runs.append(UncondRun(a, separators, x, records, parts, gates, drift,
                              interval, claims, subclaims, sign_max))
    measured = max(run.sign_maximum for run in runs)
    return UncondCertificate(p, operator_value, covering, bound, measured,
                             tuple(runs))


def verify_unconditionality(scene: Scene, certificate: UncondCertificate,
                            caps: Caps = DEFAULT_CAPS) -> InequalityReport:
    """Recompute a certificate row by row; trust nothing stored.

    The verdict is a report whose hypotheses are the structural gates
    (index interleaving, exact preimage replay, stored rows matching the
    recount) and whose clauses are the recomputed estimate rows.
    """
    count = _require_family(scene)
    p = certificate.indices
    gates: list[GateCheck] = []
    clauses: list[ClauseRow] = []
    ascending = all(q1 < q2 for q1, q2 in zip(p, p[1:]))
    gates.append(GateCheck("indices strictly increase within the blocking",
                           bool(p) and ascending and 1 <= p[0]
                           and p[-1] <= count))
    operator_value = _operator_bound(scene.model, caps)
    gates.append(GateCheck(
        "operator value matches a recomputation",
        certificate.operator_value == operator_value,
        f"stored {certificate.operator_value}, recomputed {operator_value}"))
    gates.append(GateCheck(
        "covering constant matches the model",
        certificate.covering == scene.model.covering_c))
    gates.append(GateCheck(
        "bound equals one plus covering times operator value",
        certificate.bound == 1 + certificate.covering * operator_value))
    gates.append(GateCheck("certificate carries at least one run",
                           bool(certificate.runs)))
    if not all(g.ok for g in gates):
        return InequalityReport("unconditionality", tuple(gates), ())

    staged_ys = [scene.ys[q - 1] for q in p]
    sign_maxima = []
    for t, run in enumerate(certificate.runs, start=1):
        tag = f"run {t}"
        if len(run.coefficients) != len(p) or len(run.separators) != len(p) \
                or len(run.stages) != len(p):
            gates.append(GateCheck(f"{tag} matches the index count", False))
            continue
        gates.append(GateCheck(
            f"{tag} coefficients stay bounded by two",
            all(abs(c) <= 2 for c in run.coefficients)))
        combination = _combine(staged_ys, run.coefficients)
        gates.append(GateCheck(
            f"{tag} preimage replays the combination exactly",
            scene.model.apply(run.preimage) == combination))
        stored_seps = tuple(rec.result.deleted_block for rec in run.stages)
        gates.append(GateCheck(
            f"{tag} separators match their stage records",
            stored_seps == run.separators))
        windows_ok = all(
            rec.start == p[i] and rec.stop == (p[i + 1] - 1 if i + 1 < len(p)
                                               else count)
            and rec.start < rec.result.deleted_block <= rec.stop
            and rec.result.threshold == scene.schedule.eps_at(p[i])
            for i, rec in enumerate(run.stages))
        gates.append(GateCheck(
            f"{tag} stage windows follow the staged indices", windows_ok))
        flattened = [rec.result.flattened for rec in run.stages]
        expected_parts = _cut_parts(scene.dom_blocking,
                                    _combine([project(scene.dom_blocking,
                                                      range(1, p[0]),
                                                      run.preimage)]
                                             + flattened,
                                             (1,) * (len(flattened) + 1)),
                                    run.separators)
        gates.append(GateCheck(f"{tag} parts match the recomputation",
                               run.parts == expected_parts))
        re_gates, drift, interval, claims, subclaims = _staged_rows(
            scene, p, run.coefficients, run.preimage, flattened,
            run.separators, expected_parts)
        gates.extend(re_gates)
        stored = (run.drift, run.interval.hypotheses, run.interval.clauses,
                  run.claims, run.subclaims)
        recomputed = (drift, interval.hypotheses, interval.clauses,
                      claims, subclaims)
        gates.append(GateCheck(f"{tag} stored rows match the recount",
                               stored == recomputed))
        sign_max = _sign_maximum(staged_ys, run.coefficients,
                                 scene.model.codomain_norm, caps)
        sign_maxima.append(sign_max)
        gates.append(GateCheck(
            f"{tag} sign maximum matches the enumeration",
            run.sign_maximum == sign_max,
            f"stored {run.sign_maximum}, recomputed {sign_max}"))
        for rec in run.stages:
            clauses.extend(rec.result.estimates)
        clauses.extend(drift)
        clauses.extend(interval.clauses)
        clauses.extend(claims)
        clauses.extend(subclaims)
    if sign_maxima:
        measured = max(sign_maxima)
        gates.append(GateCheck(
            "measured equals the largest run sign maximum",
            certificate.measured == measured,
            f"stored {certificate.measured}, recomputed {measured}"))
        gates.append(GateCheck(
            "measured stays at or below the bound",
            measured <= certificate.bound,
            f"measured {measured}, bound {certificate.bound}"))
    return InequalityReport("unconditionality", tuple(gates), tuple(clauses))


# ---------------------------------------------------------------------------
# bounded decomposition of a combination's preimage


@dataclass(frozen=True)
class DecompositionResult:
    """Block decomposition x = sum x_i with per-term image tracking.

    separators start with the convention r_0 = 0; part i is supported
    strictly between the separators r_{i-1} and r_i in block terms.
    scale is the codomain norm of the requested combination, zero for
    the vacuous case.
    """

    indices: tuple[int, ...]
    separators: tuple[int, ...]
    parts: tuple[FinVec, ...]
    total: FinVec
    scale: Fraction
    gates: tuple[GateCheck, ...]
    rows: tuple[ClauseRow, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(q) for q in self.indices))
        object.__setattr__(self, "separators",
                           tuple(int(r) for r in self.separators))
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "scale", as_rat(self.scale))

    @property
    def passed(self) -> bool:
        return all(g.ok for g in self.gates) and all(c.ok for c in self.rows)


def prop19_decompose(scene: Scene, coefficients, targets=None,
                     caps: Caps = DEFAULT_CAPS) -> DecompositionResult:
    """Split the minimal preimage of a small combination into tracked blocks.

    The combination over the staged picks must have codomain norm at
    most two.  Each returned part's image is compared against its term
    with a strict per-term target (the schedule values by default), and
    the total is gated at twice the covering constant.
    """
    count = _require_family(scene)
    a = tuple(as_rat(c) for c in coefficients)
    if not a:
        raise InputError("needs at least one coefficient")
    stages = len(a)
    p = _staged_indices(count, stages)
    if targets is None:
        targets = tuple(scene.schedule.eps_at(i) for i in range(1, stages + 1))
    else:
        targets = tuple(as_rat(t) for t in targets)
        if len(targets) != stages:
            raise InputError("one target per coefficient")
    staged_ys = [scene.ys[q - 1] for q in p]
    y = _combine(staged_ys, a)
    ny = scene.cod_norm(y)
    if ny == 0:
        zero = FinVec({})
        gate = GateCheck("combination vanishes, decomposition is vacuous", True)
        return DecompositionResult(p, (0,) + tuple(q + 1 for q in p),
                                   (zero,) * stages, zero, ny, (gate,), ())
    if ny > 2:
        raise InputError(f"combination norm {ny} exceeds two")
    unit = tuple(c / ny for c in a)
    x, records, separators, xbar, unit_parts = _staged_build(scene, unit, p,
                                                             caps)
    build_gates, drift, interval, _, _ = _staged_rows(
        scene, p, unit, x, [rec.result.flattened for rec in records],
        separators, unit_parts)
    parts = tuple(unit_parts.part(i).scale(ny) for i in range(1, stages + 1))
    total = _combine(parts, (1,) * stages)
    covering = scene.model.covering_c
    total_norm = scene.dom_norm(total)
    gates = list(build_gates)
    gates.append(GateCheck(
        "total stays within twice the covering constant",
        total_norm <= 2 * covering,
        f"norm {total_norm}, cap {2 * covering}"))
    blocks_ok = True
    previous = 0
    for part in parts:
        if part.is_zero():
            continue
        if part.min_index() <= previous:
            blocks_ok = False
            break
        previous = part.max_index()
    gates.append(GateCheck("parts form a block basis", blocks_ok))
    for i, (part, r) in enumerate(zip(parts, separators), start=1):
        on_sep = project(scene.dom_blocking, (r,), part)
        gates.append(GateCheck(
            f"part {i} avoids separator block {r}", on_sep.is_zero()))
    gates.append(GateCheck("interval report hypotheses hold",
                           interval.hypotheses_ok))
    rows = list(drift) + list(interval.clauses)
    for i in range(1, stages + 1):
        target_vec = staged_ys[i - 1].scale(a[i - 1])
        lhs = scene.cod_norm(scene.model.apply(parts[i - 1]) - target_vec)
        rows.append(_clause(f"term {i} image error within its target",
                            lhs, targets[i - 1], (p[i - 1],)))
    return DecompositionResult(p, (0,) + tuple(separators), parts, total, ny,
                               tuple(gates), tuple(rows))


# ---------------------------------------------------------------------------
# fixed-point probe for c0-like range families


@dataclass(frozen=True)
class C0FixReport:
    """Depth-indexed decompositions with stabilization and exact fixes."""

    depths: tuple[int, ...]
    indices: tuple[int, ...]
    runs: tuple[DecompositionResult, ...]
    stabilized: bool
    stability_note: str
    uniform_bound: Fraction
    corrected: tuple[FinVec, ...]
    gates: tuple[GateCheck, ...]
    rows: tuple[ClauseRow, ...]

    @property
    def passed(self) -> bool:
        return (self.stabilized and all(run.passed for run in self.runs)
                and all(g.ok for g in self.gates)
                and all(c.ok for c in self.rows))


def _c0_condition_patterns(depth: int):
    patterns = []
    for k in range(1, depth + 1):
        patterns.append(tuple(1 if i < k else 0 for i in range(depth)))
        patterns.append(tuple((-1) ** i if i < k else 0 for i in range(depth)))
    for i in range(depth):
        patterns.append(tuple(int(j == i) for j in range(depth)))
    seen: list[tuple[int, ...]] = []
    for pat in patterns:
        if pat not in seen:
            seen.append(pat)
    return seen


def c0_fix_probe(scene: Scene, depths, caps: Caps = DEFAULT_CAPS) -> C0FixReport:
    """Decompose at several depths and test coordinatewise stabilization.

    The staged picks are nested across depths, so separators and parts
    of a shallower run should reappear verbatim in a deeper one; the
    corrected preimages from the deepest run hit their vectors exactly.
    """
    count = _require_family(scene)
    ds = tuple(sorted({int(d) for d in depths}))
    if not ds:
        raise InputError("needs at least one depth")
    if ds[0] < 1:
        raise InputError("depths start at one")
    deepest = ds[-1]
    p = _staged_indices(count, deepest)
    picked = [scene.ys[q - 1] for q in p]
    for pattern in _c0_condition_patterns(deepest):
        value = scene.cod_norm(_combine(picked, pattern))
        if not Fraction(1, 2) <= value <= 2:
            raise NotC0Like(
                f"sampled combination norm {value} leaves [1/2, 2]",
                payload={"coefficients": pattern, "value": value})
    runs = tuple(prop19_decompose(scene, (1,) * d, caps=caps) for d in ds)
    stabilized = True
    note = ""
    for shallow, deep in zip(runs, runs[1:]):
        width = len(shallow.indices)
        if shallow.separators[1:] != deep.separators[1:width + 1]:
            stabilized = False
            note = (f"separators at depth {width} drift: "
                    f"{shallow.separators[1:]} vs {deep.separators[1:width + 1]}")
            break
        if shallow.parts != deep.parts[:width]:
            stabilized = False
            note = f"parts at depth {width} drift"
            break
    uniform = max(scene.dom_norm(run.total) for run in runs)
    covering = scene.model.covering_c
    gates = [GateCheck("uniform bound within twice the covering",
                       uniform <= 2 * covering,
                       f"bound {uniform}, cap {2 * covering}")]
    rows: list[ClauseRow] = []
    corrected = []
    final = runs[-1]
    for i in range(1, deepest + 1):
        residual = picked[i - 1] - scene.model.apply(final.parts[i - 1])
        omega = FinVec({}) if residual.is_zero() else \
            min_norm_preimage(scene.model, residual, caps=caps)
        fixed = final.parts[i - 1] + omega
        corrected.append(fixed)
        gates.append(GateCheck(
            f"corrected preimage {i} hits its vector exactly",
            scene.model.apply(fixed) == picked[i - 1]))
        rows.append(_clause(f"correction {i} stays within budget",
                            scene.dom_norm(omega),
                            covering * scene.schedule.eps_at(i), (i,)))
    return C0FixReport(ds, p, runs, stabilized, note, uniform,
                       tuple(corrected), tuple(gates), tuple(rows))


# ---------------------------------------------------------------------------
# hierarchical averages and c0 equivalence constants


@dataclass(frozen=True)
class AverageTree:
    """Recipe for a hierarchical average over a vector family.

    A level-one tree names family positions and a positive scaling; a
    deeper tree averages child trees one level down.  Scalings multiply
    down the branches when recipes are evaluated.
    """

    level: int
    scaling: Fraction
    members: tuple[int, ...] = ()
    children: tuple["AverageTree", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "level", int(self.level))
        object.__setattr__(self, "scaling", as_rat(self.scaling))
        object.__setattr__(self, "members",
                           tuple(int(i) for i in self.members))
        object.__setattr__(self, "children", tuple(self.children))
        if self.level < 1:
            raise InputError("tree level starts at one")
        if self.scaling <= 0:
            raise InputError("scaling must be positive")
        if self.level == 1:
            if self.children:
                raise InputError("level-one trees have no children")
            if not self.members:
                raise EmptyF("level-one tree needs a nonempty index set")
            if len(set(self.members)) != len(self.members):
                raise InputError(f"repeated indices in {self.members}")
        else:
            if self.members:
                raise InputError("deeper trees average children, not indices")
            if not self.children:
                raise EmptyF("deeper tree needs at least one child")
            off = [c.level for c in self.children if c.level != self.level - 1]
            if off:
                raise InputError(f"children must sit one level down, got {off}")


def build_average(xs, tree: AverageTree, spec,
                  caps: Caps = DEFAULT_CAPS) -> FinVec:
    """Evaluate an average recipe over the family xs.

    Children of a deeper tree must evaluate to norm exactly one and form
    a block basis in order; the scaling of every node is applied here,
    so recipes carry plain index sets and no prescaled vectors.
    """
    vectors = tuple(xs)
    if tree.level == 1:
        total = FinVec({})
        for i in tree.members:
            if not 1 <= i <= len(vectors):
                raise InputError(
                    f"index {i} outside the family of {len(vectors)}")
            total = total + vectors[i - 1]
        return total.scale(tree.scaling)
    values = [build_average(vectors, child, spec, caps)
              for child in tree.children]
    reach = 0
    for k, value in enumerate(values, start=1):
        norm = norm_value(value, spec)
        if norm != 1:
            raise InputError(f"child {k} must be normalized, has norm {norm}")
        if value.min_index() <= reach:
            raise InputError("children must form a block basis in order")
        reach = value.max_index()
    return _combine(values, (1,) * len(values)).scale(tree.scaling)


def c0_equiv_constant(bs, spec, caps: Caps = DEFAULT_CAPS) -> Fraction:
    """Worst subset-sum norm against the smallest single norm.

    For one-unconditional norms this is the two-sided equivalence
    constant of the family with the disjointly-supported unit family.
    Exhaustive over nonempty subsets, so the family size is capped.
    """
    vectors = tuple(bs)
    if not vectors:
        raise InputError("needs at least one vector")
    if len(vectors) > caps.subset_vectors:
        raise SubsetCapExceeded(
            f"{len(vectors)} vectors exceed cap {caps.subset_vectors}")
    norms = [norm_value(v, spec) for v in vectors]
    floor = min(norms)
    if floor == 0:
        raise InputError("every vector must be nonzero")
    best = Fraction(0)
    for size in range(1, len(vectors) + 1):
        for combo in combinations(range(len(vectors)), size):
            total = _combine([vectors[i] for i in combo], (1,) * size)
            best = max(best, norm_value(total, spec))
    return best / floor


# ---------------------------------------------------------------------------
# saturation: witness search and contradiction checking


@dataclass(frozen=True)
class SaturationWitness:
    """A block family of averages with its measured equivalence constant."""

    averages: tuple[FinVec, ...]
    trees: tuple[AverageTree, ...]
    constant: Fraction
    target: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "averages", tuple(self.averages))
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "constant", as_rat(self.constant))
        object.__setattr__(self, "target", as_rat(self.target))


@dataclass(frozen=True)
class ContradictionTrace:
    """Raw quantities for the counting argument's bookkeeping check.

    Companion vectors come in matched lists of length 2m: range vectors
    z_i, preimages x_i, and corrections omega_i, plus a correction
    budget eps_i per position.  deep_indices are the flagged positions
    in flag order; delta is the deep mass bound and lam the averaging
    scale of the window combinations.
    """

    delta: Fraction
    m: int
    lam: Fraction
    zs: tuple[FinVec, ...]
    xs: tuple[FinVec, ...]
    omegas: tuple[FinVec, ...]
    deep_indices: tuple[int, ...]
    eps: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", as_rat(self.delta))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "lam", as_rat(self.lam))
        object.__setattr__(self, "zs", tuple(self.zs))
        object.__setattr__(self, "xs", tuple(self.xs))
        object.__setattr__(self, "omegas", tuple(self.omegas))
        object.__setattr__(self, "deep_indices",
                           tuple(int(i) for i in self.deep_indices))
        object.__setattr__(self, "eps", tuple(as_rat(e) for e in self.eps))


@dataclass(frozen=True)
class SaturationReport:
    """Exactly one arm: a constructive witness or a contradiction trace."""

    witness: SaturationWitness | None = None
    trace: ContradictionTrace | None = None

    def __post_init__(self) -> None:
        if (self.witness is None) == (self.trace is None):
            raise InputError("exactly one of witness and trace must be set")


def _doubling_family(vectors, skip: int):
    """Consecutive chunks of doubling size starting past the skip."""
    trees = []
    position = skip + 1
    size = 1
    while position + size - 1 <= len(vectors):
        members = tuple(range(position, position + size))
        trees.append(AverageTree(1, Fraction(1, size), members))
        position += size
        size *= 2
    return trees


def s1_witness_search(model: QuotientModel, ys, budget: int,
                      target=Fraction(2),
                      caps: Caps = DEFAULT_CAPS) -> SaturationReport:
    """Greedy search for an average family equivalent to the unit family.

    Candidates are the normalized singletons first, then families of
    consecutive doubling-size averages with ever deeper starts.  Each
    candidate evaluation spends one unit of budget; the first family
    whose measured constant stays within the target wins.
    """
    dom = model.domain_norm
    if not isinstance(dom, SchreierNorm) or dom.level != 1:
        raise InputError("search needs a level-one hierarchical domain norm")
    vectors = tuple(ys)
    if not vectors:
        raise InputError("needs a nonempty family")
    for k, v in enumerate(vectors, start=1):
        if v.is_zero():
            raise InputError(f"family vector {k} is zero")
    target = as_rat(target)
    budget = int(budget)
    spec = model.codomain_norm
    state = {"evaluated": 0, "constant": None, "family": ()}

    def consider(trees):
        if len(trees) < 2:
            return None
        averages = []
        reach = 0
        for tree in trees:
            value = build_average(vectors, tree, spec, caps)
            if value.is_zero() or value.min_index() <= reach:
                return None
            reach = value.max_index()
            averages.append(value)
        if state["evaluated"] >= budget:
            raise BudgetExhausted(
                "search budget exhausted before the target",
                payload={"evaluated": state["evaluated"],
                         "best_constant": state["constant"],
                         "best": state["family"]})
        state["evaluated"] += 1
        constant = c0_equiv_constant(averages, spec, caps)
        if state["constant"] is None or constant < state["constant"]:
            state["constant"] = constant
            state["family"] = tuple(averages)
        if constant <= target:
            return SaturationReport(witness=SaturationWitness(
                tuple(averages), tuple(trees), constant, target))
        return None

    family_cap = min(len(vectors), 8)
    singletons = tuple(
        AverageTree(1, 1 / norm_value(v, spec), (i,))
        for i, v in enumerate(vectors[:family_cap], start=1)
        if norm_value(v, spec) > 0)
    found = consider(singletons)
    if found is not None:
        return found
    for skip in range(len(vectors)):
        trees = _doubling_family(vectors, skip)
        if len(trees) < 2:
            break
        found = consider(tuple(trees))
        if found is not None:
            return found
    raise BudgetExhausted(
        "no candidate family reached the target",
        payload={"evaluated": state["evaluated"],
                 "best_constant": state["constant"],
                 "best": state["family"]})


def theorem_b_contradiction_check(model: QuotientModel, trace,
                                  caps: Caps = DEFAULT_CAPS
                                  ) -> InequalityReport:
    """Replay the counting argument's bookkeeping on a supplied trace.

    Every cited quantity is recomputed from the trace's vectors with the
    model's norms.  The two terminal rows are oriented as the escape:
    they hold exactly when the bookkeeping has driven the combined
    preimage past the covering ceiling, so a verdict of pass means the
    trace exhibits the contradiction.
    """
    if isinstance(trace, SaturationReport):
        if trace.trace is None:
            raise TraceIncomplete("report carries no contradiction trace")
        trace = trace.trace
    dom = model.domain_norm
    if not isinstance(dom, SchreierNorm) or dom.level != 1:
        raise InputError("the deep-mass step needs a level-one domain norm")
    if trace.m <= 0:
        raise TraceIncomplete("m must be positive")
    if trace.delta <= 0 or trace.lam <= 0:
        raise TraceIncomplete("delta and lam must be positive")
    width = 2 * trace.m
    for name, seq in (("zs", trace.zs), ("xs", trace.xs),
                      ("omegas", trace.omegas), ("eps", trace.eps)):
        if len(seq) != width:
            raise TraceIncomplete(f"{name} must list {width} entries, "
                                  f"got {len(seq)}")
    if not trace.deep_indices:
        raise TraceIncomplete("no flagged indices supplied")
    if any(e <= 0 for e in trace.eps):
        raise TraceIncomplete("every correction budget must be positive")
    rows_max = model.matrix.nrows
    cols_max = model.matrix.ncols
    for k, z in enumerate(trace.zs, start=1):
        if not z.is_zero() and z.max_index() > rows_max:
            raise TraceIncomplete(f"range vector {k} leaves the codomain")
    for k, (x, w) in enumerate(zip(trace.xs, trace.omegas), start=1):
        top = max(x.max_index() if not x.is_zero() else 0,
                  w.max_index() if not w.is_zero() else 0)
        if top > cols_max:
            raise TraceIncomplete(f"preimage pair {k} leaves the domain")
    if any(not 1 <= i <= width for i in trace.deep_indices):
        raise TraceIncomplete("flagged indices leave the window")

    covering = model.covering_c
    delta, m, lam = trace.delta, trace.m, trace.lam
    flagged = trace.deep_indices
    gates: list[GateCheck] = []
    clauses: list[ClauseRow] = []

    distinct = len(set(flagged)) == len(flagged)
    gates.append(GateCheck("flagged indices are distinct and number m",
                           distinct and len(flagged) == m,
                           f"{len(flagged)} flags for m = {m}"))
    windows = []
    for k in range(len(flagged)):
        removed = set(flagged[:k])
        windows.append(tuple(i for i in range(1, width + 1)
                             if i not in removed))
    gates.append(GateCheck("every window keeps at least m members",
                           all(len(w) >= m for w in windows)))
    exact = all(model.apply(x + w) == z
                for x, w, z in zip(trace.xs, trace.omegas, trace.zs))
    gates.append(GateCheck("corrected preimages hit their vectors exactly",
                           exact))
    reach = 0
    blocks_ok = True
    for x in trace.xs:
        if x.is_zero():
            continue
        if x.min_index() <= reach:
            blocks_ok = False
            break
        reach = x.max_index()
    gates.append(GateCheck("preimages form a block basis", blocks_ok))

    ordered = sorted(flagged,
                     key=lambda i: trace.xs[i - 1].min_index()
                     if not trace.xs[i - 1].is_zero() else 0)
    deep_half = ordered[len(ordered) // 2:]
    tops = []
    tops_ok = True
    for i in deep_half:
        x = trace.xs[i - 1]
        if x.is_zero():
            tops_ok = False
            break
        peak = sup_abs(x)
        tops.append(min(c for c, v in x.items() if abs(v) == peak))
    admissible = tops_ok and len(set(tops)) == len(tops) \
        and (not tops or len(tops) <= min(tops))
    gates.append(GateCheck(
        "flagged top coordinates form an admissible set", admissible,
        f"coordinates {sorted(tops)}" if tops else "a flagged block is zero"))
    deep_sum = sum((sup_abs(trace.xs[i - 1]) for i in deep_half), Fraction(0))
    total_x = _combine(trace.xs, (1,) * width)
    norm_x = norm_value(total_x, dom)
    gates.append(GateCheck(
        "deep sup mass is dominated by the combined norm",
        deep_sum <= norm_x, f"mass {deep_sum}, norm {norm_x}"))

    clauses.append(_clause("(2.1) correction budgets stay summable",
                           sum(trace.eps, Fraction(0)),
                           min(delta / (2 * covering), Fraction(1))))
    clauses.append(_clause("(2.2) the flag count clears the threshold",
                           8 * covering / delta, Fraction(m)))
    for k, window in enumerate(windows, start=1):
        value = lam * norm_value(
            _combine([trace.zs[i - 1] for i in window], (1,) * len(window)),
            model.codomain_norm)
        clauses.append(_clause(f"(2.3) window {k} keeps its floor",
                               Fraction(1, 3), value, tuple(window[:1])))
        clauses.append(_clause(f"(2.3) window {k} keeps its ceiling",
                               value, Fraction(2), tuple(window[:1])))
        combined = _combine([trace.xs[i - 1] + trace.omegas[i - 1]
                             for i in window], (1,) * len(window))
        clauses.append(_clause(f"window {k} keeps sup mass above the bound",
                               delta, sup_abs(combined)))
    for i in range(1, width + 1):
        clauses.append(_clause(f"correction {i} stays within budget",
                               norm_value(trace.omegas[i - 1], dom),
                               covering * trace.eps[i - 1], (i,)))
    total_omega = _combine(trace.omegas, (1,) * width)
    clauses.append(_clause("corrections stay below half the deep bound",
                           norm_value(total_omega, dom), delta / 2))
    clauses.append(_clause("combined preimages stay within three coverings",
                           norm_value(total_x + total_omega, dom),
                           3 * covering))
    for k, i in enumerate(flagged, start=1):
        clauses.append(_clause(f"flagged block {i} carries half the deep mass",
                               delta / 2, sup_abs(trace.xs[i - 1]), (i,)))
    clauses.append(_clause("deep half outweighs the pigeonhole floor",
                           delta * m / 4, deep_sum))
    clauses.append(_clause(
        "CONTRADICTION: the covering ceiling falls below the deep floor",
        2 * covering, delta * m / 4))
    clauses.append(_clause(
        "CONTRADICTION: the combined norm escapes the covering ceiling",
        2 * covering, norm_x))
    return InequalityReport("saturation-contradiction", tuple(gates),
                            tuple(clauses))


# ---------------------------------------------------------------------------
# sample classifiers


@dataclass(frozen=True)
class SpreadingRow:
    """One evaluated tuple: start position, member positions, norm value."""

    start: int
    positions: tuple[int, ...]
    value: Fraction


@dataclass(frozen=True)
class SpreadingReport:
    """Classification of k-fold sums over deepening starts."""

    classification: str
    scale: Fraction
    k: int
    rows: tuple[SpreadingRow, ...]


def spreading_probe(xs, spec, k: int, start_depths=(1,),
                    caps: Caps = DEFAULT_CAPS,
                    l1_floor=Fraction(1, 3),
                    c0_bound=Fraction(2)) -> SpreadingReport:
    """Classify k-fold sums as bounded, proportional to k, or neither.

    For every start both the consecutive tuple and, when it fits, the
    stride-two tuple are summed and measured.  Bounded values mean a
    c0-like family, a scale min/k above the floor means summing like
    absolute coefficients, anything else is inconclusive.
    """
    vectors = tuple(xs)
    k = int(k)
    if k < 1:
        raise InputError("tuple length starts at one")
    starts = tuple(sorted({int(s) for s in start_depths}))
    if not starts or starts[0] < 1:
        raise InputError("start depths begin at one")
    l1_floor = as_rat(l1_floor)
    c0_bound = as_rat(c0_bound)
    deepest_need = starts[-1] + k - 1
    if deepest_need > len(vectors):
        raise InsufficientVectors(
            f"start {starts[-1]} needs {deepest_need} vectors, "
            f"have {len(vectors)}")
    rows: list[SpreadingRow] = []
    for s in starts:
        consecutive = tuple(range(s, s + k))
        value = norm_value(
            _combine([vectors[i - 1] for i in consecutive], (1,) * k), spec)
        rows.append(SpreadingRow(s, consecutive, value))
        strided = tuple(s + 2 * j for j in range(k))
        if strided[-1] <= len(vectors) and strided != consecutive:
            value = norm_value(
                _combine([vectors[i - 1] for i in strided], (1,) * k), spec)
            rows.append(SpreadingRow(s, strided, value))
    values = [row.value for row in rows]
    scale = min(values) / k
    if max(values) <= c0_bound:
        classification = "c0-like"
    elif scale >= l1_floor:
        classification = "l1-like"
    else:
        classification = "inconclusive"
    return SpreadingReport(classification, scale, k, tuple(rows))


@dataclass(frozen=True)
class SubseqSelection:
    """Accepted positions with the measured equivalence constant."""

    positions: tuple[int, ...]
    vectors: tuple[FinVec, ...]
    constant: Fraction
    target: Fraction


def c0_subseq_select(xs, sup_bounds, target,
                     spec: SchreierNorm = SchreierNorm(1),
                     caps: Caps = DEFAULT_CAPS) -> SubseqSelection:
    """Select a block subsequence whose equivalence constant meets a target.

    Acceptance uses the declared sup bounds: a candidate joins when, for
    every member j, an admissible set meeting member j first captures at
    most norm_j plus reach_j times the later sup bounds, and that stays
    within target times the smallest member norm.  The final constant is
    then measured exactly on the accepted family.
    """
    vectors = tuple(xs)
    bounds = tuple(as_rat(b) for b in sup_bounds)
    target = as_rat(target)
    if not vectors:
        raise InputError("needs at least one vector")
    if len(bounds) != len(vectors):
        raise InputError("one sup bound per vector")
    for n, (v, b) in enumerate(zip(vectors, bounds), start=1):
        if v.is_zero():
            raise InputError(f"vector {n} is zero")
        peak = sup_abs(v)
        if peak > b:
            raise InputError(f"vector {n} tops its sup bound: {peak} > {b}")
    if len(vectors) == 1:
        return SubseqSelection((1,), vectors,
                               c0_equiv_constant(vectors, spec, caps), target)
    norms = {0: norm_value(vectors[0], spec)}
    picks = [0]

    def acceptable(candidate: int) -> bool:
        family = picks + [candidate]
        floor = min(norms[i] for i in family)
        for pos, j in enumerate(family):
            tail = sum((bounds[l] for l in family[pos + 1:]), Fraction(0))
            reach = vectors[j].max_index()
            if norms[j] + reach * tail > target * floor:
                return False
        return True

    for n in range(1, len(vectors)):
        v = vectors[n]
        if v.min_index() <= vectors[picks[-1]].max_index():
            continue
        norms[n] = norm_value(v, spec)
        if acceptable(n):
            picks.append(n)
    if len(picks) < 2:
        constant = c0_equiv_constant([vectors[0]], spec, caps)
        raise TargetUnreachable(
            f"no block subsequence stays within {target}",
            payload={"positions": (1,), "constant": constant})
    chosen = tuple(vectors[i] for i in picks)
    constant = c0_equiv_constant(chosen, spec, caps)
    return SubseqSelection(tuple(i + 1 for i in picks), chosen, constant,
                           target)
