"""Ramp flattening: adjacent image parts, small averages, block deletion.

Given an argument split along domain blocks, each block's image under a
two-diagonal operator lands in its own codomain block and the one before
it.  Averaging the early parts over well-chosen index sets makes them
cheap to discard, and a ramp of [0, 1] coefficients then deletes a whole
block of the argument while moving the image by less than a requested
threshold.  The searches return certified outcomes either way: a success
carries the exact average it achieved, and a failure carries the minimal
average observed, which witnesses summing behavior over the searched
family.  The flattening itself replays the full estimate decomposition
clause by clause before reporting success.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .blocking import ClauseRow, Scene, _clause
from .config import Caps, DEFAULT_CAPS
from .errors import (CapExceeded, EmptyWindow, Error, InputError,
                     PlanIncompatible, WindowExhausted)
from .norms import norm_value, operator_norm
from .quotient import QuotientModel
from .seqvec import (Blocking, BlockVector, CombCoefficients, FinVec, as_rat,
                     block_decompose, comb_scale, restrict)


# ---------------------------------------------------------------------------
# adjacent image parts


@dataclass(frozen=True)
class ABParts:
    """Adjacent image parts of a blockwise argument.

    The image of block t's part occupies codomain blocks t and t - 1 up
    to certified decay.  early[t - 1] is the portion of block (t+1)'s
    image landing one block early, in codomain block t; aligned[t - 1]
    is the portion of block t's image landing on its own block t.  Both
    are exact projections, so the support invariants hold structurally.
    """

    early: tuple[FinVec, ...]      # index t: mass of part t+1 in block t
    aligned: tuple[FinVec, ...]    # index t: mass of part t in block t

    def early_at(self, t: int) -> FinVec:
        if not 1 <= t <= len(self.early):
            raise InputError(f"early part {t} outside 1..{len(self.early)}")
        return self.early[t - 1]

    def aligned_at(self, t: int) -> FinVec:
        if not 1 <= t <= len(self.aligned):
            raise InputError(f"aligned part {t} outside 1..{len(self.aligned)}")
        return self.aligned[t - 1]


def ab_parts(x: BlockVector, model: QuotientModel,
             cod_blocking: Blocking) -> ABParts:
    """Exact early and aligned projections of each block image."""
    count = x.blocking.length
    if cod_blocking.length != count:
        raise InputError("domain and codomain blockings need equally many blocks")
    if x.blocking.top != model.matrix.ncols:
        raise InputError("argument blocking does not fit the matrix columns")
    if cod_blocking.top != model.matrix.nrows:
        raise InputError("codomain blocking does not fit the matrix rows")
    early: list[FinVec] = []
    aligned: list[FinVec] = []
    for t in range(1, count + 1):
        img = model.apply(x.part(t))
        aligned.append(restrict(img, cod_blocking.block(t)))
        if t >= 2:
            early.append(restrict(img, cod_blocking.block(t - 1)))
    return ABParts(tuple(early), tuple(aligned))


# ---------------------------------------------------------------------------
# small-average search


@dataclass(frozen=True)
class SmallAverage:
    """Index set whose averaged part sum is strictly below the threshold."""

    indices: tuple[int, ...]
    value: Fraction
    threshold: Fraction


@dataclass(frozen=True)
class AverageFailure:
    """Certificate that no searched average dipped below the threshold.

    Over every index set the search visited, the averaged norm stayed at
    or above min_value >= threshold: on this finite family the parts sum
    like a basis of absolutely summing coefficients rather than averaging
    out, which is the legitimate negative outcome at a finite truncation.
    """

    min_value: Fraction
    witness: tuple[int, ...]
    threshold: Fraction
    sets_searched: int


def find_small_average(parts: Sequence[FinVec], threshold, spec,
                       window: tuple[int, int],
                       caps: Caps = DEFAULT_CAPS
                       ) -> "SmallAverage | AverageFailure":
    """Search for indices whose averaged part sum drops below the threshold.

    Candidates are the 1-based part indices strictly inside the window.
    Consecutive runs are tried first with growing length (the averaging
    that cancellation or disjointness rewards), then all small subsets up
    to size four.  The first strict success is returned; otherwise the
    minimal observed average and its witness form the failure certificate.
    """
    threshold = as_rat(threshold)
    if threshold <= 0:
        raise InputError(f"threshold must be positive, got {threshold}")
    lo, hi = window
    if lo < 0 or hi > len(parts) + 1:
        raise InputError(
            f"window ({lo}, {hi}) leaves the part list of length {len(parts)}")
    candidates = list(range(lo + 1, hi))
    if not candidates:
        raise EmptyWindow(f"window ({lo}, {hi}) holds no part indices")
    searched = 0
    best: Fraction | None = None
    best_witness: tuple[int, ...] = ()

    def average(idxs: tuple[int, ...]):
        nonlocal searched, best, best_witness
        searched += 1
        if searched > caps.search_nodes:
            raise CapExceeded("average search exceeded its node budget")
        total = FinVec.zero()
        for i in idxs:
            total = total + parts[i - 1]
        val = norm_value(total, spec) / len(idxs)
        if best is None or val < best:
            best, best_witness = val, idxs
        return val

    for k in range(1, len(candidates) + 1):
        for s in range(len(candidates) - k + 1):
            idxs = tuple(candidates[s:s + k])
            val = average(idxs)
            if val < threshold:
                return SmallAverage(idxs, val, threshold)
    for k in range(2, min(4, len(candidates)) + 1):
        for combo in combinations(candidates, k):
            val = average(combo)
            if val < threshold:
                return SmallAverage(combo, val, threshold)
    return AverageFailure(best, best_witness, threshold, searched)


def alternating_sum_audit(parts: Sequence[FinVec], window: tuple[int, int],
                          spec, caps: Caps = DEFAULT_CAPS
                          ) -> tuple[Fraction, tuple[int, ...]]:
    """Largest alternating-sum norm over even-length consecutive runs.

    When no small average exists, the parts behave like a summing basis,
    and the proof route out of that situation hinges on an alternating
    sum exceeding what the operator norm permits.  This audit computes
    the largest such sum in the window so callers can confirm it stays
    within the permitted bound.
    """
    lo, hi = window
    candidates = [i for i in range(lo + 1, hi) if 1 <= i <= len(parts)]
    best = Fraction(0)
    witness: tuple[int, ...] = ()
    count = 0
    for k in range(2, len(candidates) + 1, 2):
        for s in range(len(candidates) - k + 1):
            count += 1
            if count > caps.search_nodes:
                raise CapExceeded("alternating audit exceeded its node budget")
            idxs = tuple(candidates[s:s + k])
            total = FinVec.zero()
            for pos, i in enumerate(idxs):
                if pos % 2 == 0:
                    total = total + parts[i - 1]
                else:
                    total = total - parts[i - 1]
            val = norm_value(total, spec)
            if val > best:
                best, witness = val, idxs
    return best, witness


# ---------------------------------------------------------------------------
# ramp construction


@dataclass(frozen=True)
class RampPlan:
    """Coefficient plan: step down over one index list, back up over another.

    Blocks up to the first down step keep coefficient 1; each down step
    lowers it by 1/k until it reaches 0, which holds until the first up
    step; each up step raises it by 1/K; blocks past the last up step are
    back at 1.  Everything happens strictly inside the window.
    """

    window: tuple[int, int]
    down_steps: tuple[int, ...]
    up_steps: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "window",
                           (int(self.window[0]), int(self.window[1])))
        object.__setattr__(self, "down_steps",
                           tuple(int(i) for i in self.down_steps))
        object.__setattr__(self, "up_steps",
                           tuple(int(i) for i in self.up_steps))
        n, m = self.window
        if not self.down_steps or not self.up_steps:
            raise InputError("both step lists must be nonempty")
        for name, steps in (("down", self.down_steps), ("up", self.up_steps)):
            if any(b <= a for a, b in zip(steps, steps[1:])):
                raise InputError(f"{name} steps must strictly increase")
        if n < 0:
            raise InputError(f"window start must be >= 0, got {n}")
        if not n < self.down_steps[0]:
            raise InputError("down steps must start inside the window")
        if not self.down_steps[-1] < self.up_steps[0]:
            raise InputError("up steps must come after every down step")
        if not self.up_steps[-1] < m:
            raise InputError("up steps must end inside the window")

    @property
    def deleted_block(self) -> int:
        # first block of the zero stretch (down_steps[-1], up_steps[0]]
        return self.down_steps[-1] + 1


def ramp_coefficients(plan: RampPlan, count: int) -> CombCoefficients:
    """The [0, 1] coefficient of every block index 1..count under the plan."""
    if plan.up_steps[-1] > count:
        raise PlanIncompatible(
            f"plan reaches block {plan.up_steps[-1]}, only {count} blocks")
    k, big_k = len(plan.down_steps), len(plan.up_steps)
    values = []
    for idx in range(1, count + 1):
        if idx <= plan.down_steps[-1]:
            passed = bisect_left(plan.down_steps, idx)   # down steps < idx
            values.append(Fraction(k - passed, k))
        else:
            passed = bisect_left(plan.up_steps, idx)     # up steps < idx
            values.append(Fraction(passed, big_k))
    return CombCoefficients(values)


def build_ramp(x: BlockVector, plan: RampPlan) -> FinVec:
    """Apply the plan's coefficients blockwise; exact, support-shrinking."""
    return comb_scale(x, ramp_coefficients(plan, x.blocking.length))


# ---------------------------------------------------------------------------
# flattening


@dataclass(frozen=True)
class FlattenResult:
    """A successful flattening with its replayed estimate decomposition.

    flattened is coefficient-wise below the argument, vanishes on the
    deleted block exactly, and moves the image by difference < threshold.
    The estimates are the strict sub-bounds whose sum dominates the
    difference: the two averages against a third of the threshold each,
    and four correction terms against the base decay value.
    """

    plan: RampPlan
    flattened: FinVec
    deleted_block: int
    difference: Fraction
    threshold: Fraction
    base_index: int
    down_average: SmallAverage
    up_average: SmallAverage
    estimates: tuple[ClauseRow, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.estimates)


def _image_mass_room(scene: Scene, x: FinVec, n: int) -> tuple[int, int]:
    """Largest m with the window image-mass hypothesis on (n, m); first bad j."""
    image = scene.model.apply(x)
    count = scene.blocks()
    for j in range(n + 1, count + 1):
        mass = scene.cod_norm(restrict(image, scene.cod_blocking.block(j)))
        if not mass < 2 * scene.schedule.eps_at(j - 1):
            return min(j, count), j
    return count, 0


def flatten(x: FinVec, scene: Scene, n: int, eps, search_cap: int = 6,
            caps: Caps = DEFAULT_CAPS, end: int | None = None) -> FlattenResult:
    """Delete one block of x past index n, moving the image by less than eps.

    Requires the argument inside the covering ball and the window image
    masses below twice the schedule (both checked).  The base index is
    the first with schedule value below eps/12; two average searches in
    geometrically widening windows produce the down and up step lists;
    the ramp is built and the whole estimate decomposition is verified
    exactly before returning.  When the truncation offers no small
    average anywhere, the failure is certified: the last failure
    certificate is attached along with an alternating-sum audit against
    the operator-norm bound.

    end, when given, caps the search window: no ramp step is placed at a
    block past it, so the deleted block lands strictly inside (n, end).
    """
    eps = as_rat(eps)
    if eps <= 0:
        raise InputError(f"threshold must be positive, got {eps}")
    if n < 0:
        raise InputError(f"window start must be >= 0, got {n}")
    if end is not None and end <= n:
        raise InputError(f"window ({n}, {end}) is empty")
    model = scene.model
    cap_c = model.covering_c
    nx = scene.dom_norm(x)
    if nx > cap_c:
        raise InputError(
            f"argument norm {nx} exceeds the covering constant {cap_c}")
    split = block_decompose(x, scene.dom_blocking)
    count = scene.blocks()
    sched = scene.schedule

    base = n
    while not sched.eps_at(base) < eps / 12:
        base += 1
        if base > count:
            raise WindowExhausted(
                "the schedule only decays below a twelfth of the threshold "
                "beyond the truncation",
                payload={"first_usable_index": base, "blocks": count})

    room, bad_j = _image_mass_room(scene, x, n)
    if end is not None:
        room = min(room, end)
        if bad_j > end:
            bad_j = 0          # violation past the capped window is moot
    if bad_j and bad_j <= base + 4:
        raise InputError(
            f"image mass hypothesis fails already at block {bad_j}")

    attempts: list[tuple[int, int]] = []
    width = 1
    while len(attempts) < search_cap:
        mid = base + 2 + width
        end = mid + 1 + width
        if end > room:
            break
        attempts.append((mid, end))
        width *= 2
    mid = (base + 2 + room) // 2
    if mid >= base + 3 and room >= mid + 2 and (mid, room) not in attempts:
        attempts.append((mid, room))
    if not attempts:
        raise WindowExhausted(
            "no room between the window start and the truncation",
            payload={"base_index": base, "usable_blocks": room})

    parts = ab_parts(split, model, scene.cod_blocking)
    images = [model.apply(split.part(t)) for t in range(1, count + 1)]
    image_total = model.apply(x)
    cod = model.codomain_norm
    third = eps / 3
    last_failure: AverageFailure | None = None
    last_unverified: FlattenResult | None = None

    for mid, end in attempts:
        down = find_small_average(parts.early, third, cod, (base + 1, mid), caps)
        if isinstance(down, AverageFailure):
            last_failure = down
            continue
        up = find_small_average(parts.early, third, cod, (mid, end), caps)
        if isinstance(up, AverageFailure):
            last_failure = up
            continue
        plan = RampPlan((n, end), down.indices, up.indices)
        flattened = build_ramp(split, plan)
        result = _verified_result(scene, plan, flattened, image_total, images,
                                  parts, down, up, eps, base)
        if result.passed:
            return result
        last_unverified = result

    if last_failure is None and last_unverified is not None:
        raise WindowExhausted(
            "averages were found but the estimate decomposition does not "
            "verify at this truncation",
            payload={"estimates": last_unverified.estimates})
    audit_value, audit_witness = alternating_sum_audit(
        parts.early, (base + 1, room), cod, caps)
    whole = operator_norm(model.apply,
                          tuple(range(1, model.matrix.ncols + 1)),
                          tuple(range(1, model.matrix.nrows + 1)),
                          model.domain_norm, cod, caps)
    bound = cap_c * whole.value + 1
    raise WindowExhausted(
        "no small average within the searched windows",
        payload={"certificate": last_failure,
                 "alternating_max": audit_value,
                 "alternating_witness": audit_witness,
                 "alternating_bound": bound,
                 "alternating_ok": audit_value <= bound})


def _verified_result(scene: Scene, plan: RampPlan, flattened: FinVec,
                     image_total: FinVec, images: Sequence[FinVec],
                     parts: ABParts, down: SmallAverage, up: SmallAverage,
                     eps: Fraction, base: int) -> FlattenResult:
    """Replay the whole estimate decomposition for one built ramp."""
    model = scene.model
    cod = model.codomain_norm
    k, big_k = len(down.indices), len(up.indices)
    base_eps = scene.schedule.eps_at(base)
    rows = [
        _clause("down-run average", down.value, eps / 3, down.indices),
        _clause("up-run average", up.value, eps / 3, up.indices),
    ]
    track = sum((norm_value(parts.early_at(u) + parts.aligned_at(u), cod)
                 for u in up.indices), Fraction(0))
    rows.append(_clause("up-run aligned parts track their early parts",
                        track / big_k, base_eps, up.indices))
    down_corr = sum(((t - 1) * norm_value(parts.early_at(i) +
                                          parts.aligned_at(i), cod)
                     for t, i in enumerate(down.indices, start=1)),
                    Fraction(0))
    rows.append(_clause("down-run adjacent corrections", down_corr / k,
                        base_eps, down.indices[1:]))
    up_corr = sum(((big_k - t) * norm_value(parts.early_at(j) +
                                            parts.aligned_at(j), cod)
                   for t, j in enumerate(up.indices, start=1)),
                  Fraction(0))
    rows.append(_clause("up-run adjacent corrections", up_corr / big_k,
                        base_eps, up.indices[:-1]))

    def run_residual(lo: int, hi: int) -> FinVec:
        total = FinVec.zero()
        for j in range(lo + 1, hi + 1):
            total = total + images[j - 1]
        return total - (parts.early_at(lo) + parts.aligned_at(hi))

    residual = Fraction(0)
    down_path = plan.down_steps + (plan.up_steps[0],)
    for t in range(1, k + 1):
        D = run_residual(down_path[t - 1], down_path[t])
        residual += Fraction(t, k) * norm_value(D, cod)
    for t in range(1, big_k):
        D = run_residual(plan.up_steps[t - 1], plan.up_steps[t])
        residual += Fraction(big_k - t, big_k) * norm_value(D, cod)
    rows.append(_clause("run residuals", residual, 2 * base_eps))

    difference = norm_value(image_total - model.apply(flattened), cod)
    rows.append(_clause("flattened difference", difference, eps))
    if difference > sum(r.lhs for r in rows[:-1]):
        raise Error("estimate decomposition fails to dominate the difference")
    deleted = plan.deleted_block
    if not restrict(flattened, scene.dom_blocking.block(deleted)).is_zero():
        raise Error("deleted block still carries mass")
    return FlattenResult(plan, flattened, deleted, difference, eps, base,
                         down, up, tuple(rows))
