"""Adjacent image parts, small-average search, and ramp flattening."""

import random
from fractions import Fraction as F

import pytest

from schreier.blocking import Scene, check_lemma
from schreier.config import Caps
from schreier.errors import (CapExceeded, EmptyWindow, InputError,
                             PlanIncompatible, WindowExhausted)
from schreier.flatten import (ABParts, AverageFailure, RampPlan, SmallAverage,
                              ab_parts, alternating_sum_audit, build_ramp,
                              find_small_average, flatten, ramp_coefficients)
from schreier.norms import SumNorm, SupNorm
from schreier.quotient import Matrix, QuotientModel
from schreier.schedule import build_schedule
from schreier.seqvec import Blocking, FinVec, block_decompose, restrict


def e(i, c=F(1)):
    return FinVec({i: c})


def telescope(blocks):
    # column 2i-1 collapses onto the previous codomain block, column 2i
    # stays aligned, so consecutive domain blocks share codomain mass
    rows = [[F(0)] * (2 * blocks) for _ in range(blocks)]
    for i in range(1, blocks + 1):
        if i >= 2:
            rows[i - 2][2 * i - 2] = F(1)
        rows[i - 1][2 * i - 1] = F(1)
    return Matrix(tuple(tuple(r) for r in rows))


def telescope_scene(blocks, cod_spec=SupNorm()):
    model = QuotientModel.induced(telescope(blocks), SupNorm(), cod_spec)
    dom = Blocking(tuple(2 * i for i in range(blocks + 1)))
    cod = Blocking(tuple(range(blocks + 1)))
    return Scene(model, build_schedule(blocks), dom, cod)


def block_diag_scene(blocks):
    rows = [[F(0)] * (2 * blocks) for _ in range(2 * blocks)]
    for b in range(blocks):
        for r in range(2):
            for c in range(2):
                rows[2 * b + r][2 * b + c] = F(1, 1 + r + c)
    model = QuotientModel.induced(Matrix(tuple(tuple(r) for r in rows)),
                                  SupNorm(), SupNorm())
    nat = Blocking(tuple(2 * i for i in range(blocks + 1)))
    return Scene(model, build_schedule(blocks), nat, nat)


ALPHA = F(1, 10 ** 16)
BETA = F(1, 100)
GAMMA = F(1, 10 ** 12)


def cancelling_argument(blocks, odd, even):
    # pairs (2j, 2j+1) feed the same codomain block of the telescope, so
    # the block image mass is odd + even while the early part alone is odd
    coords = {}
    for j in range(1, blocks):
        coords[2 * j] = even
        coords[2 * j + 1] = odd
    return FinVec(coords)


# -- adjacent image parts ------------------------------------------------------


class TestABParts:
    def test_exact_projection_replay(self):
        rng = random.Random(3)
        mat = Matrix(tuple(tuple(F(rng.randint(-3, 3), 5) for _ in range(12))
                           for _ in range(6)))
        model = QuotientModel.induced(mat, SupNorm(), SupNorm())
        dom = Blocking((0, 2, 4, 6, 8, 10, 12))
        cod = Blocking((0, 1, 2, 3, 4, 5, 6))
        x = FinVec({i: F(rng.randint(-2, 2), 3) for i in range(1, 13)})
        split = block_decompose(x, dom)
        parts = ab_parts(split, model, cod)
        assert len(parts.early) == 5 and len(parts.aligned) == 6
        for t in range(1, 7):
            img = model.apply(split.part(t))
            assert parts.aligned_at(t) == restrict(img, cod.block(t))
            if t >= 2:
                assert parts.early_at(t - 1) == restrict(img, cod.block(t - 1))

    def test_two_diagonal_parts_reconstruct_the_image(self):
        scene = telescope_scene(6)
        x = FinVec({i: F(i, 7) for i in range(1, 13)})
        split = block_decompose(x, scene.dom_blocking)
        parts = ab_parts(split, scene.model, scene.cod_blocking)
        for t in range(2, 7):
            img = scene.model.apply(split.part(t))
            assert parts.early_at(t - 1) + parts.aligned_at(t) == img

    def test_rejects_mismatched_block_counts(self):
        scene = telescope_scene(6)
        split = block_decompose(e(1), scene.dom_blocking)
        with pytest.raises(InputError):
            ab_parts(split, scene.model, Blocking((0, 3, 6)))

    def test_rejects_blocking_off_the_matrix(self):
        scene = telescope_scene(6)
        split = block_decompose(e(1), Blocking((0, 2, 4, 6, 8, 10, 14)))
        with pytest.raises(InputError):
            ab_parts(split, scene.model, scene.cod_blocking)

    def test_part_accessors_check_their_range(self):
        scene = telescope_scene(6)
        split = block_decompose(e(1), scene.dom_blocking)
        parts = ab_parts(split, scene.model, scene.cod_blocking)
        with pytest.raises(InputError):
            parts.early_at(6)
        with pytest.raises(InputError):
            parts.aligned_at(0)


# -- small-average search ------------------------------------------------------


class TestFindSmallAverage:
    def test_alternating_parts_average_to_zero(self):
        parts = [e(1), e(1, F(-1)), e(1), e(1, F(-1))]
        res = find_small_average(parts, F(1, 2), SupNorm(), (0, 5))
        assert isinstance(res, SmallAverage)
        assert res.indices == (1, 2) and res.value == 0

    def test_repeated_unit_part_never_averages_down(self):
        parts = [e(1)] * 4
        res = find_small_average(parts, F(1, 2), SupNorm(), (0, 5))
        assert isinstance(res, AverageFailure)
        assert res.min_value == 1 and res.witness == (1,)
        assert res.sets_searched == 21      # 10 runs plus 11 small subsets

    def test_disjoint_units_need_a_run_of_five(self):
        parts = [e(j) for j in range(1, 6)]
        res = find_small_average(parts, F(1, 4), SupNorm(), (0, 6))
        assert isinstance(res, SmallAverage)
        assert res.indices == (1, 2, 3, 4, 5) and res.value == F(1, 5)

    def test_threshold_is_strict(self):
        parts = [e(j) for j in range(1, 5)]
        res = find_small_average(parts, F(1, 4), SupNorm(), (0, 5))
        assert isinstance(res, AverageFailure)
        assert res.min_value == F(1, 4)     # attained, not beaten

    def test_empty_window_is_its_own_outcome(self):
        with pytest.raises(EmptyWindow):
            find_small_average([e(1)] * 4, F(1, 2), SupNorm(), (2, 3))

    def test_window_must_fit_the_part_list(self):
        with pytest.raises(InputError):
            find_small_average([e(1)] * 4, F(1, 2), SupNorm(), (0, 7))

    def test_threshold_must_be_positive(self):
        with pytest.raises(InputError):
            find_small_average([e(1)], F(0), SupNorm(), (0, 2))

    def test_budget_is_enforced(self):
        with pytest.raises(CapExceeded):
            find_small_average([e(1)] * 6, F(1, 100), SupNorm(), (0, 7),
                               Caps(search_nodes=3))


class TestAlternatingSumAudit:
    def test_alternating_parts_stack_up(self):
        parts = [e(1, F(1) if t % 2 == 0 else F(-1)) for t in range(8)]
        value, witness = alternating_sum_audit(parts, (0, 9), SupNorm())
        assert value == 8 and witness == tuple(range(1, 9))

    def test_equal_parts_cancel_everywhere(self):
        value, witness = alternating_sum_audit([e(1)] * 6, (0, 7), SupNorm())
        assert value == 0 and witness == ()

    def test_budget_is_enforced(self):
        parts = [e(1, F((-1) ** t)) for t in range(8)]
        with pytest.raises(CapExceeded):
            alternating_sum_audit(parts, (0, 9), SupNorm(), Caps(search_nodes=3))


# -- ramp plans and coefficients -----------------------------------------------


class TestRampPlan:
    def test_deleted_block_follows_the_last_down_step(self):
        plan = RampPlan((0, 9), (2, 4), (6, 8))
        assert plan.deleted_block == 5

    def test_rejects_empty_step_lists(self):
        with pytest.raises(InputError):
            RampPlan((0, 9), (), (6,))
        with pytest.raises(InputError):
            RampPlan((0, 9), (2,), ())

    def test_rejects_unsorted_steps(self):
        with pytest.raises(InputError):
            RampPlan((0, 9), (4, 2), (6, 8))

    def test_steps_must_sit_inside_the_window(self):
        with pytest.raises(InputError):
            RampPlan((2, 9), (2, 4), (6, 8))    # first down step too early
        with pytest.raises(InputError):
            RampPlan((0, 8), (2, 4), (6, 8))    # last up step at the edge
        with pytest.raises(InputError):
            RampPlan((-1, 9), (2, 4), (6, 8))

    def test_up_steps_come_after_down_steps(self):
        with pytest.raises(InputError):
            RampPlan((0, 9), (2, 6), (4, 8))


class TestRampCoefficients:
    def test_single_steps_delete_one_interval(self):
        coeffs = ramp_coefficients(RampPlan((0, 6), (2,), (4,)), 6)
        assert tuple(coeffs.values) == (F(1), F(1), F(0), F(0), F(1), F(1))

    def test_two_step_ramp_walks_through_halves(self):
        coeffs = ramp_coefficients(RampPlan((0, 9), (2, 4), (6, 8)), 9)
        assert tuple(coeffs.values) == (F(1), F(1), F(1, 2), F(1, 2), F(0),
                                        F(0), F(1, 2), F(1, 2), F(1))

    def test_plan_must_fit_the_block_count(self):
        with pytest.raises(PlanIncompatible):
            ramp_coefficients(RampPlan((0, 9), (2, 4), (6, 8)), 7)

    def test_build_ramp_scales_blockwise(self):
        x = FinVec({i: F(1) for i in range(1, 13)})
        split = block_decompose(x, Blocking((0, 2, 4, 6, 8, 10, 12)))
        flattened = build_ramp(split, RampPlan((0, 6), (2,), (4,)))
        assert flattened == FinVec({i: F(1) for i in (1, 2, 3, 4, 9, 10, 11, 12)})

    def test_build_ramp_never_grows_a_coefficient(self):
        rng = random.Random(11)
        x = FinVec({i: F(rng.randint(-5, 5), 4) for i in range(1, 13)})
        split = block_decompose(x, Blocking((0, 2, 4, 6, 8, 10, 12)))
        flattened = build_ramp(split, RampPlan((0, 6), (2, 3), (4, 5)))
        for i, c in x.items():
            assert abs(flattened_coeff(flattened, i)) <= abs(c)


def flattened_coeff(v, i):
    for j, c in v.items():
        if j == i:
            return c
    return F(0)


# -- flattening: success paths -------------------------------------------------


class TestFlattenSuccess:
    def test_telescope_collapse_flattens_exactly(self):
        scene = telescope_scene(6)
        x = FinVec({i: ALPHA for i in range(1, 13)})
        res = flatten(x, scene, 0, F(1, 2))
        assert res.passed
        assert res.plan.down_steps == (2,) and res.plan.up_steps == (4,)
        assert res.deleted_block == 3 and res.base_index == 0
        assert res.flattened == FinVec(
            {i: ALPHA for i in (1, 2, 3, 4, 9, 10, 11, 12)})
        assert res.difference == 2 * ALPHA and res.threshold == F(1, 2)
        # the full estimate decomposition, exact to the last clause
        assert [c.lhs for c in res.estimates] == [
            ALPHA, ALPHA, 2 * ALPHA, F(0), F(0), 2 * ALPHA, 2 * ALPHA]
        assert [c.rhs for c in res.estimates] == [
            F(1, 6), F(1, 6), F(1, 120), F(1, 120), F(1, 120), F(1, 60),
            F(1, 2)]

    def test_deleted_block_carries_no_mass(self):
        scene = telescope_scene(6)
        res = flatten(FinVec({i: ALPHA for i in range(1, 13)}), scene, 0,
                      F(1, 2))
        deleted = scene.dom_blocking.block(res.deleted_block)
        assert restrict(res.flattened, deleted).is_zero()

    def test_two_step_ramp_with_weighted_corrections(self):
        # early parts of size BETA refuse singleton averages at 3/400 but
        # pairs pass; the window image mass stays at the GAMMA imbalance
        scene = telescope_scene(8)
        x = cancelling_argument(8, odd=BETA, even=-BETA + GAMMA)
        res = flatten(x, scene, 0, F(9, 400))
        assert res.passed and res.base_index == 1
        assert res.plan.down_steps == (3, 4) and res.plan.up_steps == (6, 7)
        assert res.deleted_block == 5
        assert res.down_average.value == BETA / 2
        assert res.up_average.value == BETA / 2
        assert res.difference == BETA / 2 + GAMMA / 2
        track, down_corr, up_corr, residual = [c.lhs for c in res.estimates[2:6]]
        assert track == GAMMA and residual == GAMMA
        assert down_corr == GAMMA / 2 and up_corr == GAMMA / 2

    def test_argument_below_the_window_is_untouched(self):
        scene = block_diag_scene(6)
        res = flatten(e(1), scene, 1, F(1, 2))
        assert res.passed and res.flattened == e(1) and res.difference == 0
        assert res.plan.down_steps == (3,) and res.plan.up_steps == (5,)
        assert all(c.lhs == 0 for c in res.estimates)


# -- flattening: certified failures and gates ----------------------------------


class TestFlattenFailures:
    def test_summing_parts_exhaust_the_window(self):
        # exact cancellation keeps the image mass at zero while the early
        # parts are disjoint units, so no average in the Sum codomain can
        # dip below a third of the threshold
        scene = telescope_scene(8, SumNorm())
        x = cancelling_argument(8, odd=F(1), even=F(-1))
        with pytest.raises(WindowExhausted) as exc:
            flatten(x, scene, 0, F(1, 2))
        payload = exc.value.payload
        cert = payload["certificate"]
        assert isinstance(cert, AverageFailure)
        assert cert.min_value == 1 and cert.threshold == F(1, 6)
        assert payload["alternating_max"] == 6
        assert payload["alternating_bound"] == 16
        assert payload["alternating_ok"] and payload["alternating_witness"]

    def test_too_few_blocks_leave_no_room(self):
        scene = block_diag_scene(4)
        with pytest.raises(WindowExhausted) as exc:
            flatten(e(1, ALPHA), scene, 0, F(1, 2))
        assert exc.value.payload == {"base_index": 0, "usable_blocks": 4}

    def test_schedule_decays_too_slowly_for_a_tiny_threshold(self):
        scene = block_diag_scene(4)
        with pytest.raises(WindowExhausted) as exc:
            flatten(e(1, ALPHA), scene, 0, F(1, 10 ** 12))
        assert exc.value.payload == {"first_usable_index": 5, "blocks": 4}

    def test_oversized_argument_is_rejected(self):
        with pytest.raises(InputError):
            flatten(e(1, F(3)), block_diag_scene(4), 0, F(1, 2))

    def test_heavy_window_image_is_rejected(self):
        with pytest.raises(InputError) as exc:
            flatten(e(1), block_diag_scene(4), 0, F(1, 2))
        assert "block 1" in str(exc.value)

    def test_threshold_and_window_start_are_validated(self):
        scene = block_diag_scene(4)
        with pytest.raises(InputError):
            flatten(e(1, ALPHA), scene, 0, F(0))
        with pytest.raises(InputError):
            flatten(e(1, ALPHA), scene, -1, F(1, 2))

    def test_found_averages_can_still_fail_verification(self):
        # mass two blocks below the diagonal is invisible to the early
        # parts, so averages succeed while the run residuals blow up; the
        # replay refuses to certify the ramp
        eta = F(1, 2)
        rows = [[F(0)] * 8 for _ in range(8)]
        for j in range(1, 9):
            rows[j - 1][j - 1] = F(1)
            if j + 2 <= 8:
                rows[j + 1][j - 1] = eta
        model = QuotientModel.induced(Matrix(tuple(tuple(r) for r in rows)),
                                      SupNorm(), SupNorm())
        singles = Blocking(tuple(range(9)))
        scene = Scene(model, build_schedule(8), singles, singles)
        x = FinVec({2: F(1, 2), 4: -eta * F(1, 2), 6: eta ** 2 * F(1, 2),
                    8: -eta ** 3 * F(1, 2)})
        with pytest.raises(WindowExhausted) as exc:
            flatten(x, scene, 2, F(1, 2))
        assert "does not verify" in str(exc.value)
        failing = [c for c in exc.value.payload["estimates"] if not c.ok]
        assert [c.description for c in failing] == ["run residuals"]
        assert failing[0].lhs == F(1, 8)


# -- window inequality replay on the same instances -----------------------------


class TestAdjacentPartsReplay:
    def test_runs_collapse_onto_their_end_parts(self):
        scene = telescope_scene(8)
        x = cancelling_argument(8, odd=BETA, even=-BETA + GAMMA)
        rep = check_lemma("1.6b", Scene(
            scene.model, scene.schedule, scene.dom_blocking,
            scene.cod_blocking, x=x, n=1, m=8))
        assert rep.verdict() == "pass" and len(rep.clauses) == 15
        for row in rep.clauses:
            r, s = row.witness
            assert row.lhs == (F(0) if s == r + 1 else GAMMA)

    def test_adjacent_parts_nearly_cancel(self):
        scene = telescope_scene(8)
        x = cancelling_argument(8, odd=BETA, even=-BETA + GAMMA)
        rep = check_lemma("1.6a", Scene(
            scene.model, scene.schedule, scene.dom_blocking,
            scene.cod_blocking, x=x, n=1, m=8))
        assert rep.verdict() == "pass"
        assert all(row.lhs == GAMMA for row in rep.clauses)
