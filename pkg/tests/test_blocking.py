"""Blocking search, gliding-hump selection, and window inequality replay."""

import random
from fractions import Fraction as F

import pytest

from schreier.blocking import (Scene, check_lemma, coefficient_ball_vertices,
                               jz_blocking, refined_scene, select_subsequence,
                               verify_blocking)
from schreier.errors import (InputError, InsufficientDecay,
                             NotFoundWithinTruncation, SceneIncomplete)
from schreier.norms import SchreierNorm, SumNorm, SupNorm
from schreier.quotient import Matrix, QuotientModel
from schreier.schedule import EpsilonSchedule, build_schedule
from schreier.seqvec import Blocking, FinVec


def e(i, c=F(1)):
    return FinVec({i: c})


def identity(n):
    return Matrix(tuple(tuple(F(1) if r == c else F(0) for c in range(n))
                        for r in range(n)))


def sup_model(mat):
    return QuotientModel.induced(mat, SupNorm(), SupNorm())


def block_diag_model():
    # four dense 2x2 blocks on the diagonal of an 8x8 matrix
    rows = [[F(0)] * 8 for _ in range(8)]
    for b in range(4):
        for r in range(2):
            for c in range(2):
                rows[2 * b + r][2 * b + c] = F(1, 1 + r + c)
    return sup_model(Matrix(tuple(tuple(r) for r in rows)))


SCHED8 = build_schedule(8)
NAT8 = Blocking((0, 2, 4, 6, 8))

# tiny perturbation magnitudes sitting strictly below the companion
# thresholds of SCHED8 (tilde_at(4) is above 1e-14, tilde_at(6) above 1e-18)
ALPHA = F(1, 10 ** 16)
DELTA = F(1, 10 ** 10)


# -- scenes ------------------------------------------------------------------


class TestScene:
    def test_rejects_mismatched_blocking(self):
        with pytest.raises(InputError):
            Scene(sup_model(identity(8)), SCHED8, Blocking((0, 3, 8)), NAT8)

    def test_rejects_unequal_block_counts(self):
        with pytest.raises(InputError):
            Scene(sup_model(identity(8)), SCHED8, Blocking((0, 4, 8)), NAT8)

    def test_rejects_unnormalized_range_vector(self):
        with pytest.raises(InputError):
            Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=(e(1, F(2)),))

    def test_rejects_range_vector_outside_codomain(self):
        with pytest.raises(InputError):
            Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=(e(9),))

    def test_rejects_empty_window(self):
        with pytest.raises(InputError):
            Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, n=3, m=3)

    def test_rejects_out_of_range_block_index(self):
        with pytest.raises(InputError):
            Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, block_index=5)


# -- two-diagonal blocking search ---------------------------------------------


class TestJzBlocking:
    def test_block_diagonal_splits_into_four(self):
        model = block_diag_model()
        dom, cod = jz_blocking(model, SCHED8, 4)
        assert dom.length == 4 and cod.length == 4
        rows = verify_blocking(model, SCHED8, dom, cod)
        assert rows and all(r.ok for r in rows)

    def test_natural_diagonal_blocking_replays_to_zero(self):
        rows = verify_blocking(block_diag_model(), SCHED8, NAT8, NAT8)
        assert len(rows) == 9          # 16 pairs minus diagonal and subdiagonal
        assert all(r.lhs == 0 and r.ok for r in rows)

    def test_identity_blocks_cleanly(self):
        model = sup_model(identity(6))
        dom, cod = jz_blocking(model, build_schedule(6), 3)
        assert dom.length == 3 and dom.cuts == cod.cuts
        rows = verify_blocking(model, build_schedule(6), dom, cod)
        assert all(r.lhs == 0 for r in rows)

    def test_dense_random_matrix_is_refused(self):
        rng = random.Random(7)
        dense = Matrix(tuple(tuple(F(rng.randint(1, 6), 7) for _ in range(8))
                             for _ in range(8)))
        with pytest.raises(NotFoundWithinTruncation) as exc:
            jz_blocking(sup_model(dense), SCHED8, 4)
        assert exc.value.payload["blocks_tried"] == (4, 3, 2)
        assert exc.value.payload["prefixes_explored"] > 0

    def test_needs_room_for_two_blocks(self):
        with pytest.raises(InputError):
            jz_blocking(sup_model(identity(4)), SCHED8, 1)

    def test_verify_flags_a_bad_blocking(self):
        # one dense 2x2 block straddles the cut at 1
        model = block_diag_model()
        skew = Blocking((0, 1, 4, 6, 8))
        rows = verify_blocking(model, SCHED8, skew, skew)
        assert any(not r.ok for r in rows)


# -- gliding-hump selection ----------------------------------------------------


class TestSelectSubsequence:
    def test_disjoint_humps_select_identically(self):
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8,
                      ys=(e(1), e(3), e(5), e(7)))
        sel = select_subsequence(scene, 4)
        assert sel.indices == (1, 2, 3, 4)
        assert sel.q_cuts == (0, 1, 2, 3, 4)
        assert sel.dom_blocking.cuts == NAT8.cuts
        assert sel.cod_blocking.cuts == NAT8.cuts
        assert sel.coefficient_floors == (F(1),) * 4
        assert all(r.lhs == 0 for r in sel.localization)

    def test_concentrated_candidates_are_refused(self):
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=(e(1),) * 4)
        with pytest.raises(InsufficientDecay) as exc:
            select_subsequence(scene, 4)
        assert exc.value.payload["picked"] == (1,)
        assert len(exc.value.payload["skipped"]) == 3

    def test_small_early_mass_is_tolerated_and_replayed(self):
        # later candidates carry a tiny residue on the first coordinate
        ys = (e(1),
              FinVec({1: ALPHA, 3: F(1)}),
              FinVec({1: ALPHA, 5: F(1)}),
              FinVec({1: ALPHA, 7: F(1)}))
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=ys)
        sel = select_subsequence(scene, 4)
        assert sel.indices == (1, 2, 3, 4)
        residue = [r for r in sel.localization if r.witness[1] == 1 and r.lhs != 0]
        assert residue and all(r.lhs == ALPHA and r.ok for r in residue)

    def test_oversized_early_mass_blocks_the_pick(self):
        ys = (e(1), FinVec({1: F(1, 2), 3: F(1)}), e(5), e(7))
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=ys)
        sel = select_subsequence(scene, 4)
        assert 2 not in sel.indices
        assert sel.indices == (1, 3, 4)

    def test_shared_cut_sequence_refines_both_blockings(self):
        fine = Blocking((0, 1, 2, 3, 4, 5, 6, 7, 8))
        ys = (e(2), e(5), e(8))
        scene = Scene(sup_model(identity(8)), SCHED8, fine, fine, ys=ys)
        sel = select_subsequence(scene, 3)
        assert sel.q_cuts == (0, 2, 5, 8)
        assert sel.cod_blocking.cuts == (0, 2, 5, 8)
        assert sel.dom_blocking.cuts == tuple(fine.cuts[k] for k in sel.q_cuts)

    def test_needs_two_candidates(self):
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=(e(1),))
        with pytest.raises(InputError):
            select_subsequence(scene, 4)


class TestCoefficientBall:
    def test_sup_ball_has_square_corners(self):
        verts = coefficient_ball_vertices((e(1), e(2)), SupNorm())
        assert verts == ((F(-1), F(-1)), (F(-1), F(1)),
                         (F(1), F(-1)), (F(1), F(1)))

    def test_sum_ball_is_the_cross_polytope(self):
        verts = coefficient_ball_vertices((e(1), e(2)), SumNorm())
        assert verts == ((F(-1), F(0)), (F(0), F(-1)),
                         (F(0), F(1)), (F(1), F(0)))

    def test_schreier_ball_on_disjoint_pairs(self):
        # {1} alone and {2,3} together are both admissible at level 1
        v1 = e(1)
        v2 = FinVec({2: F(1), 3: F(1)})
        verts = coefficient_ball_vertices((v1, v2), SchreierNorm(1))
        assert (F(1), F(1, 2)) in verts
        assert all(abs(a) <= 1 and abs(b) <= F(1, 2) for a, b in verts)

    def test_dependent_vectors_are_rejected(self):
        with pytest.raises(InputError):
            coefficient_ball_vertices((e(1), e(1)), SupNorm())


# -- window inequality replay --------------------------------------------------


def family_scene(**kw):
    ys = tuple(e(2 * i) for i in range(1, 5))
    return Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=ys, **kw)


class TestWindowCombination:
    def test_off_window_combination_passes_with_zero_mass(self):
        rep = check_lemma("1.2", family_scene(coeffs=(F(0),) * 3 + (F(1),),
                                              n=1, m=3))
        assert rep.verdict() == "pass"
        assert [c.lhs for c in rep.clauses] == [F(0), F(0)]
        assert rep.clauses[-1].description == "whole window projection"

    def test_broken_companion_schedule_gates_out(self):
        loud = EpsilonSchedule(SCHED8.eps,
                               tuple(100 * t for t in SCHED8.eps_tilde),
                               SCHED8.tail)
        ys = tuple(e(2 * i) for i in range(1, 5))
        scene = Scene(sup_model(identity(8)), loud, NAT8, NAT8, ys=ys,
                      coeffs=(F(0),) * 3 + (F(1),), n=1, m=3)
        rep = check_lemma("1.2", scene)
        assert rep.verdict() == "hypotheses violated"
        assert rep.clauses == ()
        gate = rep.hypotheses[0]
        assert not gate.ok and "(1.2) first part" in gate.note

    def test_coefficient_inside_window_gates_out(self):
        rep = check_lemma("1.2", family_scene(coeffs=(F(0), F(1), F(0), F(0)),
                                              n=1, m=3))
        assert rep.verdict() == "hypotheses violated"
        gate = next(g for g in rep.hypotheses
                    if g.description == "coefficients vanish inside the window")
        assert not gate.ok

    def test_oversized_coefficient_gates_out(self):
        # sup norm of 3 * e_8 minus 2 * e_6 is 3, so renormalize via sum of two
        ys = tuple(e(2 * i) for i in range(1, 5))
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8, ys=ys,
                      coeffs=(F(0), F(0), F(-3), F(3)), n=1, m=2)
        rep = check_lemma("1.2", scene)
        assert rep.verdict() == "hypotheses violated"
        assert any(not g.ok and g.description == "combination has norm one"
                   for g in rep.hypotheses)
        assert any(not g.ok and g.description == "coefficients bounded by two"
                   for g in rep.hypotheses)


class TestStagedCombination:
    BLOCKING10 = Blocking((0, 2, 4, 6, 8, 10))
    SCHED10 = build_schedule(10)

    def scene(self, ys=None, **kw):
        if ys is None:
            ys = tuple(e(2 * i) for i in range(1, 6))
        return Scene(sup_model(identity(10)), self.SCHED10,
                     self.BLOCKING10, self.BLOCKING10, ys=ys, **kw)

    def test_clean_staged_combination_tracks_exactly(self):
        rep = check_lemma("1.3", self.scene(p_list=(2, 4), r_list=(1, 3, 5),
                                            coeffs=(F(1), F(1))))
        assert rep.verdict() == "pass"
        assert [c.lhs for c in rep.clauses] == [F(0), F(0)]

    def test_foreign_residue_shows_up_in_the_first_interval(self):
        ys = (e(2), FinVec({3: ALPHA, 4: F(1)}), e(6),
              FinVec({3: ALPHA, 8: F(1)}), e(10))
        rep = check_lemma("1.3", self.scene(ys=ys, p_list=(2, 4),
                                            r_list=(1, 3, 5),
                                            coeffs=(F(1), F(1))))
        assert rep.verdict() == "pass"
        # interval one sees the second term's residue at coordinate 3;
        # interval two misses its own term's residue, also at coordinate 3
        assert rep.clauses[0].lhs == ALPHA
        assert rep.clauses[1].lhs == ALPHA

    def test_misordered_separators_gate_out(self):
        rep = check_lemma("1.3", self.scene(p_list=(2, 4), r_list=(1, 5, 4),
                                            coeffs=(F(1), F(1))))
        assert rep.verdict() == "hypotheses violated"

    def test_missing_stage_list_is_incomplete(self):
        with pytest.raises(SceneIncomplete):
            check_lemma("1.3", self.scene(r_list=(1, 3, 5),
                                          coeffs=(F(1), F(1))))


class TestSingleBlockImage:
    def test_block_diagonal_argument_stays_local(self):
        mat = block_diag_model().matrix
        scene = Scene(sup_model(mat), SCHED8, NAT8, NAT8,
                      x=e(3), block_index=2)
        rep = check_lemma("1.4", scene)
        assert rep.verdict() == "pass"
        assert all(c.lhs == 0 for c in rep.clauses)
        descriptions = [c.description for c in rep.clauses]
        assert "prefix [1, 0]" in descriptions
        assert "tail [3, 4]" in descriptions

    def test_oversized_argument_gates_out(self):
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8,
                      x=e(3, F(3)), block_index=2)
        rep = check_lemma("1.4", scene)
        assert rep.verdict() == "hypotheses violated"

    def test_support_leak_gates_out(self):
        scene = Scene(sup_model(identity(8)), SCHED8, NAT8, NAT8,
                      x=FinVec({3: F(1), 5: F(1)}), block_index=2)
        rep = check_lemma("1.4", scene)
        assert rep.verdict() == "hypotheses violated"
        gate = next(g for g in rep.hypotheses if "supported in" in g.description)
        assert "5" in gate.note


def near_diagonal_model():
    # identity plus a delta superdiagonal and a delta^2 second superdiagonal
    rows = [[F(0)] * 6 for _ in range(6)]
    for r in range(6):
        rows[r][r] = F(1)
        if r + 1 < 6:
            rows[r][r + 1] = DELTA
        if r + 2 < 6:
            rows[r][r + 2] = DELTA * DELTA
    return sup_model(Matrix(tuple(tuple(r) for r in rows)))


SINGLETONS6 = Blocking((0, 1, 2, 3, 4, 5, 6))
SCHED6 = build_schedule(6)


class TestExcludedBlocksImage:
    def test_second_superdiagonal_residue_is_exact(self):
        scene = Scene(near_diagonal_model(), SCHED6, SINGLETONS6, SINGLETONS6,
                      x=FinVec({1: F(1), 4: F(1)}), block_index=2)
        rep = check_lemma("1.5", scene)
        assert rep.verdict() == "pass"
        assert rep.clauses[0].lhs == DELTA * DELTA

    def test_support_touching_banned_blocks_gates_out(self):
        scene = Scene(near_diagonal_model(), SCHED6, SINGLETONS6, SINGLETONS6,
                      x=FinVec({1: F(1), 3: F(1)}), block_index=2)
        rep = check_lemma("1.5", scene)
        assert rep.verdict() == "hypotheses violated"


class TestAdjacentParts:
    def test_cancellation_rows_catch_the_superdiagonal(self):
        scene = Scene(near_diagonal_model(), SCHED6, SINGLETONS6, SINGLETONS6,
                      x=FinVec({1: F(1), 6: F(1)}), n=1, m=6)
        rep = check_lemma("1.6a", scene)
        assert rep.verdict() == "pass"
        by_block = {c.witness[0]: c.lhs for c in rep.clauses}
        assert by_block == {2: F(0), 3: F(0), 4: F(0), 5: DELTA}

    def test_run_sums_collapse_to_their_end_parts(self):
        scene = Scene(near_diagonal_model(), SCHED6, SINGLETONS6, SINGLETONS6,
                      x=FinVec({1: F(1), 6: F(1)}), n=1, m=6)
        rep = check_lemma("1.6b", scene)
        assert rep.verdict() == "pass"
        assert len(rep.clauses) == 6   # pairs 1 < r < s < 6
        assert all(c.lhs == 0 for c in rep.clauses)

    def test_heavy_window_mass_gates_out(self):
        scene = Scene(near_diagonal_model(), SCHED6, SINGLETONS6, SINGLETONS6,
                      x=FinVec({j: F(1) for j in range(1, 7)}), n=1, m=6)
        rep = check_lemma("1.6a", scene)
        assert rep.verdict() == "hypotheses violated"
        gate = next(g for g in rep.hypotheses if "twice" in g.description)
        assert not gate.ok


class TestCheckLemmaDispatch:
    def test_unknown_id_is_an_input_error(self):
        with pytest.raises(InputError):
            check_lemma("2.7", family_scene())

    def test_missing_objects_are_incomplete(self):
        with pytest.raises(SceneIncomplete):
            check_lemma("1.2", family_scene(n=1, m=3))
        with pytest.raises(SceneIncomplete):
            check_lemma("1.4", family_scene())
        with pytest.raises(SceneIncomplete):
            check_lemma("1.6a", family_scene(x=e(1)))


class TestRefinedScene:
    def test_selection_feeds_the_window_replay(self):
        fine = Blocking(tuple(range(9)))
        ys = (e(2), e(4), e(6), e(8))
        base = Scene(sup_model(identity(8)), SCHED8, fine, fine, ys=ys)
        sel = select_subsequence(base, 4)
        scene = refined_scene(base, sel, coeffs=(F(0), F(0), F(0), F(1)),
                              n=1, m=3)
        rep = check_lemma("1.2", scene)
        assert rep.verdict() == "pass"
