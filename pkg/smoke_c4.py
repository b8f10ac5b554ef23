"""Probe the criterion-4/5/6 corpus generator across dims before freezing it."""

import time
from fractions import Fraction as F

from schreier.blocking import Scene, check_lemma, refined_scene, select_subsequence
from schreier.flatten import flatten
from schreier.norms import SchreierNorm, SupNorm, norm_brute_oracle, norm_value
from schreier.pipeline import extract_unconditional, prop19_decompose, verify_unconditionality
from schreier.quotient import Matrix, QuotientModel
from schreier.schedule import build_schedule
from schreier.seqvec import Blocking, FinVec, restrict

ALPHA = F(1, 10 ** 20)
DELTA = F(1, 10 ** 80)


def unit_blocking(n):
    return Blocking(range(n + 1))


def diag_scene(dim, diag, deltas=()):
    rows = [[F(0)] * dim for _ in range(dim)]
    for i in range(dim):
        rows[i][i] = diag(i + 1)
    for r in deltas:
        rows[r - 1][r] = DELTA
    mat = Matrix(tuple(tuple(r) for r in rows))
    model = QuotientModel.induced(mat, SchreierNorm(1), SupNorm())
    ys = tuple(FinVec({i: F(1)}) for i in range(1, dim + 1))
    return Scene(model, build_schedule(dim), unit_blocking(dim),
                 unit_blocking(dim), ys=ys)


PATTERNS = (
    ("flat", lambda i: F(1)),
    ("two-of-three", lambda i: F(1) if i % 3 else F(2)),
    ("three-halves", lambda i: F(1) if i % 2 else F(3, 2)),
    ("step-four", lambda i: F(2) if i % 4 == 1 else F(1)),
)


def delta_rows(dim, diag):
    # a perturbation just before a staged pick would push the pick's slice
    # past the unit ball, so rows 1, 8, 15 stay clean
    good = [r for r in range(1, dim)
            if diag(r + 1) > 1 and r + 1 not in (2, 9, 16)]
    if not good:
        return ()
    return (good[0], good[len(good) // 2])


def run_instance(dim, diag, deltas):
    scene = diag_scene(dim, diag, deltas)
    # subsequence selection feeding the family inequality
    base = Scene(scene.model, scene.schedule, scene.dom_blocking,
                 scene.cod_blocking,
                 ys=tuple(FinVec({2 * i: F(1)}) for i in range(1, 5)))
    sel = select_subsequence(base, 4)
    ref = refined_scene(base, sel, coeffs=(F(0), F(0), F(0), F(1)), n=1, m=3)
    reps = {"1.2": check_lemma("1.2", ref)}
    # staged decomposition feeding the separated-window inequality
    stages = 2 if dim >= 15 else 1
    res = prop19_decompose(scene, (F(1),) * stages)
    staged = Scene(scene.model, scene.schedule, scene.dom_blocking,
                   scene.cod_blocking, ys=scene.ys, coeffs=(F(1),) * stages,
                   p_list=res.indices, r_list=(1,) + res.separators[1:])
    reps["1.3"] = check_lemma("1.3", staged)
    mid = dim // 2 + 1
    for lemma, kw in (("1.4", dict(x=FinVec({mid: F(1)}), block_index=mid)),
                      ("1.5", dict(x=FinVec({1: F(1), mid: F(1)}),
                                   block_index=mid // 2)),
                      ("1.6a", dict(x=FinVec({1: F(1), dim: F(1)}), n=1, m=dim)),
                      ("1.6b", dict(x=FinVec({1: F(1), dim: F(1)}), n=1, m=dim))):
        reps[lemma] = check_lemma(lemma, Scene(
            scene.model, scene.schedule, scene.dom_blocking,
            scene.cod_blocking, ys=scene.ys, **kw))
    for lemma, rep in reps.items():
        assert rep.passed, (dim, deltas, lemma,
                            [g.description for g in rep.hypotheses if not g.ok],
                            [c.description for c in rep.clauses if not c.ok])
        assert rep.clauses, (dim, lemma, "no clauses")
        assert all(c.rhs - c.lhs > 0 for c in rep.clauses)
    # one direct flattening for the image-drift criterion
    eps = scene.schedule.eps_at(1)
    x_small = FinVec({i: ALPHA for i in range(1, dim + 1)})
    fres = flatten(x_small, scene, 1, eps)
    assert fres.passed and fres.threshold == eps
    deleted = scene.dom_blocking.block(fres.deleted_block)
    assert restrict(fres.flattened, deleted).is_zero()
    diff = scene.cod_norm(scene.model.apply(x_small)
                          - scene.model.apply(fres.flattened))
    assert diff == fres.difference < eps, (dim, diff, fres.difference, eps)
    return scene


t0 = time.time()
count = 0
for dim in (10, 12, 14, 16, 18, 20, 22, 24):
    t1 = time.time()
    for label, diag in PATTERNS:
        run_instance(dim, diag, ())
        count += 1
        rows = delta_rows(dim, diag)
        if rows:
            run_instance(dim, diag, rows)
            count += 1
    print(f"dim {dim}: {round(time.time() - t1, 2)} s")
print(f"corpus of {count}: {round(time.time() - t0, 2)} s")

# zero vector under the brute oracle
assert norm_brute_oracle(FinVec({}), SchreierNorm(1)) == 0
assert norm_value(FinVec({}), SchreierNorm(2)) == 0
print("zero vector oracle ok")

# signed coefficient sets through extraction at the staged minimum
t0 = time.time()
scene = diag_scene(22, PATTERNS[1][1], (2, 11))
sets = ((F(1), F(-1), F(1)), (F(-1), F(1), F(1)), (F(1), F(1, 2), F(-1)))
cert = extract_unconditional(scene, coefficient_sets=sets)
assert cert.passed
assert cert.bound == 1 + cert.covering * cert.operator_value
assert cert.measured <= cert.bound
assert len(cert.runs) == 3
assert verify_unconditionality(scene, cert).passed
print("signed extract dim22:", round(time.time() - t0, 2), "s",
      "measured", cert.measured, "bound", cert.bound)
