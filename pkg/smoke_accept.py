import random
import time
from fractions import Fraction as F

from schreier.blocking import Scene, check_lemma, refined_scene, select_subsequence
from schreier.norms import (SchreierNorm, SupNorm, norm_brute_oracle,
                            norm_value)
from schreier.pipeline import extract_unconditional, prop19_decompose
from schreier.quotient import Matrix, QuotientModel
from schreier.schedule import build_schedule
from schreier.seqvec import Blocking, FinVec

GRID = (F(1), F(-1), F(1, 2), F(-1, 2), F(2), F(-2))

t0 = time.time()
rng = random.Random(20260817)
for case in range(2000):
    k = rng.randint(1, 5)
    support = rng.sample(range(1, 11), k)
    x = FinVec({i: rng.choice(GRID) for i in support})
    for level in (1, 2):
        assert norm_value(x, SchreierNorm(level)) == \
            norm_brute_oracle(x, SchreierNorm(level))
print("2000 sampled pairs (both levels):", round(time.time() - t0, 2), "s")


def diagonal_scene(blocks, diag, delta_at=()):
    rows = [[F(0)] * blocks for _ in range(blocks)]
    for i in range(blocks):
        rows[i][i] = diag(i + 1)
    for r in delta_at:
        rows[r - 1][r] = F(1, 10 ** 80)
    mat = Matrix(tuple(tuple(r) for r in rows))
    model = QuotientModel.induced(mat, SchreierNorm(1), SupNorm())
    ys = tuple(FinVec({i: F(1)}) for i in range(1, blocks + 1))
    return Scene(model, build_schedule(blocks), Blocking(range(blocks + 1)),
                 Blocking(range(blocks + 1)), ys=ys)


t0 = time.time()
scene = diagonal_scene(24, lambda i: F(1) if i % 3 else F(2),
                       delta_at=(5, 11))
res = prop19_decompose(scene, (F(1), F(1)))
staged = Scene(scene.model, scene.schedule, scene.dom_blocking,
               scene.cod_blocking, ys=scene.ys, coeffs=(F(1), F(1)),
               p_list=res.indices, r_list=(1,) + res.separators[1:])
rep = check_lemma("1.3", staged)
assert rep.passed, [g for g in rep.hypotheses if not g.ok]
for lemma, kw in (("1.4", dict(x=FinVec({13: F(1)}), block_index=13)),
                  ("1.5", dict(x=FinVec({1: F(1), 13: F(1)}), block_index=6)),
                  ("1.6a", dict(x=FinVec({1: F(1), 24: F(1)}), n=1, m=24)),
                  ("1.6b", dict(x=FinVec({1: F(1), 24: F(1)}), n=1, m=24))):
    rep = check_lemma(lemma, Scene(scene.model, scene.schedule,
                                   scene.dom_blocking, scene.cod_blocking,
                                   ys=scene.ys, **kw))
    assert rep.passed, (lemma, [g.description for g in rep.hypotheses if not g.ok])
print("prop19 dim24 + lemmas 1.3-1.6b:", round(time.time() - t0, 2), "s")

t0 = time.time()
fine = Blocking(range(25))
base = Scene(scene.model, scene.schedule, fine, fine,
             ys=tuple(FinVec({2 * i: F(1)}) for i in range(1, 5)))
sel = select_subsequence(base, 4)
ref = refined_scene(base, sel, coeffs=(F(0), F(0), F(0), F(1)), n=1, m=3)
rep = check_lemma("1.2", ref)
assert rep.passed
print("select + 1.2 dim24:", round(time.time() - t0, 2), "s")

t0 = time.time()
cert = extract_unconditional(diagonal_scene(24, lambda i: F(1),
                                            delta_at=(7,)))
assert cert.passed and cert.measured <= cert.bound
print("extract dim24 perturbed:", round(time.time() - t0, 2), "s")
