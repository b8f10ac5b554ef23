"""Scratch: the (2.2)-mutation trace must fail exactly the coupled rows."""
from fractions import Fraction as F

from schreier.pipeline import ContradictionTrace, theorem_b_contradiction_check
from schreier.norms import SchreierNorm, SumNorm
from schreier.quotient import Matrix, QuotientModel
from schreier.seqvec import FinVec

DELTA = F(7, 25)
H = F(71, 500)
GAMMA = F(1, 1000)
BETA = F(29, 50)


def contradiction_model(m):
    width, dim = 2 * m, 4 * m
    rows = [[F(0)] * dim for _ in range(width)]
    for i in range(1, width + 1):
        rows[i - 1][2 * i - 1] = BETA / GAMMA
    return QuotientModel.supplied(Matrix(tuple(tuple(r) for r in rows)),
                                  SchreierNorm(1), SumNorm(), SumNorm(),
                                  F(1), trusted=True)


def contradiction_trace(m, pile, eps_u):
    width, dim = 2 * m, 4 * m
    xs, omegas, eps = [], [], []
    for i in range(1, width + 1):
        odd, even = 2 * i - 1, 2 * i
        if i <= m:
            xs.append(FinVec({odd: H, even: GAMMA}))
            omegas.append(FinVec({}))
            eps.append(F(1, 100000))
        elif i < width:
            xs.append(FinVec({even: GAMMA}))
            omegas.append(FinVec({dim - 1: pile}))
            eps.append(eps_u)
        else:
            xs.append(FinVec({odd: H, even: GAMMA}))
            omegas.append(FinVec({dim - 1: pile}))
            eps.append(eps_u)
    zs = [FinVec({i: BETA}) for i in range(1, width + 1)]
    return ContradictionTrace(DELTA, m, F(1, m), tuple(zs), tuple(xs),
                              tuple(omegas), tuple(range(1, m + 1)),
                              tuple(eps))


for m, pile, eps_u in ((29, F(48, 10000), F(481, 100000)),
                       (28, F(497, 100000), F(498, 100000))):
    rep = theorem_b_contradiction_check(contradiction_model(m),
                                        contradiction_trace(m, pile, eps_u))
    bad_g = [g.description for g in rep.hypotheses if not g.ok]
    bad_c = [c.description for c in rep.clauses if not c.ok]
    print(f'm={m}: passed={rep.passed} bad gates={bad_g}')
    print(f'  failing clauses: {bad_c}')
