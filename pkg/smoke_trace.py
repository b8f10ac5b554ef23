"""Scratch: build the frozen contradiction trace and replay every row."""
from fractions import Fraction as F

from schreier.pipeline import ContradictionTrace, theorem_b_contradiction_check
from schreier.norms import SchreierNorm, SumNorm, norm_value
from schreier.quotient import Matrix, QuotientModel
from schreier.seqvec import FinVec

M = 29
WIDTH = 2 * M            # 58 blocks
DIM = 2 * WIDTH          # 116 domain coordinates
DELTA = F(7, 25)
H = F(71, 500)           # tall coefficient
GAMMA = F(1, 1000)       # signal coefficient
PILE = F(48, 10000)      # one correction pile on the persistent tall coord
BETA = F(29, 50)         # range vector height
LAM = F(1, 29)

FLAGGED = tuple(range(1, M + 1))


def build_model():
    rows = [[F(0)] * DIM for _ in range(WIDTH)]
    for i in range(1, WIDTH + 1):
        rows[i - 1][2 * i - 1] = BETA / GAMMA   # column 2i (0-based 2i-1)
    mat = Matrix(tuple(tuple(r) for r in rows))
    return QuotientModel.supplied(mat, SchreierNorm(1), SumNorm(), SumNorm(),
                                  F(1), trusted=True)


def build_trace():
    xs, omegas, eps = [], [], []
    for i in range(1, WIDTH + 1):
        odd, even = 2 * i - 1, 2 * i
        if i in FLAGGED:
            xs.append(FinVec({odd: H, even: GAMMA}))
            omegas.append(FinVec({}))
            eps.append(F(1, 100000))
        elif i < WIDTH:
            xs.append(FinVec({even: GAMMA}))
            omegas.append(FinVec({DIM - 1: PILE}))
            eps.append(F(481, 100000))
        else:  # the persistent tall block
            xs.append(FinVec({odd: H, even: GAMMA}))
            omegas.append(FinVec({DIM - 1: PILE}))
            eps.append(F(481, 100000))
    zs = [FinVec({i: BETA}) for i in range(1, WIDTH + 1)]
    return ContradictionTrace(DELTA, M, LAM, tuple(zs), tuple(xs),
                              tuple(omegas), FLAGGED, tuple(eps))


model = build_model()
trace = build_trace()

total_x = FinVec({})
for x in trace.xs:
    total_x = total_x + x
total_w = FinVec({})
for w in trace.omegas:
    total_w = total_w + w
print('||sum x||_S  =', norm_value(total_x, SchreierNorm(1)),
      float(norm_value(total_x, SchreierNorm(1))))
print('||sum x+w||_S =', norm_value(total_x + total_w, SchreierNorm(1)),
      float(norm_value(total_x + total_w, SchreierNorm(1))), '< 3 ?')
print('||sum w||_S  =', norm_value(total_w, SchreierNorm(1)),
      '< delta/2 =', DELTA / 2, '?')
print('sum eps =', sum(trace.eps, F(0)), '< 0.14 ?')
print('delta*m/4 =', DELTA * M / 4, ' 2C = 2')

report = theorem_b_contradiction_check(model, trace)
print()
print('report lemma:', report.lemma)
print('passed:', report.passed)
bad_g = [g for g in report.hypotheses if not g.ok]
bad_c = [c for c in report.clauses if not c.ok]
print('gates:', len(report.hypotheses), 'clauses:', len(report.clauses))
if bad_g:
    print('BAD GATES:')
    for g in bad_g:
        print('  ', g.description, '|', g.note)
if bad_c:
    print('BAD CLAUSES:')
    for c in bad_c[:12]:
        print('  ', c.description, '| lhs', c.lhs, float(c.lhs),
              '| rhs', c.rhs, float(c.rhs))
term = [c for c in report.clauses if 'CONTRADICTION' in c.description]
for c in term:
    print('terminal:', c.description, '| ok', c.ok, '| lhs', float(c.lhs),
          'rhs', float(c.rhs))
