"""Scratch: witness search, averages, classifiers."""
from fractions import Fraction as F

from schreier.pipeline import (AverageTree, build_average, c0_equiv_constant,
                               c0_subseq_select, s1_witness_search,
                               spreading_probe)
from schreier.errors import BudgetExhausted, TargetUnreachable
from schreier.norms import SchreierNorm, SupNorm, norm_value
from schreier.quotient import Matrix, QuotientModel
from schreier.seqvec import FinVec


def e(i, v=F(1)):
    return FinVec({i: v})


def identity_model(dim, dom, cod):
    mat = Matrix(tuple(tuple(F(int(r == c)) for c in range(dim))
                       for r in range(dim)))
    return QuotientModel.induced(mat, dom, cod)


# --- s1_witness_search on level-one units, dim 64
model = identity_model(64, SchreierNorm(1), SchreierNorm(1))
ys = tuple(e(i) for i in range(1, 65))
rep = s1_witness_search(model, ys, budget=10)
w = rep.witness
print('s1 S-units: constant', w.constant, 'averages', len(w.averages),
      'first supports', [tuple(sorted(a.support())) for a in w.averages[:3]])

# sup codomain: singletons succeed immediately
model_sup = identity_model(16, SchreierNorm(1), SupNorm())
rep2 = s1_witness_search(model_sup, tuple(e(i) for i in range(1, 17)), 5)
print('s1 sup codomain: constant', rep2.witness.constant,
      'averages', len(rep2.witness.averages))

try:
    s1_witness_search(model, ys, budget=0)
    print('s1 budget 0: NO RAISE (bad)')
except BudgetExhausted as exc:
    print('s1 budget 0:', exc.payload)

# --- build_average
print('avg level1 singleton:', dict(build_average((e(3),),
      AverageTree(1, F(1), (1,)), SupNorm()).items()))
two = build_average((e(5), e(9)), AverageTree(1, F(1, 2), (1, 2)), SupNorm())
print('avg half-sum:', dict(two.items()))
child_a = AverageTree(1, F(1, 2), (1, 2))
child_b = AverageTree(1, F(1, 4), (3, 4, 5, 6))
tree = AverageTree(2, F(1, 2), children=(child_a, child_b))
xs = (e(2), e(3), e(4), e(5), e(6), e(7))
lvl2 = build_average(xs, tree, SchreierNorm(1))
print('avg level2:', dict(lvl2.items()), 'norm',
      norm_value(lvl2, SchreierNorm(1)))

# --- c0_equiv_constant
print('c0_equiv disjoint sup units:',
      c0_equiv_constant(tuple(e(i) for i in (1, 3, 5)), SupNorm()))
print('c0_equiv e_5..e_8 schreier:',
      c0_equiv_constant(tuple(e(4 + i) for i in range(1, 5)), SchreierNorm(1)))

# --- spreading_probe
units = tuple(e(i) for i in range(1, 21))
r1 = spreading_probe(units, SchreierNorm(1), 3, start_depths=(3, 5))
print('spread S units:', r1.classification, 'scale', r1.scale,
      [ (row.start, row.value) for row in r1.rows])
r2 = spreading_probe(units, SupNorm(), 3, start_depths=(3, 5))
print('spread sup units:', r2.classification, 'scale', r2.scale)
mixed = tuple(e(i) if i <= 10 else e(i, F(1, 100)) for i in range(1, 21))
r3 = spreading_probe(mixed, SchreierNorm(1), 3, start_depths=(3, 15))
print('spread mixed:', r3.classification, 'scale', r3.scale)

# --- c0_subseq_select
deep = []
bounds = []
for j in range(1, 5):
    size = 4 ** (j - 1)
    start = 2 * size
    deep.append(FinVec({start + t: F(1, size) for t in range(size)}))
    bounds.append(F(1, size))
sel = c0_subseq_select(deep, bounds, F(2))
print('select doubling-deep: positions', sel.positions, 'constant',
      sel.constant)

try:
    c0_subseq_select(tuple(e(i) for i in range(1, 11)), (F(1),) * 10, F(3, 2))
    print('select e_n: NO RAISE (bad)')
except TargetUnreachable as exc:
    print('select e_n:', exc.payload)

single = c0_subseq_select((e(5),), (F(1),), F(3, 2))
print('select single: positions', single.positions, 'constant',
      single.constant)
