"""Scratch: FlattenFailed propagation from a staged build."""
from fractions import Fraction as F

from schreier.pipeline import prop19_decompose
from schreier.errors import FlattenFailed
from schreier.norms import SchreierNorm, SumNorm
from schreier.quotient import Matrix, QuotientModel
from schreier.seqvec import Blocking, FinVec
from schreier.blocking import Scene
from schreier.schedule import build_schedule


def chain_scene(blocks=8):
    # columns 6..8 spill into the previous row, everything else aligned;
    # the unique preimage of f_8 alternates through blocks 5..8 and its
    # spill at block 7 is a unit that no average can shrink
    rows = [[F(0)] * blocks for _ in range(blocks)]
    for j in range(1, blocks + 1):
        rows[j - 1][j - 1] = F(1)
        if j in (6, 7, 8):
            rows[j - 2][j - 1] = F(1)
    model = QuotientModel.supplied(Matrix(tuple(tuple(r) for r in rows)),
                                   SchreierNorm(1), SumNorm(), SumNorm(),
                                   F(4), trusted=True)
    grid = Blocking(tuple(range(blocks + 1)))
    ys = [FinVec({i: F(1)}) for i in range(1, blocks + 1)]
    ys[1] = FinVec({8: F(1)})
    return Scene(model, build_schedule(blocks), grid, grid, ys=tuple(ys))


scene = chain_scene()
try:
    res = prop19_decompose(scene, (F(1),))
    print('NO RAISE, passed =', res.passed)
except FlattenFailed as exc:
    print('FlattenFailed:', exc)
    print('payload keys:', sorted(exc.payload))
    print('stage', exc.payload['stage'], 'window', exc.payload['window'],
          'indices', exc.payload['indices'])
    print('detail keys:', sorted(exc.payload['detail']))
