"""Scratch: tampered certificates must be flagged; negative paths raise."""
from dataclasses import replace
from fractions import Fraction as F

from schreier.pipeline import (c0_fix_probe, extract_unconditional,
                               prop19_decompose, verify_unconditionality)
from schreier.errors import (FlattenFailed, NotC0Like, InputError,
                             TooFewIndices)
from schreier.norms import SchreierNorm, SumNorm, SupNorm
from schreier.quotient import Matrix, QuotientModel
from schreier.seqvec import Blocking, FinVec
from schreier.blocking import Scene
from schreier.schedule import build_schedule


def e(i, v=F(1)):
    return FinVec({i: v})


def identity_scene(blocks, dom_spec=SchreierNorm(1), cod_spec=SupNorm()):
    ident = Matrix(tuple(tuple(F(int(r == c)) for c in range(blocks))
                         for r in range(blocks)))
    model = QuotientModel.induced(ident, dom_spec, cod_spec)
    grid = Blocking(tuple(range(blocks + 1)))
    ys = tuple(e(i) for i in range(1, blocks + 1))
    return Scene(model, build_schedule(blocks), grid, grid, ys=ys)


scene = identity_scene(22)
cert = extract_unconditional(scene)


def flagged(mutant):
    rep = verify_unconditionality(scene, mutant)
    bad = [g.description for g in rep.hypotheses if not g.ok]
    return (not rep.passed), bad[:2]


print('measured bump:', flagged(replace(cert, measured=F(5))))
print('bound bump:   ', flagged(replace(cert, bound=F(99))))
print('indices shift:', flagged(replace(cert, indices=(2, 9, 17))))
run = cert.runs[0]
print('signmax bump: ', flagged(replace(
    cert, runs=(replace(run, sign_maximum=F(1, 2)),) + cert.runs[1:])))
print('preimage drop:', flagged(replace(
    cert, runs=(replace(run, preimage=run.preimage + e(1, F(1, 7))),)
    + cert.runs[1:])))
print('separator lie:', flagged(replace(
    cert, runs=(replace(run, separators=(6, 13, 19)),) + cert.runs[1:])))

# --- negative paths
try:
    extract_unconditional(identity_scene(21))
    print('TooFewIndices: NO RAISE (bad)')
except TooFewIndices as exc:
    print('TooFewIndices:', exc)

l1 = identity_scene(22, cod_spec=SumNorm())
try:
    c0_fix_probe(l1, (1, 3))
    print('NotC0Like: NO RAISE (bad)')
except NotC0Like as exc:
    print('NotC0Like:', exc.payload)

try:
    prop19_decompose(scene, (F(3), F(0)))
    print('norm>2: NO RAISE (bad)')
except InputError as exc:
    print('norm>2:', exc)

# prop19 pipeline-vs-depth nesting
r1 = prop19_decompose(scene, (F(1),))
r2 = prop19_decompose(scene, (F(1), F(1)))
print('nesting: r1 seps', r1.separators, 'prefix of r2', r2.separators)
