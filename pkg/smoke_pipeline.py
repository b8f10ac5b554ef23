"""Scratch smoke tests for the pipeline module (deleted before finish)."""
from fractions import Fraction as F

from schreier.pipeline import (extract_unconditional, verify_unconditionality,
                               prop19_decompose, c0_fix_probe)
from schreier.norms import SchreierNorm, SupNorm
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
    dom = Blocking(tuple(range(blocks + 1)))
    cod = Blocking(tuple(range(blocks + 1)))
    ys = tuple(e(i) for i in range(1, blocks + 1))
    return Scene(model, build_schedule(blocks), dom, cod, ys=ys)


scene = identity_scene(22)
cert = extract_unconditional(scene)
print('indices:', cert.indices)
print('operator_value:', cert.operator_value)
print('bound:', cert.bound)
print('measured:', cert.measured)
print('cert passed:', cert.passed)
for t, run in enumerate(cert.runs, 1):
    print(f'run {t}: seps={run.separators} sign_max={run.sign_maximum} '
          f'passed={run.passed}')
    bad_g = [g for g in run.gates if not g.ok]
    bad_c = [c for c in list(run.drift) + list(run.claims)
             + list(run.subclaims) if not c.ok]
    if bad_g:
        print('  BAD GATES:', [(g.description, g.note) for g in bad_g])
    if bad_c:
        print('  BAD CLAUSES:', [(c.description, c.lhs, c.rhs) for c in bad_c])
    if not run.interval.passed:
        print('  interval FAIL:',
              [(g.description, g.note) for g in run.interval.hypotheses
               if not g.ok],
              [(c.description, c.lhs, c.rhs) for c in run.interval.clauses
               if not c.ok])

report = verify_unconditionality(scene, cert)
print('verify passed:', report.passed)
if not report.passed:
    print('  bad gates:', [(g.description, g.note)
                           for g in report.hypotheses if not g.ok][:8])
    print('  bad clauses:', [(c.description, c.lhs, c.rhs)
                             for c in report.clauses if not c.ok][:8])

print()
res = prop19_decompose(scene, (F(1), F(1)))
print('prop19 (1,1): indices', res.indices, 'seps', res.separators,
      'scale', res.scale, 'passed', res.passed)
if not res.passed:
    print('  bad gates:', [(g.description, g.note)
                           for g in res.gates if not g.ok][:8])
    print('  bad rows:', [(c.description, c.lhs, c.rhs)
                          for c in res.rows if not c.ok][:8])
res0 = prop19_decompose(scene, (F(0), F(0)))
print('prop19 (0,0): scale', res0.scale, 'passed', res0.passed,
      'seps', res0.separators)

print()
fix = c0_fix_probe(scene, (1, 2))
print('c0_fix depths', fix.depths, 'stabilized', fix.stabilized,
      'uniform', fix.uniform_bound, 'passed', fix.passed)
if not fix.passed:
    print('  note:', fix.stability_note)
    print('  bad gates:', [(g.description, g.note)
                           for g in fix.gates if not g.ok][:8])
    print('  bad rows:', [(c.description, c.lhs, c.rhs)
                          for c in fix.rows if not c.ok][:8])
