import io
import sys
from contextlib import redirect_stdout
from fractions import Fraction as F
from pathlib import Path

from schreier import docio
from schreier.cli import run_command
from schreier.norms import SchreierNorm, SumNorm, SupNorm
from schreier.quotient import Matrix, QuotientModel
from schreier.schedule import build_schedule
from schreier.seqvec import Blocking, FinVec
from schreier.blocking import Scene

W = Path("/tmp/cliwork")
W.mkdir(exist_ok=True)


def run(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = run_command(list(argv))
    return code, buf.getvalue()


def scene_records(blocks, cod="sup", dom="level1"):
    entries = tuple(tuple(F(int(r == c)) for c in range(blocks))
                    for r in range(blocks))
    mat = Matrix(entries)
    recs = [docio.matrix_record("T", mat),
            docio.schedule_record("plan", build_schedule(blocks))]
    model = QuotientModel.induced(mat, docio.parse_spec(dom), docio.parse_spec(cod))
    recs.append(docio.model_record("M", model, "T"))
    names = []
    for i in range(1, blocks + 1):
        names.append(f"y{i}")
        recs.append(docio.vector_record(f"y{i}", FinVec({i: F(1)})))
    scene = Scene(model, build_schedule(blocks), Blocking(range(blocks + 1)),
                  Blocking(range(blocks + 1)),
                  ys=tuple(FinVec({i: F(1)}) for i in range(1, blocks + 1)))
    recs.append(docio.scene_record("S", scene, "M", "plan", tuple(names)))
    return recs


# 1. round-trip stability
doc = docio.Document(tuple(scene_records(22)))
text = docio.serialize_document(doc)
again = docio.serialize_document(docio.parse_document(text))
assert text == again, "round trip failed"
print("round-trip ok, doc bytes:", len(text))
(W / "scene22.txt").write_text(text)

# parse errors
for bad, tag in (("vector v\n  entries 1:0/0\nend\n", "zero denominator"),
                 ("vector v\n  entries 1:1/1\n  bogus 3\nend\n", "unknown field"),
                 ("thing v\nend\n", "unknown kind"),
                 ("vector v\n  entries 1:1/1\n", "never closed")):
    try:
        docio.parse_document(bad)
        print("MISSED parse error:", tag)
    except Exception as exc:
        print("parse error ok:", tag, "->", exc)

# 2. norm command
code, out = run("norm", "--space", "level1", "--vector", "2:1/1 3:1/1",
                "--out", str(W / "norm.txt"))
print("norm:", code, out.strip().replace("\n", " | "))
assert code == 0 and "value 2/1" in out and "witness {2,3}" in out
code, out = run("verify", "--doc", str(W / "norm.txt"))
print("verify norm:", code, out.strip().replace("\n", " | "))
assert code == 0

# tampered norm certificate
tampered = (W / "norm.txt").read_text().replace("value 2/1", "value 3/1")
(W / "norm_bad.txt").write_text(tampered)
code, out = run("verify", "--doc", str(W / "norm_bad.txt"))
print("verify tampered norm:", code, out.strip().replace("\n", " | "))
assert code == 1

# 3. schedule build + validate + geometric counterexample
code, out = run("schedule", "--length", "6", "--validate",
                "--out", str(W / "plan.txt"))
print("schedule:", code, out.splitlines()[-1])
assert code == 0
code, out = run("verify", "--doc", str(W / "plan.txt"))
assert code == 0 and "schedule plan: pass" in out

from schreier.schedule import EpsilonSchedule, TailDescriptor
tail = TailDescriptor("geometric", a=F(1, 64), q=F(1, 4))
eps = tuple(tail.eps_at(i) for i in range(-1, 7))
tilde = []
for p in range(0, 7):
    cand = tail.eps_at(p + 2) / (8 * (p + 1))
    tilde.append(cand if p == 0 else min(cand, tilde[-1] / 4))
geo = EpsilonSchedule(eps, tuple(tilde), tail)
(W / "geo.txt").write_text(docio.serialize_document(
    docio.Document((docio.schedule_record("geo", geo),))))
code, out = run("schedule", "--doc", str(W / "geo.txt"), "--validate")
print("geometric validate:", code)
print(out)
assert code == 1 and "(1.1) second part" in out and "lhs=5/72" in out

# 4. extract + verify closure + tamper
code, out = run("extract", "--doc", str(W / "scene22.txt"),
                "--out", str(W / "cert.txt"))
print("extract:", code, out.strip().replace("\n", " | "))
assert code == 0
code, out = run("verify", "--doc", str(W / "cert.txt"))
print("verify extract:", code, out.strip().replace("\n", " | "))
assert code == 0 and "all verified" in out
bad = (W / "cert.txt").read_text().replace("measured 1/1", "measured 1/2")
(W / "cert_bad.txt").write_text(bad)
code, out = run("verify", "--doc", str(W / "cert_bad.txt"))
print("verify tampered extract:", code, [l for l in out.splitlines() if "FAIL" in l])
assert code == 1

# determinism
code2, out2 = run("extract", "--doc", str(W / "scene22.txt"),
                  "--out", str(W / "cert2.txt"))
assert (W / "cert.txt").read_text() == (W / "cert2.txt").read_text()
print("extract determinism ok")

# 5. saturate + verify
doc64 = docio.Document(tuple(scene_records(64, cod="level1")))
(W / "scene64.txt").write_text(docio.serialize_document(doc64))
code, out = run("saturate", "--doc", str(W / "scene64.txt"), "--budget", "10",
                "--out", str(W / "sat.txt"))
print("saturate:", code, out.splitlines()[0], "averages:",
      sum(1 for l in out.splitlines() if l.startswith("average")))
assert code == 0 and "constant 1/1" in out
code, out = run("verify", "--doc", str(W / "sat.txt"))
print("verify saturate:", code, out.strip().splitlines()[-1])
assert code == 0
code, out = run("saturate", "--doc", str(W / "scene64.txt"), "--budget", "1")
print("saturate exhausted:", code, out.strip().replace("\n", " | "))
assert code == 1 and "best_constant: 4/1" in out

# 6. probe
doc20 = docio.Document(tuple(scene_records(20)))
(W / "scene20.txt").write_text(docio.serialize_document(doc20))
code, out = run("probe", "--doc", str(W / "scene20.txt"), "--spreading",
                "--k", "3", "--starts", "3,5")
print("probe spreading:", code, out.splitlines()[0])
assert code == 0 and "classification c0-like" in out
code, out = run("probe", "--doc", str(W / "scene22.txt"), "--depths", "1,2")
print("probe c0fix:", code, out.splitlines()[2])
assert code == 0 and "stabilized yes" in out

# 7. quotient
m2 = Matrix(((F(1), F(0)), (F(0), F(1))))
qm = QuotientModel.supplied(m2, SchreierNorm(1), SupNorm(), SupNorm(), F(1))
qdoc = docio.Document((docio.matrix_record("Q", m2),
                       docio.model_record("QM", qm, "Q")))
(W / "model.txt").write_text(docio.serialize_document(qdoc))
code, out = run("quotient", "--doc", str(W / "model.txt"), "--norm", "1:1/1 2:1/1")
print("quotient norm:", code, out.strip().replace("\n", " | "))
assert code == 0 and "value 1/1" in out
code, out = run("quotient", "--doc", str(W / "model.txt"), "--preimage", "2:1/1")
print("quotient preimage:", code, out.strip().replace("\n", " | "))
assert code == 0 and "preimage 2:1/1" in out
code, out = run("quotient", "--doc", str(W / "model.txt"), "--covering")
print("quotient covering:", code, out.strip())
assert code == 0 and "covering 1/1" in out

# 8. verify --lemma on a scene with staged data
scene_recs = scene_records(22)
scene_recs[-1] = docio.Record("scene", "S", scene_recs[-1].fields + (
    ("coeffs", "1/1 1/1"), ("p-list", "2 9"), ("r-list", "1 6 13")))
(W / "lemma.txt").write_text(docio.serialize_document(
    docio.Document(tuple(scene_recs))))
code, out = run("verify", "--doc", str(W / "lemma.txt"), "--lemma", "1.3")
print("verify lemma 1.3:", code, out.splitlines()[-1])
assert code == 0

print("ALL CLI SMOKE OK")
