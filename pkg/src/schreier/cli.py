"""Command line: evaluate norms, build schedules, extract and verify.

Exit codes separate three situations.  0 is a pass.  1 is a certified
negative outcome: a search exhausted its budget, a validation failed with
an exact margin, a replay rejected a certificate.  2 is bad input.  The
output is deterministic: identical arguments produce identical bytes (the
--seed flag is accepted for replay compatibility; every current command is
exhaustive, so no sampling consumes it).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import docio
from .blocking import InequalityReport, check_lemma
from .errors import InputError, NegativeOutcome, ParseError
from .norms import NormCertificate, check_certificate, norm_eval, norm_value
from .pipeline import (build_average, c0_equiv_constant, c0_fix_probe,
                       extract_unconditional, s1_witness_search,
                       spreading_probe, theorem_b_contradiction_check,
                       verify_unconditionality)
from .quotient import covering_constant, min_norm_preimage, quotient_norm
from .schedule import build_schedule, validate_schedule
from .seqvec import FinVec


def _rat(value: Fraction) -> str:
    return docio.rat_str(value)


def _load(path: str) -> docio.Document:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}")
    return docio.parse_document(text)


def _write(path: str, records) -> None:
    doc = docio.Document(tuple(records))
    Path(path).write_text(docio.serialize_document(doc), encoding="utf-8")
    print(f"wrote {path}")


def _fresh_names(doc: docio.Document, base: str, count: int) -> tuple[str, ...]:
    taken = {r.name for r in doc.all("vector")}
    names = tuple(f"{base}{k}" for k in range(1, count + 1))
    clash = sorted(taken.intersection(names))
    if clash:
        raise InputError(
            f"output names {', '.join(clash)} already taken; pass another --name")
    return names


def _print_report(report: InequalityReport) -> None:
    for gate in report.hypotheses:
        note = f": {gate.note}" if gate.note else ""
        print(f"gate {'ok' if gate.ok else 'FAIL'} {gate.description}{note}")
    for row in report.clauses:
        print(f"clause {'ok' if row.ok else 'FAIL'} {row.description}"
              f" lhs={_rat(row.lhs)} rhs={_rat(row.rhs)}")
    print(f"passed {'yes' if report.passed else 'no'}")


# ---------------------------------------------------------------------------
# commands


def _cmd_norm(args) -> int:
    spec = docio.parse_spec(args.space)
    if (args.vector is None) == (args.doc is None):
        raise InputError("pass exactly one of --vector or --doc")
    if args.vector is not None:
        x = docio.parse_entries(args.vector.split())
        arg_name = "argument"
    else:
        doc = _load(args.doc)
        rec = doc.find("vector", args.record)
        x = doc.vector(rec.name)
        arg_name = rec.name
    cert = norm_eval(x, spec)
    support = ",".join(str(i) for i in sorted(set(cert.witness.support())))
    print(f"value {_rat(cert.value)}")
    print("witness {" + support + "}")
    if args.out:
        _write(args.out, (docio.vector_record(arg_name, x),
                          docio.norm_certificate_record(args.name, spec,
                                                        arg_name, cert)))
    return 0


def _cmd_schedule(args) -> int:
    if (args.length is None) == (args.doc is None):
        raise InputError("pass exactly one of --length or --doc")
    if args.length is not None:
        sched = build_schedule(args.length)
        name = args.name
    else:
        doc = _load(args.doc)
        rec = doc.find("schedule", args.record)
        sched = doc.schedule(rec.name)
        name = rec.name
    print(f"schedule {name} last-index {sched.last_index}")
    code = 0
    if args.validate:
        report = validate_schedule(sched)
        for ch in report.checks:
            status = "ok" if ch.ok else "skip" if ch.ok is None else "FAIL"
            where = "" if ch.p is None else f" p={ch.p}"
            values = ("" if ch.lhs is None
                      else f" lhs={_rat(ch.lhs)} rhs={_rat(ch.rhs)}")
            print(f"clause {status} {ch.clause}{where}{values}")
        if report.binding is not None:
            print(f"binding {report.binding.clause}")
        print(f"passed {'yes' if report.passed else 'no'}")
        code = 0 if report.passed else 1
    if args.out:
        _write(args.out, (docio.schedule_record(name, sched),))
    return code


def _cmd_quotient(args) -> int:
    doc = _load(args.doc)
    rec = doc.find("model", args.record)
    model = doc.model(rec.name)
    modes = [m for m in (args.norm, args.preimage) if m is not None]
    if len(modes) + (1 if args.covering else 0) != 1:
        raise InputError("pass exactly one of --norm, --preimage, --covering")
    if args.covering:
        print(f"covering {_rat(covering_constant(model).value)}")
        return 0
    if args.norm is not None:
        y = docio.parse_entries(args.norm.split())
        res = quotient_norm(model, y)
        print(f"value {_rat(res.value)}")
        print(f"preimage {docio.vec_str(res.preimage)}".rstrip())
        return 0
    y = docio.parse_entries(args.preimage.split())
    x = min_norm_preimage(model, y, slack=docio.parse_rat(args.slack))
    print(f"preimage {docio.vec_str(x)}".rstrip())
    print(f"value {_rat(norm_value(x, model.domain_norm))}")
    return 0


def _scene_from(doc: docio.Document, record: Optional[str]):
    rec = doc.find("scene", record)
    return rec.name, doc.scene(rec.name)


def _cmd_extract(args) -> int:
    doc = _load(args.doc)
    scene_name, scene = _scene_from(doc, args.record)
    sets = None
    if args.coeffs:
        sets = tuple(tuple(docio.parse_rat(t) for t in group.split(","))
                     for group in args.coeffs)
    cert = extract_unconditional(scene, coefficient_sets=sets,
                                 n_indices=args.stages)
    print("indices " + " ".join(str(p) for p in cert.indices))
    print(f"operator {_rat(cert.operator_value)}")
    print(f"covering {_rat(cert.covering)}")
    print(f"bound {_rat(cert.bound)}")
    print(f"measured {_rat(cert.measured)}")
    print(f"runs {len(cert.runs)}")
    print(f"passed {'yes' if cert.passed else 'no'}")
    if args.out:
        names = _fresh_names(doc, f"{args.name}.run", len(cert.runs))
        records = list(doc.records)
        records.extend(docio.vector_record(n, run.preimage)
                       for n, run in zip(names, cert.runs))
        records.append(docio.uncond_certificate_record(
            args.name, scene_name, cert, names))
        _write(args.out, records)
    return 0 if cert.passed else 1


def _cmd_saturate(args) -> int:
    doc = _load(args.doc)
    scene_name, scene = _scene_from(doc, args.record)
    report = s1_witness_search(scene.model, scene.ys, budget=args.budget,
                               target=docio.parse_rat(args.target))
    witness = report.witness
    print(f"constant {_rat(witness.constant)}")
    print(f"target {_rat(witness.target)}")
    for avg in witness.averages:
        print(f"average {docio.vec_str(avg)}")
    if args.out:
        names = _fresh_names(doc, f"{args.name}.avg", len(witness.averages))
        records = list(doc.records)
        records.extend(docio.vector_record(n, avg)
                       for n, avg in zip(names, witness.averages))
        records.append(docio.saturation_certificate_record(
            args.name, scene_name, witness, names))
        _write(args.out, records)
    return 0


def _cmd_probe(args) -> int:
    doc = _load(args.doc)
    _, scene = _scene_from(doc, args.record)
    if args.spreading == (args.depths is not None):
        raise InputError("pass exactly one of --spreading or --depths")
    if args.spreading:
        starts = tuple(int(t) for t in args.starts.split(","))
        report = spreading_probe(scene.ys, scene.model.codomain_norm,
                                 args.k, start_depths=starts)
        print(f"classification {report.classification}")
        print(f"scale {_rat(report.scale)}")
        for row in report.rows:
            positions = ",".join(str(p) for p in row.positions)
            print(f"row start={row.start} positions={positions}"
                  f" value={_rat(row.value)}")
        return 0
    depths = tuple(int(t) for t in args.depths.split(","))
    report = c0_fix_probe(scene, depths)
    print("depths " + " ".join(str(d) for d in report.depths))
    print("indices " + " ".join(str(q) for q in report.indices))
    note = f" ({report.stability_note})" if report.stability_note else ""
    print(f"stabilized {'yes' if report.stabilized else 'no'}{note}")
    print(f"uniform-bound {_rat(report.uniform_bound)}")
    for gate in report.gates:
        print(f"gate {'ok' if gate.ok else 'FAIL'} {gate.description}")
    for row in report.rows:
        print(f"row {'ok' if row.ok else 'FAIL'} {row.description}"
              f" lhs={_rat(row.lhs)} rhs={_rat(row.rhs)}")
    print(f"passed {'yes' if report.passed else 'no'}")
    return 0 if report.passed else 1


# -- verification --------------------------------------------------------------


def _verify_norm(doc: docio.Document, rec: docio.Record) -> list[tuple[str, bool]]:
    x = doc.vector(rec.get("argument"))
    spec = docio.parse_spec(rec.get("space"))
    value = docio.parse_rat(rec.get("value"))
    tree = docio.parse_tree(rec.get("witness"))
    signs = tuple((int(t.split(":")[0]), int(t.split(":")[1]))
                  for t in rec.get("signs").split())
    checks = []
    try:
        check_certificate(x, spec, NormCertificate(value, tree, signs))
        checks.append(("witness replays to the recorded value", True))
    except InputError as exc:
        checks.append((f"witness replays to the recorded value ({exc})", False))
    checks.append(("recorded value is the exact norm",
                   norm_value(x, spec) == value))
    return checks


def _verify_unconditionality(doc: docio.Document,
                             rec: docio.Record) -> list[tuple[str, bool]]:
    scene = doc.scene(rec.get("scene"))
    indices = tuple(int(t) for t in rec.get("indices").split())
    runs = []
    for payload in rec.all("run"):
        toks = payload.split()
        cut = toks.index("separators")
        runs.append((toks[0], docio.parse_rat(toks[1]),
                     tuple(docio.parse_rat(t) for t in toks[3:cut]),
                     tuple(int(t) for t in toks[cut + 1:])))
    rebuilt = extract_unconditional(
        scene, coefficient_sets=tuple(coeffs for _, _, coeffs, _ in runs),
        n_indices=len(indices))
    checks = [
        ("staged indices match the recomputation", rebuilt.indices == indices),
        ("operator value matches",
         rebuilt.operator_value == docio.parse_rat(rec.get("operator"))),
        ("covering constant matches",
         rebuilt.covering == docio.parse_rat(rec.get("covering"))),
        ("bound matches", rebuilt.bound == docio.parse_rat(rec.get("bound"))),
        ("measured sign maximum matches",
         rebuilt.measured == docio.parse_rat(rec.get("measured")))]
    for k, ((pname, signmax, _, seps), run) in enumerate(zip(runs, rebuilt.runs),
                                                         start=1):
        checks.append((f"run {k} separators match", run.separators == seps))
        checks.append((f"run {k} sign maximum matches",
                       run.sign_maximum == signmax))
        checks.append((f"run {k} preimage matches",
                       doc.vector(pname) == run.preimage))
    checks.append(("replay verifier accepts the rebuilt certificate",
                   verify_unconditionality(scene, rebuilt).passed))
    return checks


def _verify_saturation(doc: docio.Document,
                       rec: docio.Record) -> list[tuple[str, bool]]:
    scene = doc.scene(rec.get("scene"))
    spec = scene.model.codomain_norm
    constant = docio.parse_rat(rec.get("constant"))
    target = docio.parse_rat(rec.get("target"))
    averages = []
    checks = []
    for k, payload in enumerate(rec.all("average"), start=1):
        vname, recipe = payload.split(None, 1)
        rebuilt = build_average(scene.ys, docio.parse_average(recipe), spec)
        checks.append((f"average {k} rebuilds from its recipe",
                       rebuilt == doc.vector(vname)))
        averages.append(rebuilt)
    blocks_ok = all(max(a.support()) < min(b.support())
                    for a, b in zip(averages, averages[1:]))
    checks.append(("averages form successive blocks", blocks_ok))
    checks.append(("recorded constant is the exact equivalence constant",
                   c0_equiv_constant(tuple(averages), spec) == constant))
    checks.append(("constant stays within the target", constant <= target))
    return checks


def _verify_contradiction(doc: docio.Document, rec: docio.Record) -> bool:
    model = doc.model(rec.get("model"))
    report = theorem_b_contradiction_check(model, doc.contradiction_trace(rec))
    _print_report(report)
    return report.passed


def _cmd_verify(args) -> int:
    doc = _load(args.doc)
    if args.lemma:
        _, scene = _scene_from(doc, args.record)
        report = check_lemma(args.lemma, scene)
        _print_report(report)
        return 0 if report.passed else 1
    schedules = doc.all("schedule")
    certificates = doc.all("certificate")
    if not schedules and not certificates:
        raise InputError("nothing to verify: no schedule or certificate records")
    failed = 0
    for rec in schedules:
        report = validate_schedule(doc.schedule(rec.name))
        if not report.passed:
            failed += 1
            binding = report.binding.clause if report.binding else "?"
            print(f"schedule {rec.name}: FAIL ({binding})")
        else:
            print(f"schedule {rec.name}: pass")
    for rec in certificates:
        kind = rec.get("kind")
        if kind == "contradiction":
            ok = _verify_contradiction(doc, rec)
        else:
            runner = {"norm": _verify_norm,
                      "unconditionality": _verify_unconditionality,
                      "saturation": _verify_saturation}[kind]
            checks = runner(doc, rec)
            ok = all(flag for _, flag in checks)
            for desc, flag in checks:
                if not flag:
                    print(f"  FAIL {desc}")
        if not ok:
            failed += 1
        print(f"certificate {rec.name} ({kind}): {'pass' if ok else 'FAIL'}")
    print("all verified" if not failed else f"verification failed ({failed})")
    return 0 if not failed else 1


# ---------------------------------------------------------------------------
# wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schreier",
        description="Exact finite models of hierarchical sequence norms.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="fix randomized sampling (accepted for replay;"
                             " current commands are exhaustive)")
    common.add_argument("--record", help="record name inside the document")

    p = sub.add_parser("norm", parents=[common],
                       help="evaluate a norm with a maximising witness")
    p.add_argument("--space", required=True, help="sup, sum, or levelN")
    p.add_argument("--vector", help='inline entries, e.g. "2:1/1 3:1/1"')
    p.add_argument("--doc", help="document holding the vector")
    p.add_argument("--out", help="write the evaluation certificate here")
    p.add_argument("--name", default="cert", help="certificate record name")
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("schedule", parents=[common],
                       help="build or validate a decay schedule")
    p.add_argument("--length", type=int, help="build a schedule of this length")
    p.add_argument("--doc", help="document holding a schedule to load")
    p.add_argument("--validate", action="store_true",
                   help="check every summability clause")
    p.add_argument("--out", help="write the schedule document here")
    p.add_argument("--name", default="plan", help="schedule record name")
    p.set_defaults(func=_cmd_schedule)

    p = sub.add_parser("quotient", parents=[common],
                       help="quotient norms, preimages, covering constants")
    p.add_argument("--doc", required=True, help="document holding the model")
    p.add_argument("--norm", help="range vector to evaluate")
    p.add_argument("--preimage", help="range vector to lift")
    p.add_argument("--slack", default="1/1", help="preimage norm slack factor")
    p.add_argument("--covering", action="store_true",
                   help="exact minimal covering constant")
    p.set_defaults(func=_cmd_quotient)

    p = sub.add_parser("extract", parents=[common],
                       help="extract a sign-unconditional subsequence")
    p.add_argument("--doc", required=True, help="document holding the scene")
    p.add_argument("--coeffs", action="append",
                   help='one coefficient set, e.g. "1/1,0/1,0/1" (repeatable)')
    p.add_argument("--stages", type=int, help="number of staged indices")
    p.add_argument("--out", help="write the certificate document here")
    p.add_argument("--name", default="cert", help="certificate record name")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("verify", parents=[common],
                       help="replay certificates, schedules, or one inequality")
    p.add_argument("--doc", required=True, help="document to verify")
    p.add_argument("--lemma", help="window inequality id to replay on the scene")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("saturate", parents=[common],
                       help="search for a bounded family of averages")
    p.add_argument("--doc", required=True, help="document holding the scene")
    p.add_argument("--budget", type=int, default=64,
                   help="candidate evaluations allowed")
    p.add_argument("--target", default="2/1", help="equivalence constant target")
    p.add_argument("--out", help="write the witness document here")
    p.add_argument("--name", default="cert", help="certificate record name")
    p.set_defaults(func=_cmd_saturate)

    p = sub.add_parser("probe", parents=[common],
                       help="spreading classification or fixed-point probe")
    p.add_argument("--doc", required=True, help="document holding the scene")
    p.add_argument("--spreading", action="store_true",
                   help="classify k-fold sums over deepening starts")
    p.add_argument("--k", type=int, default=3, help="summands per tuple")
    p.add_argument("--starts", default="1", help="comma-separated start depths")
    p.add_argument("--depths", help="comma-separated decomposition depths")
    p.set_defaults(func=_cmd_probe)
    return parser


def run_command(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NegativeOutcome as exc:
        print(f"negative: {exc}")
        _print_payload(getattr(exc, "payload", None))
        return 1
    except ParseError as exc:
        print(f"parse error: {exc}")
        return 2
    except InputError as exc:
        print(f"error: {exc}")
        return 2


def _render(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, Fraction):
        return docio.rat_str(value)
    if isinstance(value, (int, str)):
        return str(value)
    if isinstance(value, FinVec):
        return docio.vec_str(value) or "zero"
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_render(v)}"
                               for k, v in sorted(value.items())) + "}"
    if value is None:
        return "none"
    return type(value).__name__


def _print_payload(payload) -> None:
    if isinstance(payload, dict):
        for key in sorted(payload):
            print(f"  {key}: {_render(payload[key])}")
    elif payload is not None:
        print(f"  {_render(payload)}")


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
