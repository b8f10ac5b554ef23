"""Line-based text documents for vectors, models, scenes, and certificates.

A document is a sequence of records.  Each record opens with ``kind name``
at column zero, carries indented ``field payload`` lines, and closes with
``end``.  Rationals serialize as ``p/q`` (always with the denominator),
vectors as ascending ``index:value`` pairs.  Parsing canonicalizes: values
reduce, entries sort, fields settle into schema order; serializing a parsed
document therefore reproduces canonical input byte for byte.  Unknown record
kinds and unknown fields are rejected with the offending line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

from .blocking import Scene
from .errors import InputError, ParseError
from .norms import (Leaf, Node, NormCertificate, SchreierNorm, SumNorm,
                    SupNorm, Tree)
from .pipeline import AverageTree, ContradictionTrace
from .quotient import Matrix, QuotientModel
from .schedule import EpsilonSchedule, TailDescriptor
from .seqvec import Blocking, FinVec

NormSpec = Union[SupNorm, SumNorm, SchreierNorm]

_NAME = re.compile(r"[A-Za-z][A-Za-z0-9_.-]*\Z")
_RAT = re.compile(r"-?\d+(/-?\d+)?\Z")


# ---------------------------------------------------------------------------
# token formatting and parsing


def rat_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_rat(token: str, line: int = 0) -> Fraction:
    if not _RAT.match(token):
        raise ParseError(f"malformed rational {token!r}", line)
    if "/" in token:
        p, q = token.split("/")
        if int(q) == 0:
            raise ParseError(f"zero denominator in {token!r}", line)
        return Fraction(int(p), int(q))
    return Fraction(int(token))


def parse_int(token: str, line: int = 0) -> int:
    if not re.match(r"-?\d+\Z", token):
        raise ParseError(f"malformed integer {token!r}", line)
    return int(token)


def vec_str(v: FinVec) -> str:
    return " ".join(f"{i}:{rat_str(c)}" for i, c in sorted(v.items()))


def parse_entries(tokens: Iterable[str], line: int = 0) -> FinVec:
    data: dict[int, Fraction] = {}
    for tok in tokens:
        if ":" not in tok:
            raise ParseError(f"entry {tok!r} needs the form index:value", line)
        idx, val = tok.split(":", 1)
        i = parse_int(idx, line)
        if i < 1:
            raise ParseError(f"entry index must be positive, got {i}", line)
        if i in data:
            raise ParseError(f"entry index {i} repeats", line)
        data[i] = parse_rat(val, line)
    return FinVec(data)


def spec_str(spec: NormSpec) -> str:
    if isinstance(spec, SchreierNorm):
        return f"level{spec.level}"
    return spec.kind


def parse_spec(token: str, line: int = 0) -> NormSpec:
    if token == "sup":
        return SupNorm()
    if token == "sum":
        return SumNorm()
    m = re.match(r"level(\d+)\Z", token)
    if m and int(m.group(1)) >= 1:
        return SchreierNorm(int(m.group(1)))
    raise ParseError(f"unknown norm space {token!r}", line)


# -- witness trees, as one-line s-expressions --------------------------------


def tree_str(tree: Tree) -> str:
    if isinstance(tree, Leaf):
        return "(set" + "".join(f" {i}" for i in tree.indices) + ")"
    return "(family " + " ".join(tree_str(c) for c in tree.children) + ")"


def average_str(tree: AverageTree) -> str:
    if tree.level == 1:
        members = " ".join(str(i) for i in tree.members)
        return f"(1 {rat_str(tree.scaling)} of {members})"
    inner = " ".join(average_str(c) for c in tree.children)
    return f"({tree.level} {rat_str(tree.scaling)} {inner})"


def _sexpr_tokens(text: str, line: int) -> list[str]:
    toks = text.replace("(", " ( ").replace(")", " ) ").split()
    if not toks:
        raise ParseError("empty expression", line)
    return toks


def parse_tree(text: str, line: int = 0) -> Tree:
    toks = _sexpr_tokens(text, line)
    tree, rest = _read_tree(toks, line)
    if rest:
        raise ParseError(f"trailing tokens after witness: {' '.join(rest)}", line)
    return tree


def _read_tree(toks: list[str], line: int) -> tuple[Tree, list[str]]:
    if not toks or toks[0] != "(":
        raise ParseError("witness expression must open with '('", line)
    if len(toks) < 2:
        raise ParseError("unterminated witness expression", line)
    head, toks = toks[1], toks[2:]
    if head == "set":
        indices = []
        while toks and toks[0] != ")":
            indices.append(parse_int(toks.pop(0), line))
        if not toks:
            raise ParseError("unterminated witness leaf", line)
        return Leaf(tuple(indices)), toks[1:]
    if head == "family":
        children: list[Tree] = []
        while toks and toks[0] == "(":
            child, toks = _read_tree(toks, line)
            children.append(child)
        if not toks or toks[0] != ")":
            raise ParseError("unterminated witness family", line)
        if not children:
            raise ParseError("witness family needs children", line)
        return Node(tuple(children)), toks[1:]
    raise ParseError(f"unknown witness head {head!r}", line)


def parse_average(text: str, line: int = 0) -> AverageTree:
    toks = _sexpr_tokens(text, line)
    tree, rest = _read_average(toks, line)
    if rest:
        raise ParseError(f"trailing tokens after average: {' '.join(rest)}", line)
    return tree


def _read_average(toks: list[str], line: int) -> tuple[AverageTree, list[str]]:
    if len(toks) < 4 or toks[0] != "(":
        raise ParseError("average expression must open with '(level scale'", line)
    level = parse_int(toks[1], line)
    scale = parse_rat(toks[2], line)
    toks = toks[3:]
    if toks[0] == "of":
        toks = toks[1:]
        members = []
        while toks and toks[0] != ")":
            members.append(parse_int(toks.pop(0), line))
        if not toks:
            raise ParseError("unterminated average expression", line)
        return AverageTree(level, scale, tuple(members)), toks[1:]
    children: list[AverageTree] = []
    while toks and toks[0] == "(":
        child, toks = _read_average(toks, line)
        children.append(child)
    if not toks or toks[0] != ")":
        raise ParseError("unterminated average expression", line)
    return AverageTree(level, scale, children=tuple(children)), toks[1:]


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class Record:
    """One parsed record: fields are (key, canonical payload) pairs."""

    kind: str
    name: str
    fields: tuple[tuple[str, str], ...]

    def get(self, key: str) -> Optional[str]:
        for k, payload in self.fields:
            if k == key:
                return payload
        return None

    def all(self, key: str) -> tuple[str, ...]:
        return tuple(payload for k, payload in self.fields if k == key)


# schema: field -> (multiplicity, payload checker); checker returns the
# canonical payload string or raises ParseError
_ONE, _OPT, _MANY = "one", "opt", "many"


def _canon_entries(payload: str, line: int) -> str:
    return vec_str(parse_entries(payload.split(), line))


def _canon_rat(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) != 1:
        raise ParseError("expected a single rational", line)
    return rat_str(parse_rat(toks[0], line))


def _canon_rats(payload: str, line: int) -> str:
    toks = payload.split()
    if not toks:
        raise ParseError("expected at least one rational", line)
    return " ".join(rat_str(parse_rat(t, line)) for t in toks)


def _canon_int(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) != 1:
        raise ParseError("expected a single integer", line)
    return str(parse_int(toks[0], line))


def _canon_ints(payload: str, line: int) -> str:
    toks = payload.split()
    if not toks:
        raise ParseError("expected at least one integer", line)
    return " ".join(str(parse_int(t, line)) for t in toks)


def _canon_name(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) != 1 or not _NAME.match(toks[0]):
        raise ParseError(f"expected one record name, got {payload!r}", line)
    return toks[0]


def _canon_names(payload: str, line: int) -> str:
    toks = payload.split()
    if not toks:
        raise ParseError("expected at least one record name", line)
    for t in toks:
        if not _NAME.match(t):
            raise ParseError(f"malformed record name {t!r}", line)
    return " ".join(toks)


def _canon_spec(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) != 1:
        raise ParseError("expected a single norm space", line)
    return spec_str(parse_spec(toks[0], line))


def _canon_yesno(payload: str, line: int) -> str:
    if payload.strip() not in ("yes", "no"):
        raise ParseError(f"expected yes or no, got {payload!r}", line)
    return payload.strip()


def _canon_shape(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) != 2:
        raise ParseError("shape takes rows and columns", line)
    r, c = (parse_int(t, line) for t in toks)
    if r < 1 or c < 1:
        raise ParseError("shape entries must be positive", line)
    return f"{r} {c}"


def _canon_row(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) < 2:
        raise ParseError("row takes an index and entries", line)
    r = parse_int(toks[0], line)
    if r < 1:
        raise ParseError("row index must be positive", line)
    return f"{r} {vec_str(parse_entries(toks[1:], line))}"


def _canon_tail(payload: str, line: int) -> str:
    toks = payload.split()
    if toks and toks[0] == "none" and len(toks) == 1:
        return "none"
    if len(toks) == 5 and toks[0] == "geometric" and toks[1] == "a" and toks[3] == "q":
        return ("geometric a " + rat_str(parse_rat(toks[2], line))
                + " q " + rat_str(parse_rat(toks[4], line)))
    if len(toks) == 5 and toks[0] == "factorial" and toks[1] == "c" and toks[3] == "r":
        return ("factorial c " + rat_str(parse_rat(toks[2], line))
                + " r " + rat_str(parse_rat(toks[4], line)))
    raise ParseError(f"malformed tail descriptor {payload!r}", line)


def _canon_window(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) != 2:
        raise ParseError("window takes two block indices", line)
    return " ".join(str(parse_int(t, line)) for t in toks)


def _canon_tree(payload: str, line: int) -> str:
    return tree_str(parse_tree(payload, line))


def _canon_signs(payload: str, line: int) -> str:
    pairs = []
    for tok in payload.split():
        if ":" not in tok:
            raise ParseError(f"sign {tok!r} needs the form index:sign", line)
        idx, sgn = tok.split(":", 1)
        i = parse_int(idx, line)
        s = parse_int(sgn, line)
        if s not in (1, -1):
            raise ParseError(f"sign at {i} must be 1 or -1", line)
        pairs.append((i, s))
    if len({i for i, _ in pairs}) != len(pairs):
        raise ParseError("sign indices repeat", line)
    return " ".join(f"{i}:{s}" for i, s in sorted(pairs))


def _canon_run(payload: str, line: int) -> str:
    toks = payload.split()
    if len(toks) < 6 or "coeffs" not in toks or "separators" not in toks:
        raise ParseError(
            "run takes preimage, sign maximum, coeffs ..., separators ...", line)
    name = _canon_name(toks[0], line)
    signmax = rat_str(parse_rat(toks[1], line))
    if toks[2] != "coeffs":
        raise ParseError("run expects 'coeffs' after the sign maximum", line)
    cut = toks.index("separators")
    coeffs = [rat_str(parse_rat(t, line)) for t in toks[3:cut]]
    seps = [str(parse_int(t, line)) for t in toks[cut + 1:]]
    if not coeffs or len(coeffs) != len(seps):
        raise ParseError("run needs equally many coeffs and separators", line)
    return f"{name} {signmax} coeffs {' '.join(coeffs)} separators {' '.join(seps)}"


def _canon_average(payload: str, line: int) -> str:
    toks = payload.split(None, 1)
    if len(toks) != 2:
        raise ParseError("average takes a vector name and a recipe", line)
    return f"{_canon_name(toks[0], line)} {average_str(parse_average(toks[1], line))}"


Schema = tuple[tuple[str, str, Callable[[str, int], str]], ...]

_SCHEMAS: dict[str, Schema] = {
    "vector": (("entries", _ONE, _canon_entries),),
    "matrix": (("shape", _ONE, _canon_shape), ("row", _MANY, _canon_row)),
    "schedule": (("eps", _ONE, _canon_rats), ("tilde", _ONE, _canon_rats),
                 ("tail", _ONE, _canon_tail)),
    "model": (("matrix", _ONE, _canon_name), ("domain", _ONE, _canon_spec),
              ("codomain", _ONE, _canon_spec),
              ("range", _ONE, lambda p, ln: ("induced" if p.strip() == "induced"
                                             else _canon_spec(p, ln))),
              ("covering", _ONE, _canon_rat),
              ("policy", _ONE, lambda p, ln: _canon_choice(p, ln, ("induced", "supplied", "minimal"))),
              ("trusted", _ONE, _canon_yesno)),
    "scene": (("model", _ONE, _canon_name), ("schedule", _ONE, _canon_name),
              ("domain-blocks", _ONE, _canon_ints),
              ("codomain-blocks", _ONE, _canon_ints),
              ("ys", _OPT, _canon_names), ("coeffs", _OPT, _canon_rats),
              ("window", _OPT, _canon_window), ("p-list", _OPT, _canon_ints),
              ("r-list", _OPT, _canon_ints), ("argument", _OPT, _canon_name),
              ("block-index", _OPT, _canon_int)),
}

_CERT_SCHEMAS: dict[str, Schema] = {
    "norm": (("space", _ONE, _canon_spec), ("argument", _ONE, _canon_name),
             ("value", _ONE, _canon_rat), ("witness", _ONE, _canon_tree),
             ("signs", _ONE, _canon_signs)),
    "unconditionality": (("scene", _ONE, _canon_name),
                         ("indices", _ONE, _canon_ints),
                         ("operator", _ONE, _canon_rat),
                         ("covering", _ONE, _canon_rat),
                         ("bound", _ONE, _canon_rat),
                         ("measured", _ONE, _canon_rat),
                         ("run", _MANY, _canon_run)),
    "saturation": (("scene", _ONE, _canon_name), ("constant", _ONE, _canon_rat),
                   ("target", _ONE, _canon_rat),
                   ("average", _MANY, _canon_average)),
    "contradiction": (("model", _ONE, _canon_name), ("delta", _ONE, _canon_rat),
                      ("m", _ONE, _canon_int), ("lambda", _ONE, _canon_rat),
                      ("deep", _ONE, _canon_ints), ("z", _ONE, _canon_names),
                      ("x", _ONE, _canon_names), ("omega", _ONE, _canon_names),
                      ("eps", _ONE, _canon_rats)),
}


def _canon_choice(payload: str, line: int, choices: tuple[str, ...]) -> str:
    tok = payload.strip()
    if tok not in choices:
        raise ParseError(f"expected one of {', '.join(choices)}, got {tok!r}", line)
    return tok


# ---------------------------------------------------------------------------
# document


@dataclass(frozen=True)
class Document:
    records: tuple[Record, ...]

    def find(self, kind: str, name: Optional[str] = None) -> Record:
        matches = [r for r in self.records if r.kind == kind
                   and (name is None or r.name == name)]
        if name is None and len(matches) > 1:
            raise InputError(
                f"document holds {len(matches)} {kind} records; name one")
        if not matches:
            where = f" named {name!r}" if name else ""
            raise InputError(f"document has no {kind} record{where}")
        return matches[0]

    def all(self, kind: str) -> tuple[Record, ...]:
        return tuple(r for r in self.records if r.kind == kind)

    # -- builders ------------------------------------------------------------

    def vector(self, name: str) -> FinVec:
        return parse_entries(self.find("vector", name).get("entries").split())

    def matrix(self, name: str) -> Matrix:
        rec = self.find("matrix", name)
        rows_n, cols_n = (int(t) for t in rec.get("shape").split())
        entries = [[Fraction(0)] * cols_n for _ in range(rows_n)]
        for payload in rec.all("row"):
            toks = payload.split()
            r = int(toks[0])
            if r > rows_n:
                raise InputError(f"matrix {name}: row {r} outside shape")
            vec = parse_entries(toks[1:])
            if vec.max_index() > cols_n:
                raise InputError(f"matrix {name}: row {r} exceeds {cols_n} columns")
            for c, v in vec.items():
                entries[r - 1][c - 1] = v
        return Matrix(tuple(tuple(row) for row in entries))

    def schedule(self, name: str) -> EpsilonSchedule:
        rec = self.find("schedule", name)
        eps = tuple(parse_rat(t) for t in rec.get("eps").split())
        tilde = tuple(parse_rat(t) for t in rec.get("tilde").split())
        toks = rec.get("tail").split()
        if toks[0] == "none":
            tail = TailDescriptor("none")
        elif toks[0] == "geometric":
            tail = TailDescriptor("geometric", a=parse_rat(toks[2]),
                                  q=parse_rat(toks[4]))
        else:
            tail = TailDescriptor("factorial", c=parse_rat(toks[2]),
                                  r=parse_rat(toks[4]))
        return EpsilonSchedule(eps, tilde, tail)

    def model(self, name: str) -> QuotientModel:
        rec = self.find("model", name)
        rng = rec.get("range")
        return QuotientModel(
            self.matrix(rec.get("matrix")),
            parse_spec(rec.get("domain")),
            parse_spec(rec.get("codomain")),
            None if rng == "induced" else parse_spec(rng),
            parse_rat(rec.get("covering")),
            rec.get("policy"),
            rec.get("trusted") == "yes")

    def scene(self, name: str) -> Scene:
        rec = self.find("scene", name)
        window = rec.get("window")
        n = m = None
        if window is not None:
            n, m = (int(t) for t in window.split())
        arg = rec.get("argument")
        block = rec.get("block-index")
        return Scene(
            self.model(rec.get("model")),
            self.schedule(rec.get("schedule")),
            Blocking(int(t) for t in rec.get("domain-blocks").split()),
            Blocking(int(t) for t in rec.get("codomain-blocks").split()),
            ys=tuple(self.vector(v) for v in (rec.get("ys") or "").split()),
            coeffs=tuple(parse_rat(t) for t in (rec.get("coeffs") or "").split()),
            n=n, m=m,
            p_list=tuple(int(t) for t in (rec.get("p-list") or "").split()),
            r_list=tuple(int(t) for t in (rec.get("r-list") or "").split()),
            x=self.vector(arg) if arg else None,
            block_index=int(block) if block else None)

    def contradiction_trace(self, rec: Record) -> ContradictionTrace:
        return ContradictionTrace(
            parse_rat(rec.get("delta")),
            int(rec.get("m")),
            parse_rat(rec.get("lambda")),
            tuple(self.vector(v) for v in rec.get("z").split()),
            tuple(self.vector(v) for v in rec.get("x").split()),
            tuple(self.vector(v) for v in rec.get("omega").split()),
            tuple(int(t) for t in rec.get("deep").split()),
            tuple(parse_rat(t) for t in rec.get("eps").split()))


# ---------------------------------------------------------------------------
# parse / serialize


def _schema_for(kind: str, rec_fields: list[tuple[str, str, int]],
                line: int) -> Schema:
    if kind != "certificate":
        return _SCHEMAS[kind]
    kinds = [p for k, p, _ in rec_fields if k == "kind"]
    if len(kinds) != 1:
        raise ParseError("certificate needs exactly one kind field", line)
    sub = kinds[0].strip()
    if sub not in _CERT_SCHEMAS:
        raise ParseError(f"unknown certificate kind {sub!r}", line)
    return (("kind", _ONE, lambda p, ln: _canon_choice(p, ln, (sub,))),) \
        + _CERT_SCHEMAS[sub]


def _close_record(kind: str, name: str,
                  raw: list[tuple[str, str, int]], line: int) -> Record:
    schema = _schema_for(kind, raw, line)
    known = {key for key, _, _ in schema}
    for key, _, ln in raw:
        if key not in known:
            raise ParseError(f"unknown field {key!r} in {kind} record", ln)
    fields: list[tuple[str, str]] = []
    for key, mult, canon in schema:
        hits = [(payload, ln) for k, payload, ln in raw if k == key]
        if mult == _ONE and len(hits) != 1:
            raise ParseError(
                f"{kind} record needs exactly one {key!r} field", line)
        if mult == _OPT and len(hits) > 1:
            raise ParseError(f"{kind} record repeats field {key!r}", line)
        if mult == _MANY and not hits and key != "row":
            # only a zero matrix may leave its repeated field empty
            raise ParseError(
                f"{kind} record needs at least one {key!r} field", line)
        for payload, ln in hits:
            fields.append((key, canon(payload, ln)))
    return Record(kind, name, tuple(fields))


def parse_document(text: str) -> Document:
    records: list[Record] = []
    kind = name = None
    raw: list[tuple[str, str, int]] = []
    opened = 0
    for ln, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if kind is None:
            toks = stripped.split()
            if len(toks) != 2:
                raise ParseError("expected a 'kind name' record header", ln)
            if toks[0] not in _SCHEMAS and toks[0] != "certificate":
                raise ParseError(f"unknown record kind {toks[0]!r}", ln)
            if not _NAME.match(toks[1]):
                raise ParseError(f"malformed record name {toks[1]!r}", ln)
            kind, name, raw, opened = toks[0], toks[1], [], ln
            continue
        if stripped == "end":
            records.append(_close_record(kind, name, raw, opened))
            kind = name = None
            continue
        if not line.startswith("  "):
            raise ParseError("record fields must be indented two spaces", ln)
        parts = stripped.split(None, 1)
        raw.append((parts[0], parts[1] if len(parts) > 1 else "", ln))
    if kind is not None:
        raise ParseError(f"record {kind} {name} never closed", opened)
    seen: set[tuple[str, str]] = set()
    doc = Document(tuple(records))
    for rec in records:
        if (rec.kind, rec.name) in seen:
            raise ParseError(f"duplicate {rec.kind} record {rec.name!r}")
        seen.add((rec.kind, rec.name))
    _check_references(doc)
    return doc


_REFS = {
    ("model", "matrix"): "matrix",
    ("scene", "model"): "model",
    ("scene", "schedule"): "schedule",
    ("scene", "ys"): "vector",
    ("scene", "argument"): "vector",
    ("certificate", "argument"): "vector",
    ("certificate", "scene"): "scene",
    ("certificate", "model"): "model",
    ("certificate", "z"): "vector",
    ("certificate", "x"): "vector",
    ("certificate", "omega"): "vector",
}


def _check_references(doc: Document) -> None:
    have = {(r.kind, r.name) for r in doc.records}
    for rec in doc.records:
        for key, payload in rec.fields:
            target = _REFS.get((rec.kind, key))
            if target is None and rec.kind == "certificate" and key in ("run", "average"):
                target, payload = "vector", payload.split()[0]
            if target is None:
                continue
            for name in payload.split():
                if (target, name) not in have:
                    raise ParseError(
                        f"{rec.kind} {rec.name} references missing {target} {name!r}")


def serialize_document(doc: Document) -> str:
    chunks = []
    for rec in doc.records:
        lines = [f"{rec.kind} {rec.name}"]
        for key, payload in rec.fields:
            lines.append(f"  {key} {payload}".rstrip())
        lines.append("end")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


# ---------------------------------------------------------------------------
# record emitters (library objects -> records)


def vector_record(name: str, v: FinVec) -> Record:
    return Record("vector", name, (("entries", vec_str(v)),))


def matrix_record(name: str, m: Matrix) -> Record:
    fields: list[tuple[str, str]] = [("shape", f"{m.nrows} {m.ncols}")]
    for r in range(1, m.nrows + 1):
        row = FinVec({c: m.entry(r, c) for c in range(1, m.ncols + 1)
                      if m.entry(r, c)})
        if not row.is_zero():
            fields.append(("row", f"{r} {vec_str(row)}"))
    return Record("matrix", name, tuple(fields))


def schedule_record(name: str, s: EpsilonSchedule) -> Record:
    tail = s.tail
    if tail.kind == "geometric":
        tail_str = f"geometric a {rat_str(tail.a)} q {rat_str(tail.q)}"
    elif tail.kind == "factorial":
        tail_str = f"factorial c {rat_str(tail.c)} r {rat_str(tail.r)}"
    else:
        tail_str = "none"
    return Record("schedule", name, (
        ("eps", " ".join(rat_str(v) for v in s.eps)),
        ("tilde", " ".join(rat_str(v) for v in s.eps_tilde)),
        ("tail", tail_str)))


def model_record(name: str, model: QuotientModel, matrix_name: str) -> Record:
    rng = "induced" if model.y_norm is None else spec_str(model.y_norm)
    return Record("model", name, (
        ("matrix", matrix_name),
        ("domain", spec_str(model.domain_norm)),
        ("codomain", spec_str(model.codomain_norm)),
        ("range", rng),
        ("covering", rat_str(model.covering_c)),
        ("policy", model.c_policy),
        ("trusted", "yes" if model.trusted else "no")))


def scene_record(name: str, scene: Scene, model_name: str,
                 schedule_name: str, ys_names: tuple[str, ...],
                 argument_name: Optional[str] = None) -> Record:
    fields: list[tuple[str, str]] = [
        ("model", model_name), ("schedule", schedule_name),
        ("domain-blocks", " ".join(str(q) for q in scene.dom_blocking.cuts)),
        ("codomain-blocks", " ".join(str(q) for q in scene.cod_blocking.cuts))]
    if ys_names:
        fields.append(("ys", " ".join(ys_names)))
    if scene.coeffs:
        fields.append(("coeffs", " ".join(rat_str(c) for c in scene.coeffs)))
    if scene.n is not None and scene.m is not None:
        fields.append(("window", f"{scene.n} {scene.m}"))
    if scene.p_list:
        fields.append(("p-list", " ".join(str(p) for p in scene.p_list)))
    if scene.r_list:
        fields.append(("r-list", " ".join(str(r) for r in scene.r_list)))
    if argument_name:
        fields.append(("argument", argument_name))
    if scene.block_index is not None:
        fields.append(("block-index", str(scene.block_index)))
    return Record("scene", name, tuple(fields))


def norm_certificate_record(name: str, spec: NormSpec, argument_name: str,
                            cert: NormCertificate) -> Record:
    signs = " ".join(f"{i}:{s}" for i, s in sorted(cert.signs))
    return Record("certificate", name, (
        ("kind", "norm"), ("space", spec_str(spec)),
        ("argument", argument_name), ("value", rat_str(cert.value)),
        ("witness", tree_str(cert.witness)), ("signs", signs)))


def uncond_certificate_record(name: str, scene_name: str, cert,
                              preimage_names: tuple[str, ...]) -> Record:
    fields: list[tuple[str, str]] = [
        ("kind", "unconditionality"), ("scene", scene_name),
        ("indices", " ".join(str(p) for p in cert.indices)),
        ("operator", rat_str(cert.operator_value)),
        ("covering", rat_str(cert.covering)),
        ("bound", rat_str(cert.bound)),
        ("measured", rat_str(cert.measured))]
    for run, pname in zip(cert.runs, preimage_names):
        fields.append(("run", f"{pname} {rat_str(run.sign_maximum)} coeffs "
                       + " ".join(rat_str(c) for c in run.coefficients)
                       + " separators "
                       + " ".join(str(r) for r in run.separators)))
    return Record("certificate", name, tuple(fields))


def saturation_certificate_record(name: str, scene_name: str, witness,
                                  average_names: tuple[str, ...]) -> Record:
    fields: list[tuple[str, str]] = [
        ("kind", "saturation"), ("scene", scene_name),
        ("constant", rat_str(witness.constant)),
        ("target", rat_str(witness.target))]
    for tree, vname in zip(witness.trees, average_names):
        fields.append(("average", f"{vname} {average_str(tree)}"))
    return Record("certificate", name, tuple(fields))


def contradiction_certificate_record(name: str, model_name: str,
                                     trace: ContradictionTrace,
                                     z_names, x_names, omega_names) -> Record:
    return Record("certificate", name, (
        ("kind", "contradiction"), ("model", model_name),
        ("delta", rat_str(trace.delta)), ("m", str(trace.m)),
        ("lambda", rat_str(trace.lam)),
        ("deep", " ".join(str(i) for i in trace.deep_indices)),
        ("z", " ".join(z_names)), ("x", " ".join(x_names)),
        ("omega", " ".join(omega_names)),
        ("eps", " ".join(rat_str(v) for v in trace.eps))))
