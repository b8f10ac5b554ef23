"""Exact evaluation of hierarchical admissible-set norms.

The norms handled here are all of the form

    |x| = max over an admissible family of index sets E_1 < ... < E_p
          of the sum over the family of the inner norm of x restricted
          to each set,

specialised to four kinds:

* ``sup``   -- largest absolute entry (the family is a single index),
* ``sum``   -- sum of absolute entries (the family is everything),
* ``level n`` -- families are constrained by their leading index: a
  level-1 set F must satisfy len(F) <= min(F); a level-(n+1) family of
  level-n sets E_1 < ... < E_p must satisfy p <= min(E_1),
* ``quotient`` -- the image norm induced by a surjection from a domain
  carrying one of the norms above (evaluation delegates to the quotient
  model, which reports an exact preimage).

Every evaluation returns a certificate carrying the maximising set
structure and signs, so the reported value can be replayed as a plain
signed sum and the structure revalidated independently of the search
that produced it.

The evaluator is an interval dynamic program over support positions:
restricting attention to supports loses nothing because the norms are
monotone under support extension, and splitting an interval at
non-support points never changes the achievable value.  The exhaustive
oracle ``norm_brute_oracle`` enumerates subsets and compositions
directly and is kept free of any shared code with the fast path.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

from .config import Caps, DEFAULT_CAPS
from .errors import CapExceeded, InputError, SignCapExceeded, SupportOverflow
from .seqvec import FinVec, Rat, as_rat


# ---------------------------------------------------------------------------
# norm specs


@dataclass(frozen=True)
class SupNorm:
    kind: str = field(default="sup", init=False)


@dataclass(frozen=True)
class SumNorm:
    kind: str = field(default="sum", init=False)


@dataclass(frozen=True)
class SchreierNorm:
    """Level-n hierarchical norm; level >= 1."""

    level: int
    kind: str = field(default="schreier", init=False)

    def __post_init__(self) -> None:
        if not isinstance(self.level, int) or self.level < 1:
            raise InputError(f"norm level must be a positive integer, got {self.level!r}")


@dataclass(frozen=True)
class QuotientNormSpec:
    """Norm induced on the image of a quotient model."""

    model: object  # quotient.QuotientModel; typed loosely to avoid an import cycle
    kind: str = field(default="quotient", init=False)


NormSpec = Union[SupNorm, SumNorm, SchreierNorm, QuotientNormSpec]


def spec_name(spec: NormSpec) -> str:
    if isinstance(spec, SchreierNorm):
        return f"level{spec.level}"
    return spec.kind


def is_lattice_norm(spec: NormSpec) -> bool:
    """True when |u| <= |v| pointwise implies norm(u) <= norm(v)."""
    return isinstance(spec, (SupNorm, SumNorm, SchreierNorm))


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class Leaf:
    """An index set evaluated by a plain absolute sum."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(self.indices)
        if list(idx) != sorted(set(idx)):
            raise InputError(f"leaf indices must be strictly increasing, got {idx}")
        for i in idx:
            if not isinstance(i, int) or i < 1:
                raise InputError(f"leaf index must be a positive integer, got {i!r}")
        object.__setattr__(self, "indices", idx)

    def support(self) -> tuple[int, ...]:
        return self.indices


@dataclass(frozen=True)
class Node:
    """A successive family of child witnesses summed together."""

    children: tuple["Tree", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise InputError("witness node needs at least one child")

    def support(self) -> tuple[int, ...]:
        out: list[int] = []
        for c in self.children:
            out.extend(c.support())
        return tuple(out)


Tree = Union[Leaf, Node]


@dataclass(frozen=True)
class QuotientWitness:
    """Preimage exhibiting the quotient norm value."""

    preimage: FinVec
    domain_certificate: "NormCertificate"


@dataclass(frozen=True)
class NormCertificate:
    """Replayable record of a norm evaluation.

    ``signs`` maps each leaf index to +1 or -1 so that the signed sum of
    the vector over the witness leaves reproduces ``value`` exactly.
    """

    value: Fraction
    witness: Union[Tree, QuotientWitness]
    signs: tuple[tuple[int, int], ...]

    def replay(self, x: FinVec) -> Fraction:
        if isinstance(self.witness, QuotientWitness):
            return self.domain_value(x)
        total = Fraction(0)
        for i, s in self.signs:
            total += s * x[i]
        return total

    def domain_value(self, x: FinVec) -> Fraction:
        # quotient witnesses replay through the stored preimage certificate
        assert isinstance(self.witness, QuotientWitness)
        return self.witness.domain_certificate.replay(self.witness.preimage)


def validate_witness(spec: NormSpec, tree: Union[Tree, QuotientWitness], *, root: bool = True) -> None:
    """Raise InputError when the witness structure is not admissible for spec."""
    if isinstance(spec, QuotientNormSpec):
        if not isinstance(tree, QuotientWitness):
            raise InputError("quotient norm witness must carry a preimage")
        dom_spec = spec.model.domain_norm  # type: ignore[attr-defined]
        validate_witness(dom_spec, tree.domain_certificate.witness)
        return
    if isinstance(tree, QuotientWitness):
        raise InputError("preimage witness supplied for a coordinate norm")
    if isinstance(tree, Leaf) and not tree.indices:
        if root:
            return  # empty witness: the zero vector
        raise InputError("non-root witness leaf is empty")
    if isinstance(spec, SupNorm):
        if not isinstance(tree, Leaf) or len(tree.indices) > 1:
            raise InputError("sup norm witness must be a single index")
        return
    if isinstance(spec, SumNorm):
        if not isinstance(tree, Leaf):
            raise InputError("sum norm witness must be a single leaf")
        return
    assert isinstance(spec, SchreierNorm)
    _validate_level(tree, spec.level)


def _validate_level(tree: Tree, level: int) -> None:
    if level == 1:
        if not isinstance(tree, Leaf):
            raise InputError("level-1 witness must be a leaf")
        if not tree.indices:
            raise InputError("level-1 witness leaf is empty")
        if len(tree.indices) > tree.indices[0]:
            raise InputError(
                f"leaf {tree.indices} has {len(tree.indices)} indices but leads at {tree.indices[0]}"
            )
        return
    if not isinstance(tree, Node):
        raise InputError(f"level-{level} witness must be a family node")
    supports = [c.support() for c in tree.children]
    for s in supports:
        if not s:
            raise InputError("witness family contains an empty member")
    for a, b in zip(supports, supports[1:]):
        if max(a) >= min(b):
            raise InputError("witness family members must be strictly increasing blocks")
    if len(tree.children) > min(supports[0]):
        raise InputError(
            f"family of {len(tree.children)} members leads at {min(supports[0])}"
        )
    for c in tree.children:
        _validate_level(c, level - 1)


def check_certificate(x: FinVec, spec: NormSpec, cert: NormCertificate) -> None:
    """Validate structure and replay the value; raise InputError on any mismatch."""
    validate_witness(spec, cert.witness)
    if isinstance(cert.witness, QuotientWitness):
        model = spec.model  # type: ignore[union-attr]
        image = model.apply(cert.witness.preimage)
        if image != x:
            raise InputError("preimage does not map onto the evaluated vector")
        dc = cert.witness.domain_certificate
        if dc.value != cert.value:
            raise InputError("quotient certificate value disagrees with its domain certificate")
        check_certificate(cert.witness.preimage, model.domain_norm, dc)
        return
    for i, s in cert.signs:
        if s not in (1, -1):
            raise InputError(f"certificate sign at {i} must be +1 or -1, got {s}")
    leaf_support = cert.witness.support()
    sign_idx = tuple(i for i, _ in cert.signs)
    if sorted(sign_idx) != sorted(set(sign_idx)):
        raise InputError("certificate signs repeat an index")
    if set(sign_idx) != set(leaf_support):
        raise InputError("certificate signs do not match the witness support")
    if cert.replay(x) != cert.value:
        raise InputError(
            f"certificate replays to {cert.replay(x)}, claimed {cert.value}"
        )


# ---------------------------------------------------------------------------
# evaluation


def norm_eval(x: FinVec, spec: NormSpec) -> NormCertificate:
    """Exact norm with a replayable maximising certificate."""
    if isinstance(spec, QuotientNormSpec):
        return spec.model.image_norm(x)  # type: ignore[attr-defined]
    pos = x.support()
    if not pos:
        return NormCertificate(Fraction(0), Leaf(()), ())
    if isinstance(spec, SupNorm):
        best = max(pos, key=lambda i: (abs(x[i]), -i))
        return _leaf_cert(x, (best,))
    if isinstance(spec, SumNorm):
        return _leaf_cert(x, pos)
    assert isinstance(spec, SchreierNorm)
    value, tree = _schreier_eval(x, spec.level)
    return _signed_cert(x, value, tree)


def norm_value(x: FinVec, spec: NormSpec) -> Fraction:
    return norm_eval(x, spec).value


def _leaf_cert(x: FinVec, indices: tuple[int, ...]) -> NormCertificate:
    tree = Leaf(indices)
    value = sum((abs(x[i]) for i in indices), Fraction(0))
    return _signed_cert(x, value, tree)


def _sign_of(v: Fraction) -> int:
    return 1 if v >= 0 else -1


def _signed_cert(x: FinVec, value: Fraction, tree: Tree) -> NormCertificate:
    signs = tuple((i, _sign_of(x[i])) for i in tree.support())
    return NormCertificate(value, tree, signs)


def _witness_key(tree: Tree) -> tuple:
    """Flattened shape used only for deterministic tie-breaking."""
    if isinstance(tree, Leaf):
        return (0, tree.indices)
    return (1, tuple(_witness_key(c) for c in tree.children))


def _schreier_eval(x: FinVec, level: int) -> tuple[Fraction, Tree]:
    pos = x.support()
    absval = {i: abs(x[i]) for i in pos}
    r = len(pos)

    def better(cand: tuple[Fraction, Tree], best: Optional[tuple[Fraction, Tree]]) -> bool:
        if best is None or cand[0] > best[0]:
            return True
        return cand[0] == best[0] and _witness_key(cand[1]) < _witness_key(best[1])

    lvl1_memo: dict[tuple[int, int], tuple[Fraction, Tree]] = {}

    def lvl1(i: int, j: int) -> tuple[Fraction, Tree]:
        key = (i, j)
        got = lvl1_memo.get(key)
        if got is not None:
            return got
        best: Optional[tuple[Fraction, Tree]] = None
        for t in range(i, j + 1):
            m = pos[t]
            take = min(m, j - t + 1)
            ranked = sorted(range(t, j + 1), key=lambda s: (-absval[pos[s]], pos[s]))[:take]
            idxs = tuple(sorted(pos[s] for s in ranked))
            val = sum((absval[k] for k in idxs), Fraction(0))
            cand = (val, Leaf(idxs))
            if better(cand, best):
                best = cand
        assert best is not None
        lvl1_memo[key] = best
        return best

    val_memo: dict[tuple[int, int, int], tuple[Fraction, Tree]] = {}
    split_memo: dict[tuple[int, int, int, int], tuple[Fraction, tuple[Tree, ...]]] = {}

    def val(lv: int, i: int, j: int) -> tuple[Fraction, Tree]:
        if lv == 1:
            return lvl1(i, j)
        key = (lv, i, j)
        got = val_memo.get(key)
        if got is not None:
            return got
        best: Optional[tuple[Fraction, Tree]] = None
        for t in range(i, j + 1):
            p = min(pos[t], j - t + 1)
            v, trees = split(lv - 1, j, t, p)
            cand = (v, Node(trees))
            if better(cand, best):
                best = cand
        assert best is not None
        val_memo[key] = best
        return best

    def split(lv: int, j: int, s: int, p: int) -> tuple[Fraction, tuple[Tree, ...]]:
        # positions s..j into exactly p successive nonempty groups, each scored at lv
        if p == 1:
            v, tr = val(lv, s, j)
            return v, (tr,)
        key = (lv, j, s, p)
        got = split_memo.get(key)
        if got is not None:
            return got
        best: Optional[tuple[Fraction, tuple[Tree, ...]]] = None
        for e in range(s, j - p + 2):
            v1, t1 = val(lv, s, e)
            v2, rest = split(lv, j, e + 1, p - 1)
            cand = (v1 + v2, (t1,) + rest)
            if (best is None or cand[0] > best[0]
                    or (cand[0] == best[0]
                        and tuple(_witness_key(t) for t in cand[1])
                        < tuple(_witness_key(t) for t in best[1]))):
                best = cand
        assert best is not None
        split_memo[key] = best
        return best

    return val(level, 0, r - 1)


# ---------------------------------------------------------------------------
# exhaustive oracle


def norm_brute_oracle(x: FinVec, spec: NormSpec, caps: Caps = DEFAULT_CAPS) -> Fraction:
    """Literal enumeration over subsets and compositions.

    Independent of the interval dynamic program: no code or memo tables
    are shared with norm_eval.  Rejects supports larger than
    caps.brute_support because the cost grows like 3^support.
    """
    pos = x.support()
    if len(pos) > caps.brute_support:
        raise SupportOverflow(
            f"brute oracle support {len(pos)} exceeds cap {caps.brute_support}"
        )
    if isinstance(spec, SupNorm):
        return max((abs(x[i]) for i in pos), default=Fraction(0))
    if isinstance(spec, SumNorm):
        return sum((abs(x[i]) for i in pos), Fraction(0))
    if isinstance(spec, QuotientNormSpec):
        raise InputError("brute oracle handles coordinate norms only")
    assert isinstance(spec, SchreierNorm)
    if not pos:
        return Fraction(0)
    absval = {i: abs(x[i]) for i in pos}
    memo: dict[tuple[tuple[int, ...], int], Fraction] = {}

    def admissible_sum(subset: tuple[int, ...]) -> Fraction:
        if len(subset) > subset[0]:
            return Fraction(-1)  # inadmissible marker
        return sum((absval[i] for i in subset), Fraction(0))

    def best(subset: tuple[int, ...], lv: int) -> Fraction:
        # best admissible value using exactly the indices of subset, or 0 skipping them
        key = (subset, lv)
        got = memo.get(key)
        if got is not None:
            return got
        out = Fraction(0)
        if lv == 1:
            s = admissible_sum(subset)
            if s > out:
                out = s
        else:
            n = len(subset)
            for cuts in itertools.product((0, 1), repeat=n - 1):
                parts: list[tuple[int, ...]] = []
                start = 0
                for k, c in enumerate(cuts):
                    if c:
                        parts.append(subset[start:k + 1])
                        start = k + 1
                parts.append(subset[start:])
                if len(parts) > subset[0]:
                    continue
                total = Fraction(0)
                ok = True
                for part in parts:
                    v = inner(part, lv - 1)
                    if v < 0:
                        ok = False
                        break
                    total += v
                if ok and total > out:
                    out = total
            memo[key] = out
            return out
        memo[key] = out
        return out

    def inner(part: tuple[int, ...], lv: int) -> Fraction:
        # each family member may itself discard indices: take the best over subsets
        best_v = Fraction(0)
        for mask in range(1, 1 << len(part)):
            sub = tuple(part[k] for k in range(len(part)) if mask >> k & 1)
            v = best(sub, lv)
            if v > best_v:
                best_v = v
        return best_v

    out = Fraction(0)
    for mask in range(1, 1 << len(pos)):
        sub = tuple(pos[k] for k in range(len(pos)) if mask >> k & 1)
        v = best(sub, spec.level)
        if v > out:
            out = v
    return out


# ---------------------------------------------------------------------------
# admissible support enumeration (for facet functionals)


def admissible_trees(universe: tuple[int, ...], level: int,
                     caps: Caps = DEFAULT_CAPS) -> list[tuple[tuple[int, ...], Tree]]:
    """All nonempty level-admissible subsets of the universe, with witness trees.

    Each support is listed once with one valid tree (the first found);
    different trees over the same support replay to the same signed sum,
    so one witness per support suffices for facet enumeration.
    """
    uni = tuple(sorted(set(universe)))
    for i in uni:
        if not isinstance(i, int) or i < 1:
            raise InputError(f"universe index must be a positive integer, got {i!r}")
    if not uni:
        return []

    def leaves_from(start_at: int) -> Iterator[Leaf]:
        rest = [i for i in uni if i >= start_at]
        for k, m in enumerate(rest):
            tail = rest[k + 1:]
            for size in range(0, min(m - 1, len(tail)) + 1):
                for combo in itertools.combinations(tail, size):
                    yield Leaf((m,) + combo)

    def trees(lv: int, start_at: int) -> Iterator[Tree]:
        if lv == 1:
            yield from leaves_from(start_at)
            return
        for first in trees(lv - 1, start_at):
            yield from extend(lv, [first], first.support()[0] - 1)

    def extend(lv: int, acc: list[Tree], room: int) -> Iterator[Node]:
        yield Node(tuple(acc))
        if room <= 0:
            return
        last = acc[-1].support()[-1]
        for nxt in trees(lv - 1, last + 1):
            yield from extend(lv, acc + [nxt], room - 1)

    found: dict[tuple[int, ...], Tree] = {}
    count = 0
    for t in trees(level, uni[0]):
        count += 1
        if count > caps.search_nodes:
            raise CapExceeded(
                f"admissible support enumeration exceeded {caps.search_nodes} nodes"
            )
        found.setdefault(t.support(), t)
    return sorted(found.items(), key=lambda kv: (len(kv[0]), kv[0]))


def admissible_supports(universe: tuple[int, ...], level: int,
                        caps: Caps = DEFAULT_CAPS) -> list[tuple[int, ...]]:
    """All nonempty level-admissible subsets of the given index universe."""
    return [s for s, _ in admissible_trees(universe, level, caps)]


def is_admissible_support(indices: tuple[int, ...], level: int) -> bool:
    """Membership test by direct recursion, usable as an oracle in tests."""
    idx = tuple(sorted(set(indices)))
    if idx != tuple(indices):
        raise InputError("support must be strictly increasing")
    if not idx:
        return False
    if level == 1:
        return len(idx) <= idx[0]
    # try all splits into p <= idx[0] successive chunks of level-(n-1) sets
    n = len(idx)

    def ok(splits: tuple[tuple[int, ...], ...]) -> bool:
        if len(splits) > idx[0]:
            return False
        return all(is_admissible_support(part, level - 1) for part in splits)

    for cuts in itertools.product((0, 1), repeat=n - 1):
        parts: list[tuple[int, ...]] = []
        start = 0
        for k, c in enumerate(cuts):
            if c:
                parts.append(idx[start:k + 1])
                start = k + 1
        parts.append(idx[start:])
        if ok(tuple(parts)):
            return True
    return False


# ---------------------------------------------------------------------------
# duality


@dataclass(frozen=True)
class DualCertificate:
    """Value of sup{f(x) : norm(x) <= 1} with both one-sided certificates.

    ``maximizer`` proves the value is attained (feasible, replayable);
    ``combo`` proves it is not exceeded: nonnegative weights on signed
    admissible functionals that sum to the value and recombine to f.
    """

    value: Fraction
    maximizer: FinVec
    combo: tuple[tuple[NormCertificate, Fraction], ...]


def functional_vector(cert: NormCertificate) -> FinVec:
    """The signed indicator functional a certificate evaluates."""
    return FinVec({i: Fraction(s) for i, s in cert.signs})


def dual_norm(f: FinVec, spec: NormSpec, caps: Caps = DEFAULT_CAPS) -> DualCertificate:
    """Exact dual norm via constraint generation.

    The unit ball is polyhedral with facets given by signed admissible
    functionals, so iterating (solve LP over current functionals; ask
    norm_eval for a violated facet at the optimum) terminates with an LP
    optimum whose dual weights certify the value from above.
    """
    if not is_lattice_norm(spec):
        raise InputError("dual norm requires a coordinate norm")
    supp = f.support()
    if not supp:
        return DualCertificate(Fraction(0), FinVec.zero(), ())
    from .lp import solve_lp  # local import keeps module load order flexible

    cols = list(supp)
    col_of = {i: k for k, i in enumerate(cols)}
    d = len(cols)

    # seed with +-basis functionals so the initial LP is bounded
    funcs: list[NormCertificate] = []
    seen: set[tuple[tuple[int, int], ...]] = set()

    def add(cert: NormCertificate) -> bool:
        key = tuple(cert.signs)
        if key in seen:
            return False
        seen.add(key)
        funcs.append(cert)
        return True

    def singleton_tree(i: int) -> Tree:
        t: Tree = Leaf((i,))
        if isinstance(spec, SchreierNorm):
            for _ in range(spec.level - 1):
                t = Node((t,))
        return t

    for i in cols:
        for s in (1, -1):
            add(NormCertificate(Fraction(1), singleton_tree(i), ((i, s),)))

    objective = [f[i] for i in cols]
    guard = 0
    while True:
        guard += 1
        if guard > caps.search_nodes:
            raise CapExceeded("dual norm constraint generation did not settle")
        a_ub = []
        for cert in funcs:
            row = [Fraction(0)] * d
            for i, s in cert.signs:
                if i in col_of:
                    row[col_of[i]] = Fraction(s)
            a_ub.append(row)
        b_ub = [Fraction(1)] * len(funcs)
        res = solve_lp(objective, a_ub, b_ub, sense="max")
        if res.status != "optimal":
            raise InputError(f"dual norm LP unexpectedly {res.status}")
        xstar = FinVec({i: res.x[col_of[i]] for i in cols})
        cert = norm_eval(xstar, spec)
        if cert.value <= 1:
            combo = []
            for k, lam in enumerate(res.dual_ub):
                if lam != 0:
                    combo.append((funcs[k], lam))
            out = DualCertificate(res.value, xstar, tuple(combo))
            _check_dual(f, spec, out)
            return out
        # cut: the certificate's functional is violated at xstar
        if not add(cert):
            raise CapExceeded("dual norm separation repeated a functional")


def _check_dual(f: FinVec, spec: NormSpec, dc: DualCertificate) -> None:
    if norm_eval(dc.maximizer, spec).value > 1:
        raise InputError("dual certificate maximizer leaves the unit ball")
    attained = sum((f[i] * dc.maximizer[i] for i in f.support()), Fraction(0))
    if attained != dc.value:
        raise InputError("dual certificate maximizer misses the claimed value")
    total = Fraction(0)
    recombined = FinVec.zero()
    for cert, lam in dc.combo:
        if lam < 0:
            raise InputError("dual certificate weight is negative")
        validate_witness(spec, cert.witness)
        recombined = recombined + functional_vector(cert).scale(lam)
        total += lam
    if total != dc.value or recombined != f:
        raise InputError("dual certificate combination does not reproduce the functional")


# ---------------------------------------------------------------------------
# operator norms


@dataclass(frozen=True)
class OperatorNormResult:
    value: Fraction
    argument: FinVec        # unit vector in the domain norm
    functional: FinVec      # signed admissible functional for the codomain norm
    image_value: Fraction   # functional applied to the image, equals value


def facet_functionals(rows: tuple[int, ...], spec: NormSpec,
                 caps: Caps = DEFAULT_CAPS) -> Iterator[NormCertificate]:
    """Signed facet functionals of the codomain ball over the given rows.

    Global sign flips are skipped (the first sign is pinned to +1): the
    dual norm of f and -f agree, so half the patterns suffice.
    """
    if isinstance(spec, SupNorm):
        pairs: list[tuple[tuple[int, ...], Tree]] = [((i,), Leaf((i,))) for i in rows]
    elif isinstance(spec, SumNorm):
        pairs = [(rows, Leaf(rows))] if rows else []
    else:
        assert isinstance(spec, SchreierNorm)
        pairs = admissible_trees(rows, spec.level, caps)
    count = 0
    for s, tree in pairs:
        width = len(s)
        for mask in range(1 << max(width - 1, 0)):
            signs = tuple(
                (s[k], 1 if (k == 0 or not (mask >> (k - 1) & 1)) else -1)
                for k in range(width)
            )
            count += 1
            if count > caps.facet_functionals:
                raise CapExceeded(
                    f"facet enumeration exceeded {caps.facet_functionals} functionals"
                )
            yield NormCertificate(Fraction(len(s)), tree, signs)


def matrix_is_diagonal(entries: dict[tuple[int, int], Fraction]) -> bool:
    return all(r == c for (r, c) in entries)


def operator_norm(apply_fn, domain_cols: tuple[int, ...], rows: tuple[int, ...],
                  dom: NormSpec, cod: NormSpec,
                  caps: Caps = DEFAULT_CAPS) -> OperatorNormResult:
    """Exact operator norm by scanning codomain facet functionals.

    ``apply_fn`` maps a FinVec over domain_cols to a FinVec over rows.
    For each signed admissible functional psi of the codomain norm, the
    best argument solves a dual-norm problem for the pulled-back
    functional; the overall maximum over psi is the operator norm since
    the codomain norm is the maximum of psi over its facets.
    """
    if not domain_cols:
        raise InputError("operator norm needs a nonempty domain")
    # row_k[i] = (A e_i)_k, assembled once from the basis images
    rows_data: dict[int, dict[int, Fraction]] = {}
    for i in domain_cols:
        img = apply_fn(FinVec.basis(i))
        for k in img.support():
            rows_data.setdefault(k, {})[i] = img[k]
    live_rows = tuple(sorted(set(rows_data) & set(rows)))
    if set(rows_data) - set(rows):
        raise InputError("operator image leaves the declared row universe")
    best: Optional[OperatorNormResult] = None
    for psi in facet_functionals(live_rows, cod, caps):
        pulled: dict[int, Fraction] = {}
        for k, s in psi.signs:
            for i, v in rows_data.get(k, {}).items():
                pulled[i] = pulled.get(i, Fraction(0)) + s * v
        fvec = FinVec(pulled)
        if fvec.is_zero():
            continue
        dc = dual_norm(fvec, dom, caps)
        if best is None or dc.value > best.value:
            best = OperatorNormResult(dc.value, dc.maximizer,
                                      functional_vector(psi), dc.value)
    if best is None:
        # the zero operator
        anchor = FinVec.basis(domain_cols[0])
        dn = norm_eval(anchor, dom).value
        unit = anchor.scale(Fraction(1, 1) / dn)
        return OperatorNormResult(Fraction(0), unit, FinVec.zero(), Fraction(0))
    return best


def diagonal_operator_norm(diag: dict[int, Fraction], spec: NormSpec) -> Fraction:
    """Fast exact path for diagonal maps with equal domain and codomain norms.

    Valid because the norms are lattice norms: |diag(x)| <= max|d| * |x|
    pointwise gives the upper bound, and a basis vector attains it.
    """
    if not is_lattice_norm(spec):
        raise InputError("diagonal shortcut requires a lattice norm")
    return max((abs(v) for v in diag.values()), default=Fraction(0))


# ---------------------------------------------------------------------------
# unconditional constants


@dataclass(frozen=True)
class SignSearchResult:
    value: Fraction
    signs: tuple[int, ...]
    coefficients: tuple[Fraction, ...]


def uncond_constant(vectors: tuple[FinVec, ...], coefficients: tuple[Rat, ...],
                    spec: NormSpec, caps: Caps = DEFAULT_CAPS) -> SignSearchResult:
    """Worst ratio norm(sum of signed terms) / norm(sum of terms) over all signs.

    Exhaustive over sign patterns modulo a global flip; the vector count
    is capped because the search is exponential.
    """
    n = len(vectors)
    if n == 0:
        raise InputError("unconditional constant needs at least one vector")
    if len(coefficients) != n:
        raise InputError("one coefficient per vector is required")
    if n > caps.sign_vectors:
        raise SignCapExceeded(f"{n} vectors exceed the sign cap {caps.sign_vectors}")
    coeffs = tuple(as_rat(c) for c in coefficients)
    base = FinVec.zero()
    for a, v in zip(coeffs, vectors):
        base = base + v.scale(a)
    denom = norm_eval(base, spec).value
    if denom == 0:
        raise InputError("the unsigned combination is zero")
    best_val = Fraction(0)
    best_signs: tuple[int, ...] = ()
    for mask in range(1 << max(n - 1, 0)):
        signs = tuple(1 if (k == 0 or not (mask >> (k - 1) & 1)) else -1
                      for k in range(n))
        y = FinVec.zero()
        for s, a, v in zip(signs, coeffs, vectors):
            y = y + v.scale(s * a)
        val = norm_eval(y, spec).value
        if val > best_val:
            best_val = val
            best_signs = signs
    return SignSearchResult(best_val / denom, best_signs, coeffs)


def sum_abs(x: FinVec) -> Fraction:
    return sum((abs(x[i]) for i in x.support()), Fraction(0))


def sup_abs(x: FinVec) -> Fraction:
    return max((abs(x[i]) for i in x.support()), default=Fraction(0))
