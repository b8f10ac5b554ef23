"""Finitely supported rational vectors, blockings, and block decompositions.

Everything downstream works with vectors in the linear span of a 1-based
coordinate basis, with exact rational entries.  A FinVec stores only its
nonzero entries.  A Blocking is a strictly increasing cut sequence
0 = q_0 < q_1 < ... < q_L; block i is the index interval (q_{i-1}, q_i].
A BlockVector is a vector presented as one part per block, each part
supported inside its own block, so that algebra on parts (scaling a block,
deleting a block) is exact by construction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import IndexOutOfRange, LengthMismatch, SupportOverflow

Rat = Fraction


def as_rat(value) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact rational: {value!r}")


class FinVec:
    """Immutable finitely supported vector with 1-based integer indices."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[int, Rat] | Iterable[tuple[int, Rat]] = ()):
        items = entries.items() if isinstance(entries, Mapping) else entries
        data: dict[int, Fraction] = {}
        for i, v in items:
            if not isinstance(i, int) or i < 1:
                raise IndexOutOfRange(f"index must be a positive integer, got {i!r}")
            v = as_rat(v)
            if v != 0:
                data[i] = v
        object.__setattr__(self, "_entries", dict(sorted(data.items())))

    def __setattr__(self, name, value):
        raise AttributeError("FinVec is immutable")

    @staticmethod
    def zero() -> "FinVec":
        return FinVec()

    @staticmethod
    def basis(i: int, value: Rat = Fraction(1)) -> "FinVec":
        return FinVec([(i, value)])

    def __getitem__(self, i: int) -> Fraction:
        return self._entries.get(i, Fraction(0))

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return iter(self._entries.items())

    def support(self) -> tuple[int, ...]:
        return tuple(self._entries)

    def max_index(self) -> int:
        return max(self._entries, default=0)

    def min_index(self) -> int:
        return min(self._entries, default=0)

    def is_zero(self) -> bool:
        return not self._entries

    def __add__(self, other: "FinVec") -> "FinVec":
        data = dict(self._entries)
        for i, v in other._entries.items():
            w = data.get(i, 0) + v
            if w:
                data[i] = w
            else:
                data.pop(i, None)
        return FinVec(data)

    def __sub__(self, other: "FinVec") -> "FinVec":
        return self + (-other)

    def __neg__(self) -> "FinVec":
        return FinVec({i: -v for i, v in self._entries.items()})

    def scale(self, c) -> "FinVec":
        c = as_rat(c)
        if c == 0:
            return FinVec()
        return FinVec({i: c * v for i, v in self._entries.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, FinVec) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(tuple(self._entries.items()))

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __repr__(self) -> str:
        body = " ".join(f"{i}:{v}" for i, v in self._entries.items())
        return f"FinVec({body})" if body else "FinVec()"


def restrict(x: FinVec, indices: Iterable[int]) -> FinVec:
    """Coordinate restriction: keep entries whose index lies in `indices`."""
    keep = set(indices)
    return FinVec({i: v for i, v in x.items() if i in keep})


class Blocking:
    """Cut sequence 0 = q_0 < q_1 < ... < q_L; block i = (q_{i-1}, q_i]."""

    __slots__ = ("cuts",)

    def __init__(self, cuts: Iterable[int]):
        cuts = tuple(cuts)
        if not cuts or cuts[0] != 0:
            raise IndexOutOfRange("cut sequence must start at 0")
        for a, b in zip(cuts, cuts[1:]):
            if b <= a:
                raise IndexOutOfRange(f"cuts must strictly increase: {a} !< {b}")
        object.__setattr__(self, "cuts", cuts)

    def __setattr__(self, name, value):
        raise AttributeError("Blocking is immutable")

    @property
    def length(self) -> int:
        return len(self.cuts) - 1

    @property
    def top(self) -> int:
        return self.cuts[-1]

    def block(self, i: int) -> range:
        if not 1 <= i <= self.length:
            raise IndexOutOfRange(f"block index {i} outside 1..{self.length}")
        return range(self.cuts[i - 1] + 1, self.cuts[i] + 1)

    def block_of(self, index: int) -> int:
        """Block number containing coordinate `index`."""
        if not 1 <= index <= self.top:
            raise IndexOutOfRange(f"coordinate {index} outside 1..{self.top}")
        for i in range(1, self.length + 1):
            if index <= self.cuts[i]:
                return i
        raise AssertionError("unreachable")

    def __eq__(self, other) -> bool:
        return isinstance(other, Blocking) and self.cuts == other.cuts

    def __hash__(self) -> int:
        return hash(self.cuts)

    def __repr__(self) -> str:
        return f"Blocking{self.cuts}"


def project(blocking: Blocking, block_indices: Iterable[int], x: FinVec) -> FinVec:
    """Restriction of x onto the union of the named blocks."""
    keep: set[int] = set()
    for i in block_indices:
        keep.update(blocking.block(i))
    return restrict(x, keep)


class BlockVector:
    """A vector stored blockwise: part i is supported inside block i."""

    __slots__ = ("blocking", "parts")

    def __init__(self, blocking: Blocking, parts: Iterable[FinVec]):
        parts = tuple(parts)
        if len(parts) != blocking.length:
            raise LengthMismatch(
                f"{len(parts)} parts for {blocking.length} blocks")
        for i, p in enumerate(parts, start=1):
            blk = blocking.block(i)
            for j in p.support():
                if j not in blk:
                    raise SupportOverflow(
                        f"part {i} has support at {j}, outside block {i}")
        object.__setattr__(self, "blocking", blocking)
        object.__setattr__(self, "parts", parts)

    def __setattr__(self, name, value):
        raise AttributeError("BlockVector is immutable")

    def part(self, i: int) -> FinVec:
        if not 1 <= i <= len(self.parts):
            raise IndexOutOfRange(f"block index {i} outside 1..{len(self.parts)}")
        return self.parts[i - 1]

    def sum(self) -> FinVec:
        total = FinVec()
        for p in self.parts:
            total = total + p
        return total

    def __eq__(self, other) -> bool:
        return (isinstance(other, BlockVector)
                and self.blocking == other.blocking
                and self.parts == other.parts)

    def __repr__(self) -> str:
        return f"BlockVector({self.blocking!r}, {len(self.parts)} parts)"


def block_decompose(x: FinVec, blocking: Blocking) -> BlockVector:
    """Split x into its blocking parts; support must fit under the last cut."""
    if x.max_index() > blocking.top:
        raise SupportOverflow(
            f"support reaches {x.max_index()}, cuts end at {blocking.top}")
    parts = [restrict(x, blocking.block(i)) for i in range(1, blocking.length + 1)]
    return BlockVector(blocking, parts)


class CombCoefficients:
    """Per-block scaling coefficients, each in [0, 1]."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable[Rat]):
        vals = tuple(as_rat(v) for v in values)
        for v in vals:
            if not 0 <= v <= 1:
                raise LengthMismatch(f"coefficient {v} outside [0, 1]")
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("CombCoefficients is immutable")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> Fraction:
        return self.values[i]

    def __repr__(self) -> str:
        return f"CombCoefficients{self.values}"


def comb_scale(bv: BlockVector, coeffs: CombCoefficients) -> FinVec:
    """Sum of c_i * (part i); coefficient count must equal block count."""
    if len(coeffs) != len(bv.parts):
        raise LengthMismatch(
            f"{len(coeffs)} coefficients for {len(bv.parts)} blocks")
    total = FinVec()
    for c, p in zip(coeffs.values, bv.parts):
        total = total + p.scale(c)
    return total
