"""Finite groupoids as Cayley tables, and their structural properties.

Elements are ``0..n-1`` and ``table[a][b]`` is the product ``a*b`` (the row
is the left factor).  A *magma* in the strict sense has a two-sided neutral
element, but the class below stores any groupoid so that one-sided
structure can be examined too.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np


class TableFormatError(ValueError):
    """Raised when Cayley table text cannot be parsed."""


@dataclass(frozen=True)
class Magma:
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        table = tuple(tuple(int(v) for v in row) for row in self.table)
        n = len(table)
        if n == 0:
            raise ValueError("a magma needs at least one element")
        for r, row in enumerate(table):
            if len(row) != n:
                raise ValueError(f"row {r} has {len(row)} entries, expected {n}")
            for v in row:
                if not 0 <= v < n:
                    raise ValueError(f"entry {v} in row {r} out of range 0..{n - 1}")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_flat(cls, cells: Sequence[int], order: int) -> "Magma":
        return cls(tuple(tuple(cells[r * order:(r + 1) * order]) for r in range(order)))

    @property
    def order(self) -> int:
        return len(self.table)

    def __call__(self, a: int, b: int) -> int:
        return self.table[a][b]

    def flat(self) -> tuple[int, ...]:
        return tuple(v for row in self.table for v in row)

    def __str__(self):
        return format_table(self)

    # two-sided structure used when interpreting 1 and ^-1 in terms
    @cached_property
    def neutral(self) -> Optional[int]:
        return two_sided_neutral(self)

    @cached_property
    def inverse_map(self) -> Optional[dict[int, int]]:
        e = self.neutral
        if e is None:
            return None
        return _inverse_choice(self, e, Sided.TWO)


# ---------------------------------------------------------------- text format


def parse_table(text: str) -> Magma:
    """Parse the order line followed by ``n`` rows; blank and ``#`` lines are skipped."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append((lineno, line))
    if not lines:
        raise TableFormatError("empty table text")
    lineno, head = lines[0]
    try:
        n = int(head)
    except ValueError:
        raise TableFormatError(f"line {lineno}: order {head!r} is not an integer") from None
    if n <= 0:
        raise TableFormatError(f"line {lineno}: order must be positive, got {n}")
    body = lines[1:]
    if len(body) != n:
        raise TableFormatError(f"expected {n} rows, found {len(body)}")
    rows = []
    for lineno, line in body:
        tokens = line.split()
        if len(tokens) != n:
            raise TableFormatError(f"line {lineno}: expected {n} entries, found {len(tokens)}")
        row = []
        for tok in tokens:
            try:
                v = int(tok)
            except ValueError:
                raise TableFormatError(f"line {lineno}: entry {tok!r} is not an integer") from None
            if not 0 <= v < n:
                raise TableFormatError(f"line {lineno}: entry {v} out of range 0..{n - 1}")
            row.append(v)
        rows.append(row)
    return Magma(tuple(map(tuple, rows)))


def format_table(magma: Magma) -> str:
    lines = [str(magma.order)]
    lines.extend(" ".join(map(str, row)) for row in magma.table)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- structure


class Sided(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    TWO = "two-sided"
    NONE = "none"

    def flipped(self) -> "Sided":
        return {Sided.LEFT: Sided.RIGHT, Sided.RIGHT: Sided.LEFT}.get(self, self)


@dataclass(frozen=True)
class StructureSpec:
    """Required neutral element and inverses, the latter relative to that neutral.

    A left inverse of ``x`` is ``x'`` with ``x'*x = e``; a right inverse has
    ``x*x' = e``.
    """

    neutral: Sided = Sided.TWO
    inverses: Sided = Sided.TWO

    def __post_init__(self):
        object.__setattr__(self, "neutral", Sided(self.neutral))
        object.__setattr__(self, "inverses", Sided(self.inverses))
        if self.neutral is Sided.NONE:
            raise ValueError("a neutral element is always required")

    def __str__(self):
        return f"{{{self.neutral.value}, {self.inverses.value}}}"

    def dual(self) -> "StructureSpec":
        return StructureSpec(self.neutral.flipped(), self.inverses.flipped())

    @classmethod
    def all(cls) -> list["StructureSpec"]:
        return [cls(n, i) for n in (Sided.LEFT, Sided.RIGHT, Sided.TWO)
                for i in (Sided.LEFT, Sided.RIGHT, Sided.TWO, Sided.NONE)]


@dataclass(frozen=True)
class StructureWitness:
    neutral: int
    inverses: Optional[tuple[int, ...]]  # None when no inverses were demanded


def left_neutrals(m: Magma) -> frozenset[int]:
    n = m.order
    return frozenset(e for e in range(n) if all(m.table[e][x] == x for x in range(n)))


def right_neutrals(m: Magma) -> frozenset[int]:
    n = m.order
    return frozenset(e for e in range(n) if all(m.table[x][e] == x for x in range(n)))


def two_sided_neutral(m: Magma) -> Optional[int]:
    both = left_neutrals(m) & right_neutrals(m)
    return min(both) if both else None


def neutrals(m: Magma, side: Sided) -> list[int]:
    if side is Sided.LEFT:
        found = left_neutrals(m)
    elif side is Sided.RIGHT:
        found = right_neutrals(m)
    else:
        found = left_neutrals(m) & right_neutrals(m)
    return sorted(found)


def inverse_witnesses(m: Magma, e: int, side: Sided) -> list[frozenset[int]]:
    """Per element ``x``, every ``y`` that is a ``side`` inverse of ``x`` relative to ``e``."""
    t, n = m.table, m.order
    out = []
    for x in range(n):
        if side is Sided.LEFT:
            ys = [y for y in range(n) if t[y][x] == e]
        elif side is Sided.RIGHT:
            ys = [y for y in range(n) if t[x][y] == e]
        else:
            ys = [y for y in range(n) if t[x][y] == e and t[y][x] == e]
        out.append(frozenset(ys))
    return out


def _inverse_choice(m: Magma, e: int, side: Sided) -> Optional[dict[int, int]]:
    sets = inverse_witnesses(m, e, side)
    if not all(sets):
        return None
    return {x: min(s) for x, s in enumerate(sets)}


def satisfies_structure(m: Magma, spec: StructureSpec) -> Optional[StructureWitness]:
    """Smallest neutral of the demanded side admitting inverses of the demanded side."""
    for e in neutrals(m, spec.neutral):
        if spec.inverses is Sided.NONE:
            return StructureWitness(e, None)
        choice = _inverse_choice(m, e, spec.inverses)
        if choice is not None:
            return StructureWitness(e, tuple(choice[x] for x in range(m.order)))
    return None


def left_translations_bijective(m: Magma) -> bool:
    n = m.order
    return all(len(set(row)) == n for row in m.table)


def right_translations_bijective(m: Magma) -> bool:
    n = m.order
    return all(len({m.table[a][b] for a in range(n)}) == n for b in range(n))


def is_latin(m: Magma) -> bool:
    return left_translations_bijective(m) and right_translations_bijective(m)


def is_associative(m: Magma) -> bool:
    t, r = m.table, range(m.order)
    return all(t[t[a][b]][c] == t[a][t[b][c]] for a in r for b in r for c in r)


def is_loop(m: Magma) -> bool:
    return is_latin(m) and m.neutral is not None


def is_group(m: Magma) -> bool:
    return is_loop(m) and is_associative(m)


def lip_map(m: Magma) -> Optional[dict[int, int]]:
    """``x -> x^lambda`` with ``x^lambda * (x*y) = y`` for all ``y`` (smallest choice)."""
    t, n = m.table, m.order
    out = {}
    for x in range(n):
        row = t[x]
        a = next((a for a in range(n) if all(t[a][row[y]] == y for y in range(n))), None)
        if a is None:
            return None
        out[x] = a
    return out


def rip_map(m: Magma) -> Optional[dict[int, int]]:
    """``x -> x^rho`` with ``(y*x) * x^rho = y`` for all ``y`` (smallest choice)."""
    t, n = m.table, m.order
    out = {}
    for x in range(n):
        a = next((a for a in range(n) if all(t[t[y][x]][a] == y for y in range(n))), None)
        if a is None:
            return None
        out[x] = a
    return out


@dataclass(frozen=True)
class PropertyReport:
    left_neutrals: frozenset[int]
    right_neutrals: frozenset[int]
    two_sided_neutral: Optional[int]
    reference_neutral: Optional[int]
    inverse_map_two_sided: Optional[dict[int, int]]
    left_inverse_witnesses: Optional[tuple[frozenset[int], ...]]
    right_inverse_witnesses: Optional[tuple[frozenset[int], ...]]
    lip_map: Optional[dict[int, int]]
    rip_map: Optional[dict[int, int]]
    left_translations_bijective: bool
    right_translations_bijective: bool
    is_latin: bool
    is_loop: bool
    is_associative: bool
    is_group: bool

    @property
    def two_sided_inverse_witnesses(self) -> Optional[tuple[frozenset[int], ...]]:
        if self.left_inverse_witnesses is None:
            return None
        return tuple(a & b for a, b in zip(self.left_inverse_witnesses, self.right_inverse_witnesses))

    def flags(self) -> dict[str, bool]:
        return {
            "left_translations_bijective": self.left_translations_bijective,
            "right_translations_bijective": self.right_translations_bijective,
            "is_latin": self.is_latin,
            "is_loop": self.is_loop,
            "is_associative": self.is_associative,
            "is_group": self.is_group,
            "has_two_sided_neutral": self.two_sided_neutral is not None,
            "has_two_sided_inverses": self.inverse_map_two_sided is not None,
            "has_lip": self.lip_map is not None,
            "has_rip": self.rip_map is not None,
        }

    def lines(self) -> list[str]:
        def fmt(s):
            return "{" + ", ".join(map(str, sorted(s))) + "}"

        def fmt_map(d):
            return "absent" if d is None else " ".join(f"{k}->{v}" for k, v in sorted(d.items()))

        yes = {True: "yes", False: "no"}
        out = [
            f"left neutrals: {fmt(self.left_neutrals)}",
            f"right neutrals: {fmt(self.right_neutrals)}",
            f"two-sided neutral: {'absent' if self.two_sided_neutral is None else self.two_sided_neutral}",
            f"two-sided inverses: {fmt_map(self.inverse_map_two_sided)}",
        ]
        if self.reference_neutral is not None:
            out.append(f"left inverses rel. {self.reference_neutral}: "
                       + " ".join(fmt(s) for s in self.left_inverse_witnesses))
            out.append(f"right inverses rel. {self.reference_neutral}: "
                       + " ".join(fmt(s) for s in self.right_inverse_witnesses))
        out += [
            f"left inverse property: {fmt_map(self.lip_map)}",
            f"right inverse property: {fmt_map(self.rip_map)}",
            f"latin: {yes[self.is_latin]}",
            f"loop: {yes[self.is_loop]}",
            f"associative: {yes[self.is_associative]}",
            f"group: {yes[self.is_group]}",
        ]
        return out


def analyze(m: Magma) -> PropertyReport:
    lefts, rights = left_neutrals(m), right_neutrals(m)
    both = lefts & rights
    e2 = min(both) if both else None
    candidates = both or (lefts | rights)
    ref = min(candidates) if candidates else None
    lw = rw = None
    if ref is not None:
        lw = tuple(inverse_witnesses(m, ref, Sided.LEFT))
        rw = tuple(inverse_witnesses(m, ref, Sided.RIGHT))
    inv = _inverse_choice(m, e2, Sided.TWO) if e2 is not None else None
    lt = left_translations_bijective(m)
    rt = right_translations_bijective(m)
    latin = lt and rt
    loop = latin and e2 is not None
    assoc = is_associative(m)
    return PropertyReport(
        left_neutrals=lefts,
        right_neutrals=rights,
        two_sided_neutral=e2,
        reference_neutral=ref,
        inverse_map_two_sided=inv,
        left_inverse_witnesses=lw,
        right_inverse_witnesses=rw,
        lip_map=lip_map(m),
        rip_map=rip_map(m),
        left_translations_bijective=lt,
        right_translations_bijective=rt,
        is_latin=latin,
        is_loop=loop,
        is_associative=assoc,
        is_group=loop and assoc,
    )


# ---------------------------------------------------------------- relabeling


def opposite(m: Magma) -> Magma:
    """The transposed table, ``a o b = b * a``."""
    return Magma(tuple(zip(*m.table)))


def relabel(m: Magma, perm: Sequence[int]) -> Magma:
    """Image of ``m`` under the bijection ``a -> perm[a]``."""
    n = m.order
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{perm!r} is not a permutation of 0..{n - 1}")
    new = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            new[perm[a]][perm[b]] = perm[m.table[a][b]]
    return Magma(tuple(map(tuple, new)))


CANONICAL_MAX_ORDER = 8


def _permutations(n: int, fix_zero: bool) -> np.ndarray:
    if fix_zero:
        rest = np.array(list(itertools.permutations(range(1, n))), dtype=np.int8).reshape(-1, n - 1)
        return np.hstack([np.zeros((len(rest), 1), dtype=np.int8), rest])
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8).reshape(-1, n)


def canonical_form(m: Magma) -> Magma:
    """Lexicographically least relabeling (row-major), sending a two-sided neutral to 0."""
    n = m.order
    if n > CANONICAL_MAX_ORDER:
        raise ValueError(f"canonical_form supports orders up to {CANONICAL_MAX_ORDER}, got {n}")
    if n == 1:
        return m
    t = np.array(m.table, dtype=np.int8)
    e = m.neutral
    if e is not None and e != 0:
        swap = list(range(n))
        swap[0], swap[e] = e, 0
        t = np.array(relabel(m, swap).table, dtype=np.int8)
    perms = _permutations(n, e is not None)  # perms[k][new] = old
    inverse = np.argsort(perms, axis=1)  # old -> new
    candidates = np.take_along_axis(
        inverse, t[perms[:, :, None], perms[:, None, :]].reshape(len(perms), -1).astype(np.int64), axis=1)
    alive = np.arange(len(perms))
    for col in range(n * n):
        values = candidates[alive, col]
        alive = alive[values == values.min()]
        if len(alive) == 1:
            break
    return Magma.from_flat(candidates[alive[0]].tolist(), n)


def is_isomorphic(a: Magma, b: Magma) -> bool:
    return a.order == b.order and canonical_form(a) == canonical_form(b)


def all_tables(order: int) -> Iterable[Magma]:
    """Every groupoid of the given order (``n**(n*n)`` of them)."""
    for cells in itertools.product(range(order), repeat=order * order):
        yield Magma.from_flat(cells, order)
