"""Left nullspace over GF(2) with rows packed into Python ints."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

MAX_COMBINATIONS = 1 << 16


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]  # bit j of rows[i] is entry (i, j)
    ncols: int

    def __post_init__(self):
        limit = 1 << self.ncols
        if any(r < 0 or r >= limit for r in self.rows):
            raise ValueError("row has bits beyond ncols")

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "BitMatrix":
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        packed = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("row length does not match ncols")
            packed.append(sum(1 << j for j, bit in enumerate(r) if bit & 1))
        return cls(tuple(packed), ncols)

    @property
    def nrows(self) -> int:
        return len(self.rows)


def nullspace(m: BitMatrix) -> list[int]:
    """Basis of ``{c : c^T M = 0}``; bit i of each returned int selects row i."""
    work = list(m.rows)
    hist = [1 << i for i in range(m.nrows)]
    used: set[int] = set()
    for col in range(m.ncols):
        bit = 1 << col
        piv = next((i for i in range(m.nrows) if i not in used and work[i] & bit), None)
        if piv is None:
            continue
        used.add(piv)
        for i in range(m.nrows):
            if i != piv and work[i] & bit:
                work[i] ^= work[piv]
                hist[i] ^= hist[piv]
    return [hist[i] for i in range(m.nrows) if work[i] == 0]


def combination_count(basis_size: int) -> int:
    return min((1 << basis_size) - 1, MAX_COMBINATIONS)


def iterate_dependencies(basis: Sequence[int], cap: int = MAX_COMBINATIONS) -> Iterator[int]:
    """Nonzero elements of the span of ``basis``.

    Combinations are produced level by level (single basis vectors, then
    pairwise sums, ...), each level sorted by Hamming weight then value, and
    at most ``cap`` are produced.
    """
    emitted = 0
    for size in range(1, len(basis) + 1):
        level = []
        for combo in itertools.combinations(basis, size):
            c = 0
            for v in combo:
                c ^= v
            level.append(c)
            if len(level) + emitted >= cap:
                break
        level.sort(key=lambda c: (c.bit_count(), c))
        for c in level:
            if emitted >= cap:
                return
            yield c
            emitted += 1
