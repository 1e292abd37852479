"""Smooth relations ``u - k N^gamma = v`` over the extended prime list.

Every relation is stored with exponent vectors ``a`` (for u) and ``b``
(for v) indexed like the factor base, index 0 being the sign prime -1.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .numerics import FactorBase, primes_first
from .prime_lattices import Candidate, PnlConfig


class NotSmooth(Exception):
    """Raised by :func:`factor_over_base` when a cofactor above p_d remains."""

    def __init__(self, n: int, cofactor: int):
        super().__init__(f"{n} leaves cofactor {cofactor}")
        self.cofactor = cofactor


class RelationError(ValueError):
    """A relation violates one of its defining identities."""


@dataclass(frozen=True)
class Relation:
    u: int
    k: int
    v: int
    gamma: int
    a: tuple[int, ...]
    b: tuple[int, ...]

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.u, self.k, self.gamma)

    def parity(self) -> int:
        """Bitmask of ``(a + b) mod 2`` with bit j for factor-base index j."""
        mask = 0
        for j, (x, y) in enumerate(zip(self.a, self.b)):
            if (x + y) & 1:
                mask |= 1 << j
        return mask

    def verify(self, n: int, fb: FactorBase) -> None:
        """Re-check every identity exactly; raise :class:`RelationError` on the first failure."""
        size = len(fb)
        if len(self.a) != size or len(self.b) != size:
            raise RelationError("exponent vectors have the wrong length")
        if self.a[0] != 0:
            raise RelationError("u must be positive (a_0 = 0)")
        if self.b[0] not in (0, 1):
            raise RelationError("sign exponent b_0 must be 0 or 1")
        if any(e < 0 for e in self.a) or any(e < 0 for e in self.b):
            raise RelationError("negative exponent")
        if self.gamma < 1 or self.k < 1 or self.u < 1:
            raise RelationError("u, k and gamma must be positive")
        if _reassemble(self.a, fb) != self.u:
            raise RelationError("u does not match its exponent vector")
        if _reassemble(self.b, fb) != self.v:
            raise RelationError("v does not match its exponent vector")
        if self.u - self.k * n**self.gamma != self.v:
            raise RelationError("u - k N^gamma != v")
        if math.gcd(self.u, self.k) != 1:
            raise RelationError("u and k are not coprime")
        if math.gcd(self.k, n) != 1:
            raise RelationError("k shares a factor with N")

    def to_json(self) -> str:
        return json.dumps({"u": self.u, "k": self.k, "gamma": self.gamma, "v": self.v,
                           "a": list(self.a), "b": list(self.b)})

    @classmethod
    def from_json(cls, line: str) -> "Relation":
        rec = json.loads(line)
        try:
            return cls(int(rec["u"]), int(rec["k"]), int(rec["v"]), int(rec["gamma"]),
                       tuple(int(e) for e in rec["a"]), tuple(int(e) for e in rec["b"]))
        except (KeyError, TypeError) as exc:
            raise RelationError(f"malformed record: {exc}") from None


def _reassemble(exps: Sequence[int], fb: FactorBase) -> int:
    out = -1 if exps[0] % 2 else 1
    for q, e in zip(fb.primes[1:], exps[1:]):
        if e:
            out *= q**e
    return out


def factor_over_base(n: int, fb: FactorBase) -> tuple[int, ...]:
    """Exponent vector of ``n`` over ``(-1, p_1, ..., p_d)``; raises :class:`NotSmooth`."""
    if n == 0:
        raise ValueError("cannot factor zero")
    exps = [1 if n < 0 else 0]
    m = abs(n)
    for q in fb.primes[1:]:
        e = 0
        while m % q == 0:
            m //= q
            e += 1
        exps.append(e)
    if m != 1:
        raise NotSmooth(n, m)
    return tuple(exps)


@dataclass(frozen=True)
class Reject:
    reason: str


@dataclass(frozen=True)
class EarlyFactor:
    factor: int


def candidate_to_relation(cand: Candidate, cfg: PnlConfig) -> Relation | Reject | EarlyFactor:
    n = cfg.n
    if cand.u < 1 or cand.k < 1 or math.gcd(cand.u, cand.k) != 1:
        return Reject("malformed")
    if cand.gamma > cfg.gamma_max:
        return Reject("gamma_cap")
    g = math.gcd(cand.k, n)
    if g != 1:
        return EarlyFactor(g)
    v = cand.u - cand.k * n**cand.gamma
    if v == 0:
        return Reject("degenerate")
    g = math.gcd(v, n)
    if g not in (1, n):
        return EarlyFactor(g)
    try:
        b = factor_over_base(v, cfg.fb)
    except NotSmooth:
        return Reject("not_smooth")
    try:
        a = factor_over_base(cand.u, cfg.fb)
    except NotSmooth:  # lattice candidates are smooth by construction
        return Reject("u_not_smooth")
    return Relation(cand.u, cand.k, v, cand.gamma, a, b)


@dataclass
class CollectStats:
    candidates: int = 0
    duplicates: int = 0
    premise_true: int = 0
    rejects: Counter = field(default_factory=Counter)

    def as_dict(self) -> dict:
        return {"candidates": self.candidates, "duplicates": self.duplicates,
                "premise_true": self.premise_true, "rejects": dict(self.rejects)}


@dataclass
class RelationStore:
    """Append-only relation set keyed by ``(u, k, gamma)``."""

    relations: list[Relation] = field(default_factory=list)
    _keys: set = field(default_factory=set, repr=False)

    def add(self, rel: Relation) -> bool:
        if rel.key in self._keys:
            return False
        self._keys.add(rel.key)
        self.relations.append(rel)
        return True

    def __len__(self) -> int:
        return len(self.relations)


@dataclass
class Collection:
    relations: list[Relation]
    stats: CollectStats
    insufficient: bool
    early_factor: int | None = None


def collect_relations(cfg: PnlConfig, candidates: Iterable[Candidate], quota: int,
                      store: RelationStore | None = None, stats: CollectStats | None = None,
                      premise_check=None) -> Collection:
    """Drain ``candidates`` until ``quota`` distinct relations are stored.

    ``premise_check`` is an optional callable ``cand -> bool`` used for
    statistics only: relations are accepted whenever v is smooth.
    """
    if quota < cfg.d + 2:
        raise ValueError(f"quota must be at least d + 2 = {cfg.d + 2}")
    store = store if store is not None else RelationStore()
    stats = stats if stats is not None else CollectStats()
    if len(store) >= quota:
        return Collection(store.relations, stats, False)
    for cand in candidates:
        stats.candidates += 1
        if premise_check is not None and premise_check(cand):
            stats.premise_true += 1
        out = candidate_to_relation(cand, cfg)
        if isinstance(out, EarlyFactor):
            return Collection(store.relations, stats, len(store) < quota, out.factor)
        if isinstance(out, Reject):
            stats.rejects[out.reason] += 1
            continue
        if not store.add(out):
            stats.duplicates += 1
        elif len(store) >= quota:
            break
    return Collection(store.relations, stats, len(store) < quota)


def write_relations(path, relations: Iterable[Relation], n: int, d: int) -> None:
    with open(path, "w") as fh:
        fh.write(f"# n={n} dim={d}\n")
        for rel in relations:
            fh.write(rel.to_json() + "\n")


@dataclass
class LoadResult:
    n: int
    d: int
    relations: list[Relation]
    rejected: list[tuple[int, str]]


def load_relations(path, n: int | None = None, d: int | None = None, strict: bool = False) -> LoadResult:
    """Read a relations file, re-verifying every line against N and the factor base.

    The ``# n=... dim=...`` header supplies N and d when not given; when both
    are present they must agree.  Bad lines are collected in ``rejected``
    (or raise, with ``strict``).
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    header = {}
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            key, _, val = tok.partition("=")
            header[key] = int(val)
    for name, given in (("n", n), ("dim", d)):
        if given is not None and name in header and header[name] != given:
            raise RelationError(f"header {name}={header[name]} disagrees with {given}")
    n = n if n is not None else header.get("n")
    d = d if d is not None else header.get("dim")
    if n is None or d is None:
        raise RelationError("N and dimension are required (no header found)")
    fb = primes_first(d)
    out, rejected = [], []
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            rel = Relation.from_json(line)
            rel.verify(n, fb)
        except (RelationError, ValueError) as exc:
            if strict:
                raise RelationError(f"line {lineno}: {exc}") from None
            rejected.append((lineno, str(exc)))
            continue
        out.append(rel)
    return LoadResult(n, d, out, rejected)
