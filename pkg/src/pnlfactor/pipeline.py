"""End-to-end factoring: trial division, lattice relation search, GF(2)
dependencies, congruence of squares."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

from . import gf2
from .numerics import FactorBase, is_probable_prime, perfect_power, primes_first
from .prime_lattices import (
    Candidate,
    Mode,
    NoCandidateError,
    PnlConfig,
    build_adleman_basis,
    build_schnorr_basis,
    build_target,
    capture_threshold,
    decode_candidate,
    premise_holds,
)
from .reduction import ReducedBasis, SearchBudget, babai_nearest_plane, enumerate_close, enumerate_short, lll_reduce
from .relations import CollectStats, Relation, RelationStore, collect_relations, write_relations

log = logging.getLogger(__name__)

FAILURE_REASONS = ("prime_input", "perfect_power_handled", "insufficient_relations",
                   "all_dependencies_trivial", "budget_exhausted")


class PrimeInputError(ValueError):
    pass


def trial_divide(n: int, fb: FactorBase) -> int | None:
    """Smallest prime of the factor base dividing ``n`` (and below n), else None."""
    if n < 2:
        raise ValueError("N must be >= 2")
    if is_probable_prime(n):
        raise PrimeInputError(f"{n} is prime")
    for q in fb.primes[1:]:
        if n % q == 0:
            return q
    return None


def assemble_xy(relations: Sequence[Relation], c: int, n: int, fb: FactorBase) -> tuple[int, int]:
    """Build ``x, y`` with ``x^2 = y^2 (mod N)`` from the relations selected by bitmask ``c``.

    x is the square root of ``prod u_i v_i`` and y is ``prod u_i``; both are
    reduced mod N.
    """
    size = len(fb)
    total = [0] * size
    upow = [0] * size
    for i, rel in enumerate(relations):
        if c >> i & 1:
            for j in range(size):
                total[j] += rel.a[j] + rel.b[j]
                upow[j] += rel.a[j]
    if any(e % 2 for e in total):
        raise ValueError("selection is not a dependency: odd exponent sum")
    x = -1 if (total[0] // 2) % 2 else 1
    y = 1
    for j in range(1, size):
        q = fb.primes[j]
        x = x * pow(q, total[j] // 2, n) % n
        y = y * pow(q, upow[j], n) % n
    x %= n
    if (x * x - y * y) % n:
        raise AssertionError("assembled x, y are not a congruence of squares")
    return x, y


@dataclass(frozen=True)
class FactorOptions:
    dim: int = 25
    norm: int = 1
    c: object = "sqrtN"
    sigma: object = 2
    mode: Mode = "schnorr"
    seed: int | None = None
    delta: float = 0.99
    margin: int = 8
    max_rounds: int = 6
    max_nodes: int = 5_000_000
    radius_growth: float = 1.08
    gamma_max: int = 4
    relations_file: str | None = None


@dataclass
class FactorReport:
    n: int
    factor: int | None = None
    reason: str | None = None
    method: str | None = None
    relations_used: int = 0
    dependencies_tried: int = 0
    dependency: list[int] = field(default_factory=list)
    x: int | None = None
    y: int | None = None
    seed: int | None = None
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.factor is not None

    def to_dict(self) -> dict:
        return asdict(self)


class LatticeSearcher:
    """Candidate stream from balls of growing radius around the target.

    The radius starts at the Babai distance (close-vector mode) or at the
    shortest reduced basis vector (short-vector mode) and grows geometrically
    up to ``max_radius``.  Each ball is enumerated completely unless the node
    budget runs out; points already seen in a smaller ball are skipped.
    """

    def __init__(self, cfg: PnlConfig, rb: ReducedBasis, mode: Mode, max_radius: float,
                 growth: float = 1.08, max_nodes: int = 5_000_000):
        self.cfg = cfg
        self.rb = rb
        self.mode = mode
        self.max_radius = max_radius
        self.growth = growth
        self.max_nodes = max_nodes
        self.nodes = 0
        self.radius = 0.0
        self.truncated = False
        self.exhausted = False
        self._seen: set[tuple[int, ...]] = set()

    def _start_radius(self) -> float:
        if self.mode == "schnorr":
            _, dist = babai_nearest_plane(self.rb, build_target(self.cfg))
            return float(dist)
        return min(float(sum(x * x for x in col)) ** 0.5 for col in self.rb.basis.columns)

    def __iter__(self) -> Iterator[Candidate]:
        r = min(self._start_radius() * (1 + 1e-9), self.max_radius)
        target = build_target(self.cfg)
        while True:
            self.radius = r
            budget = SearchBudget(r, norm=2, max_nodes=self.max_nodes - self.nodes)
            if self.mode == "schnorr":
                stream = enumerate_close(self.rb, target, budget)
            else:
                stream = enumerate_short(self.rb, budget, nonzero_last=True)
            for hit in stream:
                if hit.z in self._seen:
                    continue
                self._seen.add(hit.z)
                try:
                    yield decode_candidate(hit.z, self.cfg, self.mode)
                except NoCandidateError:
                    continue
            self.nodes += stream.nodes
            if stream.truncated:
                self.truncated = True
                return
            if r >= self.max_radius:
                self.exhausted = True
                return
            r = min(r * self.growth, self.max_radius)


def _factor_report(n: int, g: int, method: str, **kw) -> FactorReport:
    return _checked(FactorReport(n, factor=g, method=method, **kw))


def factor(n: int, options: FactorOptions | None = None) -> FactorReport:
    """Try to split ``n``; see :class:`FactorOptions` for the search knobs."""
    opts = options or FactorOptions()
    if n < 2:
        raise ValueError("N must be >= 2")
    if is_probable_prime(n):
        return FactorReport(n, reason="prime_input", seed=opts.seed)
    pp = perfect_power(n)
    if pp is not None:
        return _factor_report(n, pp[0], "perfect_power", seed=opts.seed)
    fb = primes_first(opts.dim)
    g = trial_divide(n, fb)
    if g is not None:
        return _factor_report(n, g, "trial_division", seed=opts.seed)

    cfg = PnlConfig(n, opts.dim, opts.norm, opts.c, opts.sigma, gamma_max=opts.gamma_max)
    threshold = float(capture_threshold(cfg, 1))
    if threshold <= 0:
        raise ValueError("capture threshold is not positive: the search ball is empty; "
                         "increase C or sigma")
    basis = build_schnorr_basis(cfg) if opts.mode == "schnorr" else build_adleman_basis(cfg)
    rb = lll_reduce(basis, opts.delta, seed=opts.seed)
    searcher = LatticeSearcher(cfg, rb, opts.mode, threshold, opts.radius_growth, opts.max_nodes)
    candidates = iter(searcher)
    store = RelationStore()
    stats = CollectStats()
    tried = 0

    def premise(cand: Candidate) -> bool:
        return premise_holds(cand.z, cfg, cand.mode, cand.gamma)[0]

    def report(**kw) -> FactorReport:
        s = {"collect": stats.as_dict(), "search_nodes": searcher.nodes,
             "final_radius": searcher.radius, "max_radius": threshold,
             "search_truncated": searcher.truncated, "mode": opts.mode, "dim": opts.dim,
             "norm": opts.norm}
        base = dict(relations_used=len(store), dependencies_tried=tried, seed=opts.seed, stats=s)
        base.update(kw)
        return FactorReport(n, **base)

    for round_no in range(opts.max_rounds):
        quota = opts.dim + 2 + opts.margin * (round_no + 1)
        col = collect_relations(cfg, candidates, quota, store, stats, premise_check=premise)
        if opts.relations_file:
            write_relations(opts.relations_file, store.relations, n, opts.dim)
        if col.early_factor is not None:
            rep = report(method="early_gcd")
            rep.factor = col.early_factor
            return _checked(rep)
        if len(store) < opts.dim + 2:
            reason = "budget_exhausted" if searcher.truncated else "insufficient_relations"
            return report(reason=reason)
        rels = store.relations
        basis2 = gf2.nullspace(gf2.BitMatrix(tuple(r.parity() for r in rels), len(fb)))
        assert len(basis2) >= len(rels) - len(fb) >= 1  # rank bound
        for c in gf2.iterate_dependencies(basis2):
            tried += 1
            x, y = assemble_xy(rels, c, n, fb)
            if x != y and x != (n - y) % n:
                g = math.gcd(x + y, n)
                chosen = [i for i in range(len(rels)) if c >> i & 1]
                return _checked(report(factor=g, method="congruence_of_squares",
                                       dependency=chosen, x=x, y=y))
        log.info("round %d: %d relations, all dependencies trivial", round_no, len(store))
        if col.insufficient:
            reason = "budget_exhausted" if searcher.truncated else "all_dependencies_trivial"
            return report(reason=reason)
    return report(reason="all_dependencies_trivial")


def _checked(rep: FactorReport) -> FactorReport:
    g, n = rep.factor, rep.n
    if not (g is not None and 1 < g < n and n % g == 0):
        raise AssertionError(f"{g} is not a proper factor of {n}")
    return rep
