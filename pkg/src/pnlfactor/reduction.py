"""LLL reduction, Babai rounding and lattice point enumeration.

Real bases are reduced through an integral approximation: every entry is
scaled by ``2**scale_bits`` and rounded, and the integral LLL algorithm
(Cohen, Alg. 2.6.7) runs on the result in exact integer arithmetic.  The
unimodular transform is then applied to the real basis.  Enumeration works
on a double-precision GSO of the reduced basis with a slightly inflated
radius; every point it reports is re-checked at full precision.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, NamedTuple, Sequence

import mpmath

from .lattice import BasisMatrix, GsoResult, SingularBasisError, gso_iterative
from .numerics import workprec

BOX_LIMIT = 10**8


class BoxTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    radius: float
    norm: int = 2
    max_nodes: int = 10**7
    max_results: int = 10**6

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("search radius must be positive")
        if self.norm not in (1, 2):
            raise ValueError("norm must be 1 or 2")


class Hit(NamedTuple):
    z: tuple[int, ...]
    one_norm: mpmath.mpf
    two_norm: mpmath.mpf


@dataclass(frozen=True)
class ReducedBasis:
    basis: BasisMatrix
    transform: tuple[tuple[int, ...], ...]  # transform[k]: original coefficients of reduced column k
    delta: float
    original: BasisMatrix
    int_original: tuple[tuple[int, ...], ...] = field(repr=False)
    int_reduced: tuple[tuple[int, ...], ...] = field(repr=False)
    scale_bits: int = 0
    seed: int | None = None

    @cached_property
    def gso(self) -> GsoResult:
        return gso_iterative(self.basis)

    @cached_property
    def _float_gso(self):
        g = self.gso
        mu = [[float(m) for m in row] for row in g.mu]
        bnorm = [float(b) for b in g.star_norms_sq]
        return mu, bnorm

    def to_original(self, w: Sequence[int]) -> tuple[int, ...]:
        z = [0] * self.original.cols
        for wk, col in zip(w, self.transform):
            if wk:
                for i, t in enumerate(col):
                    if t:
                        z[i] += wk * t
        return tuple(z)

    def gso_coordinates(self, target: Sequence) -> tuple[list[mpmath.mpf], mpmath.mpf]:
        """Coordinates of ``target`` along each b*_j and its squared distance to span(B)."""
        g = self.gso
        with workprec(self.basis.prec):
            coords = [mpmath.fdot(target, s) / n for s, n in zip(g.star_vectors, g.star_norms_sq)]
            perp = [mpmath.mpf(t) for t in target]
            for c, s in zip(coords, g.star_vectors):
                perp = [a - c * b for a, b in zip(perp, s)]
            return coords, mpmath.fdot(perp, perp)


def _integral_lll(cols: list[list[int]], delta: Fraction) -> list[list[int]]:
    """Integral LLL on integer columns; returns the transform columns (mutates cols)."""
    n = len(cols)
    dn, dd = delta.numerator, delta.denominator
    h = [[int(i == j) for i in range(n)] for j in range(n)]
    # d[i+1]: Gram determinant of the first i+1 columns; lam[i][j]: scaled mu
    d = [1] * (n + 1)
    lam = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            u = sum(a * b for a, b in zip(cols[i], cols[j]))
            for m in range(j):
                u = (d[m + 1] * u - lam[i][m] * lam[j][m]) // d[m]
            if j < i:
                lam[i][j] = u
            else:
                if u <= 0:
                    raise SingularBasisError("integral basis is rank deficient")
                d[i + 1] = u

    def red(k: int, l: int) -> None:
        dl = d[l + 1]
        if 2 * abs(lam[k][l]) <= dl:
            return
        q = (2 * lam[k][l] + dl) // (2 * dl)
        cols[k] = [a - q * b for a, b in zip(cols[k], cols[l])]
        h[k] = [a - q * b for a, b in zip(h[k], h[l])]
        lam[k][l] -= q * dl
        for i in range(l):
            lam[k][i] -= q * lam[l][i]

    def swap(k: int) -> None:
        cols[k], cols[k - 1] = cols[k - 1], cols[k]
        h[k], h[k - 1] = h[k - 1], h[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        b = (d[k - 1] * d[k + 1] + lk * lk) // d[k]
        for i in range(k + 1, n):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lk * t) // d[k]
            lam[i][k - 1] = (b * t + lk * lam[i][k]) // d[k + 1]
        d[k] = b

    k = 1
    while k < n:
        red(k, k - 1)
        lk = lam[k][k - 1]
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lk * lk:
            swap(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return h


def lll_reduce(basis: BasisMatrix, delta: float = 0.99, scale_bits: int | None = None,
               seed: int | None = None) -> ReducedBasis:
    """LLL-reduce a real basis via its ``2**scale_bits`` integral approximation.

    With a ``seed`` the columns are shuffled before reduction, which gives a
    different (equally valid) reduced basis of the same lattice.
    """
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    scale_bits = basis.prec if scale_bits is None else scale_bits
    n = basis.cols
    with workprec(basis.prec + scale_bits + 16):
        scale = mpmath.mpf(2) ** scale_bits
        int_orig = [[int(mpmath.nint(v * scale)) for v in col] for col in basis.columns]
    order = list(range(n))
    if seed is not None:
        random.Random(seed).shuffle(order)
    work = [list(int_orig[i]) for i in order]
    h = _integral_lll(work, Fraction(delta).limit_denominator(10**6))
    transform = []
    for hk in h:
        t = [0] * n
        for pos, coef in enumerate(hk):
            t[order[pos]] += coef
        transform.append(tuple(t))
    with workprec(basis.prec):
        red_cols = []
        for t in transform:
            v = [mpmath.mpf(0)] * basis.rows
            for coef, col in zip(t, basis.columns):
                if coef:
                    v = [a + coef * b for a, b in zip(v, col)]
            red_cols.append(tuple(v))
    return ReducedBasis(BasisMatrix(tuple(red_cols), basis.prec), tuple(transform), delta, basis,
                        tuple(map(tuple, int_orig)), tuple(map(tuple, work)), scale_bits, seed)


def _round_half_even(x: mpmath.mpf) -> int:
    f = int(mpmath.floor(x))
    r = x - f
    if r > 0.5 or (r == 0.5 and f % 2):
        return f + 1
    return f


def babai_nearest_plane(rb: ReducedBasis, target: Sequence) -> tuple[tuple[int, ...], mpmath.mpf]:
    """Nearest-plane rounding; returns original-basis coefficients and ``||Bz - t||_2``."""
    g = rb.gso
    n = rb.basis.cols
    coords, _ = rb.gso_coordinates(target)
    w = [0] * n
    with workprec(rb.basis.prec):
        for j in range(n - 1, -1, -1):
            c = coords[j] - mpmath.fsum(w[k] * g.mu[k][j] for k in range(j + 1, n) if w[k])
            w[j] = _round_half_even(c)
    z = rb.to_original(w)
    return z, distance(rb.original, z, target)[1]


def distance(basis: BasisMatrix, z: Sequence[int], target: Sequence | None) -> tuple[mpmath.mpf, mpmath.mpf]:
    """``(||Bz - t||_1, ||Bz - t||_2)`` at the basis precision."""
    v = basis.apply(z)
    with workprec(basis.prec):
        if target is not None:
            v = [a - mpmath.mpf(b) for a, b in zip(v, target)]
        return mpmath.fsum(abs(a) for a in v), mpmath.sqrt(mpmath.fdot(v, v))


class Enumeration:
    """Lazy stream of lattice points near a target.

    Iterate to get :class:`Hit` tuples; afterwards ``truncated`` tells whether
    a node or result limit cut the search short.
    """

    def __init__(self, rb: ReducedBasis, target: Sequence | None, budget: SearchBudget,
                 short: bool = False, nonzero_last: bool = False):
        self.rb = rb
        self.target = target
        self.budget = budget
        self.short = short
        self.nonzero_last = nonzero_last
        self.truncated = False
        self.nodes = 0
        self.emitted = 0

    def __iter__(self) -> Iterator[Hit]:
        rb, budget = self.rb, self.budget
        n = rb.basis.cols
        mu, bnorm = rb._float_gso
        if self.target is None:
            tc = [0.0] * n
            perp = 0.0
        else:
            coords, perp_hp = rb.gso_coordinates(self.target)
            tc = [float(c) for c in coords]
            perp = float(perp_hp)
        r = float(budget.radius)
        # ||.||_2 <= ||.||_1, so the 2-norm ball of the same radius contains the 1-norm ball
        r2 = r * r * (1 + 1e-9) + 1e-12 - perp * (1 - 1e-9)
        if r2 < 0:
            return
        x = [0] * n
        c = [0.0] * n
        dx = [0] * n
        ddx = [0] * n
        part = [0.0] * (n + 1)
        j = n - 1
        c[j] = tc[j]
        x[j] = round(c[j])
        dx[j] = ddx[j] = -1 if c[j] < x[j] else 1
        max_nodes = budget.max_nodes
        while True:
            self.nodes += 1
            if self.nodes > max_nodes:
                self.truncated = True
                return
            diff = x[j] - c[j]
            l = part[j + 1] + diff * diff * bnorm[j]
            if l <= r2:
                if j == 0:
                    hit = self._accept(x)
                    if hit is not None:
                        yield hit
                        self.emitted += 1
                        if self.emitted >= budget.max_results:
                            self.truncated = True
                            return
                else:
                    part[j] = l
                    j -= 1
                    s = tc[j]
                    for k in range(j + 1, n):
                        if x[k]:
                            s -= x[k] * mu[k][j]
                    c[j] = s
                    x[j] = round(s)
                    dx[j] = ddx[j] = -1 if s < x[j] else 1
                    continue
            else:
                j += 1
                if j == n:
                    return
            x[j] += dx[j]
            ddx[j] = -ddx[j]
            dx[j] = ddx[j] - dx[j]

    def _accept(self, w: list[int]) -> Hit | None:
        if self.short and not any(w):
            return None
        z = self.rb.to_original(w)
        if self.short:
            last_nz = next(v for v in reversed(z) if v)
            if last_nz > 0:
                return None
            if self.nonzero_last and z[-1] == 0:
                return None
        n1, n2 = distance(self.rb.original, z, self.target)
        value = n1 if self.budget.norm == 1 else n2
        if value > self.budget.radius:
            return None
        return Hit(z, n1, n2)


def enumerate_close(rb: ReducedBasis, target: Sequence, budget: SearchBudget) -> Enumeration:
    """All z with ``||Bz - t|| <= budget.radius`` in the budget's norm."""
    return Enumeration(rb, target, budget)


def enumerate_short(rb: ReducedBasis, budget: SearchBudget, nonzero_last: bool = False) -> Enumeration:
    """Nonzero short vectors, one of each ``+-z`` pair (the one whose last nonzero entry is negative).

    ``nonzero_last`` additionally drops vectors with a zero last coordinate,
    which is what Adleman-mode searches want.
    """
    return Enumeration(rb, None, budget, short=True, nonzero_last=nonzero_last)


def brute_force_box(basis: BasisMatrix, target: Sequence | None, bound: int,
                    with_norms: bool = True) -> list[tuple[tuple[int, ...], mpmath.mpf | None, mpmath.mpf | None]]:
    """Every z in ``[-bound, bound]^cols`` with its 1- and 2-norm distance to the target."""
    n = basis.cols
    if (2 * bound + 1) ** n > BOX_LIMIT:
        raise BoxTooLargeError(f"box of {(2 * bound + 1) ** n} points exceeds {BOX_LIMIT}")
    out = []
    for z in itertools.product(range(-bound, bound + 1), repeat=n):
        if with_norms:
            n1, n2 = distance(basis, z, target)
            out.append((z, n1, n2))
        else:
            out.append((z, None, None))
    return out


def gaussian_heuristic_count(rb: ReducedBasis, radius: float) -> float:
    """Expected number of lattice points in a ball of the given radius."""
    n = rb.basis.cols
    log_vol = 0.5 * sum(math.log(b) for b in rb._float_gso[1])
    log_ball = n / 2 * math.log(math.pi) - math.lgamma(n / 2 + 1) + n * math.log(radius)
    return math.exp(log_ball - log_vol)
