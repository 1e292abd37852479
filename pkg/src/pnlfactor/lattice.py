"""Gram-Schmidt orthogonalization and lattice volumes.

Bases are stored column-wise: ``basis.columns[k]`` is the k-th basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath

from .numerics import workprec


class SingularBasisError(ValueError):
    """The columns of a basis are (numerically) linearly dependent."""


@dataclass(frozen=True)
class BasisMatrix:
    columns: tuple[tuple[mpmath.mpf, ...], ...]
    prec: int = 128

    @classmethod
    def from_columns(cls, columns, prec: int = 128) -> "BasisMatrix":
        with workprec(prec):
            cols = tuple(tuple(mpmath.mpf(v) for v in col) for col in columns)
        if not cols:
            raise ValueError("basis needs at least one column")
        n = len(cols[0])
        if any(len(c) != n for c in cols):
            raise ValueError("ragged basis")
        if len(cols) > n:
            raise SingularBasisError("more columns than rows")
        return cls(cols, prec)

    @classmethod
    def from_rows(cls, rows, prec: int = 128) -> "BasisMatrix":
        return cls.from_columns(list(zip(*rows)), prec)

    @property
    def rows(self) -> int:
        return len(self.columns[0])

    @property
    def cols(self) -> int:
        return len(self.columns)

    def entry(self, i: int, j: int) -> mpmath.mpf:
        return self.columns[j][i]

    def to_rows(self) -> list[list[mpmath.mpf]]:
        return [list(r) for r in zip(*self.columns)]

    def apply(self, z: Sequence[int]) -> list[mpmath.mpf]:
        """Return the lattice vector ``B z``."""
        if len(z) != self.cols:
            raise ValueError("coefficient vector has wrong length")
        with workprec(self.prec):
            out = [mpmath.mpf(0)] * self.rows
            for zk, col in zip(z, self.columns):
                if zk:
                    out = [o + zk * c for o, c in zip(out, col)]
        return out


@dataclass(frozen=True)
class GsoResult:
    star_vectors: list[list[mpmath.mpf]]
    mu: list[list[mpmath.mpf]]  # mu[k][j] for j < k
    star_norms_sq: list[mpmath.mpf]

    def check_orthogonal(self, prec: int) -> None:
        tol = mpmath.mpf(2) ** (-prec // 4)
        with workprec(prec):
            for i, bi in enumerate(self.star_vectors):
                for j in range(i):
                    dot = mpmath.fdot(bi, self.star_vectors[j])
                    lim = tol * mpmath.sqrt(self.star_norms_sq[i] * self.star_norms_sq[j])
                    if abs(dot) > lim:
                        raise SingularBasisError(f"star vectors {j} and {i} are not orthogonal")

    def reconstruct(self, prec: int) -> list[list[mpmath.mpf]]:
        """Rebuild the input columns as ``b*_k + sum_j mu[k][j] b*_j``."""
        out = []
        with workprec(prec):
            for k, bk in enumerate(self.star_vectors):
                v = list(bk)
                for j in range(k):
                    m = self.mu[k][j]
                    v = [a + m * b for a, b in zip(v, self.star_vectors[j])]
                out.append(v)
        return out


def gso_iterative(basis: BasisMatrix) -> GsoResult:
    """Classical Gram-Schmidt over the basis columns at ``basis.prec`` bits."""
    prec = basis.prec
    thresh = mpmath.mpf(2) ** (-prec // 2)
    stars: list[list[mpmath.mpf]] = []
    norms: list[mpmath.mpf] = []
    mu: list[list[mpmath.mpf]] = []
    with workprec(prec):
        for k, bk in enumerate(basis.columns):
            row = []
            v = list(bk)
            for j in range(k):
                m = mpmath.fdot(bk, stars[j]) / norms[j]
                row.append(m)
                if m:
                    sj = stars[j]
                    v = [a - m * b for a, b in zip(v, sj)]
            nrm = mpmath.fdot(v, v)
            if nrm <= thresh * mpmath.fdot(bk, bk):
                raise SingularBasisError(f"column {k} is dependent on earlier columns")
            stars.append(v)
            norms.append(nrm)
            mu.append(row)
    return GsoResult(stars, mu, norms)


@dataclass(frozen=True)
class XySpec:
    """Square matrix with diagonal ``x_1..x_d`` and bottom row ``y_1..y_{d+1}``."""

    x: tuple[mpmath.mpf, ...]
    y: tuple[mpmath.mpf, ...]

    def __post_init__(self):
        if len(self.y) != len(self.x) + 1:
            raise ValueError("y must have exactly one more entry than x")
        if any(xi == 0 for xi in self.x):
            raise ValueError("diagonal entries must be nonzero")

    @property
    def d(self) -> int:
        return len(self.x)

    def to_basis(self, prec: int) -> BasisMatrix:
        d = self.d
        cols = []
        for k in range(d + 1):
            col = [0] * (d + 1)
            if k < d:
                col[k] = self.x[k]
            col[d] = self.y[k]
            cols.append(col)
        return BasisMatrix.from_columns(cols, prec)


def k_sequence(xy: XySpec, prec: int) -> list[mpmath.mpf]:
    """``K_0 = 1, K_j = 1 + sum_{i<=j} (y_i/x_i)^2`` for j = 0..d."""
    with workprec(prec):
        ks = [mpmath.mpf(1)]
        for xi, yi in zip(xy.x, xy.y):
            ks.append(ks[-1] + (yi / xi) ** 2)
    return ks


def gso_closed_form(xy: XySpec, prec: int) -> GsoResult:
    """GSO of an :class:`XySpec` matrix from its entries alone (no projections)."""
    d = xy.d
    x, y = xy.x, xy.y
    ks = k_sequence(xy, prec)
    stars, norms, mu = [], [], []
    with workprec(prec):
        ratio = [yi / xi for xi, yi in zip(x, y)]
        for k in range(d + 1):
            scale = y[k] / ks[k]
            v = [-scale * ratio[i] for i in range(k)]
            if k < d:
                v.append(+x[k])
                v.extend([mpmath.mpf(0)] * (d - k - 1))
                norms.append(x[k] ** 2 * ks[k + 1] / ks[k])
            else:
                norms.append(y[d] ** 2 / ks[d])
            v.append(scale)
            stars.append(v)
            mu.append([y[k] * y[j] / (x[j] ** 2 * ks[j + 1]) for j in range(k)])
    return GsoResult(stars, mu, norms)


def volume_gram(basis: BasisMatrix) -> mpmath.mpf:
    """``sqrt(|det(B^T B)|)`` for a full-column-rank basis.

    The determinant is taken as the product of the pivots of an LDL^T
    factorization of the Gram matrix; a pivot below ``2**(-prec/2)`` times its
    diagonal entry is treated as rank deficiency.
    """
    prec = basis.prec
    n = basis.cols
    cols = basis.columns
    thresh = mpmath.mpf(2) ** (-prec // 2)
    with workprec(prec + 32):
        gram = [[mpmath.fdot(cols[i], cols[j]) for j in range(i + 1)] for i in range(n)]
        # r[i][j] = <b_i, b*_j>, pivots r[j][j] = |b*_j|^2; l[i][j] = r[i][j] / r[j][j]
        r: list[list[mpmath.mpf]] = []
        l: list[list[mpmath.mpf]] = []
        for i in range(n):
            row, lrow = [], []
            for j in range(i):
                acc = gram[i][j] - mpmath.fdot(row, l[j][:j])
                row.append(acc)
                lrow.append(acc / r[j][j])
            piv = gram[i][i] - mpmath.fdot(row, lrow)
            if piv <= thresh * gram[i][i]:
                raise SingularBasisError(f"column {i} is dependent on earlier columns")
            row.append(piv)
            r.append(row)
            l.append(lrow)
        vol = mpmath.sqrt(mpmath.fprod(r[i][i] for i in range(n)))
    with workprec(prec):
        return +vol


def volume_rank_one(x: Sequence, prec: int = 128) -> mpmath.mpf:
    """Volume of the lattice spanned by ``[I_d ; x^T]`` (identity over one extra row)."""
    with workprec(prec):
        return mpmath.sqrt(1 + mpmath.fsum(mpmath.mpf(v) ** 2 for v in x))


def rank_one_basis(x: Sequence, prec: int = 128) -> BasisMatrix:
    d = len(x)
    cols = []
    for k in range(d):
        col = [0] * (d + 1)
        col[k] = 1
        col[d] = x[k]
        cols.append(col)
    return BasisMatrix.from_columns(cols, prec)
