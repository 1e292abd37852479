"""Prime number lattices of Schnorr and Adleman.

Both lattices live in dimension d+1.  Schnorr's basis has d columns
``(ln p_i)^(1/p) e_i + C ln p_i e_{d+1}`` and is paired with the target
``t = C ln N e_{d+1}``; Adleman's basis appends ``t`` itself as a column.
A coefficient vector z is read as a pair of coprime p_d-smooth integers
``u = prod p_i^{z_i}`` (z_i > 0) and ``k = prod p_i^{-z_i}`` (z_i < 0).

The capture tests below compare ``|u - k N^gamma|`` against ``p_d^sigma``
in exact integer arithmetic.  Real-valued premises are evaluated with a
guard band and re-evaluated at doubled precision when they land in it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Literal, Sequence, Union

import mpmath

from .lattice import BasisMatrix, GsoResult, XySpec, gso_closed_form, k_sequence
from .numerics import FactorBase, default_prec, ln_hp, primes_first, workprec

Mode = Literal["schnorr", "adleman"]
CValue = Union[str, int, float, Fraction]


class NoCandidateError(ValueError):
    """The coefficient vector does not encode a candidate relation."""


@dataclass(frozen=True)
class PnlConfig:
    """Search parameters for a prime number lattice.

    ``c`` is either a number or one of the symbolic values ``"sqrtN"`` and
    ``"e"``, so it can be re-evaluated exactly at any working precision.
    """

    n: int
    d: int
    p: Union[int, float, Fraction] = 1
    c: CValue = "sqrtN"
    sigma: Union[int, Fraction, float] = 2
    prec: int = 0
    gamma_max: int = 4

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("N must be >= 2")
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.p < 1:
            raise ValueError("norm index p must be >= 1")
        if self.sigma < 1:
            raise ValueError("sigma must be >= 1")
        if not self.prec:
            object.__setattr__(self, "prec", default_prec(self.n))
        if self.c_value() <= 0:
            raise ValueError("C must be positive")

    @cached_property
    def fb(self) -> FactorBase:
        return primes_first(self.d)

    @property
    def pd(self) -> int:
        return self.fb.largest

    def with_prec(self, prec: int) -> "PnlConfig":
        return PnlConfig(self.n, self.d, self.p, self.c, self.sigma, prec, self.gamma_max)

    def c_value(self, prec: int | None = None) -> mpmath.mpf:
        prec = prec or self.prec
        with workprec(prec):
            if self.c == "sqrtN":
                return mpmath.sqrt(self.n)
            if self.c == "e":
                return +mpmath.e
            return _mpf(self.c)

    def require_c_gt_one(self) -> None:
        if self.c_value() <= 1:
            raise ValueError("the capture bounds require C > 1")

    def logs(self, prec: int | None = None) -> list[mpmath.mpf]:
        """``[ln p_1, ..., ln p_d]`` at the requested precision."""
        prec = prec or self.prec
        if prec == self.prec:
            return self._logs
        return [ln_hp(q, prec) for q in self.fb.primes[1:]]

    @cached_property
    def _logs(self) -> list[mpmath.mpf]:
        return [ln_hp(q, self.prec) for q in self.fb.primes[1:]]

    def ln_n(self, prec: int | None = None) -> mpmath.mpf:
        return ln_hp(self.n, prec or self.prec)


@dataclass(frozen=True)
class Candidate:
    z: tuple[int, ...]
    u: int
    k: int
    gamma: int
    mode: Mode = "schnorr"


@dataclass(frozen=True)
class CaptureReport:
    premise_holds: bool
    conclusion_holds: bool
    residue: int
    image: mpmath.mpf = field(repr=False)
    threshold: mpmath.mpf = field(repr=False)


def _mpf(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _diag_entries(cfg: PnlConfig, prec: int) -> list[mpmath.mpf]:
    """``(ln p_i)^(1/p)``."""
    with workprec(prec):
        if cfg.p == 1:
            return [+lg for lg in cfg.logs(prec)]
        inv = 1 / _mpf(cfg.p)
        return [lg**inv for lg in cfg.logs(prec)]


def build_schnorr_basis(cfg: PnlConfig) -> BasisMatrix:
    prec = cfg.prec
    d = cfg.d
    diag = _diag_entries(cfg, prec)
    c = cfg.c_value()
    cols = []
    with workprec(prec):
        for i, lg in enumerate(cfg.logs()):
            col = [mpmath.mpf(0)] * (d + 1)
            col[i] = diag[i]
            col[d] = c * lg
            cols.append(col)
    return BasisMatrix.from_columns(cols, prec)


def build_target(cfg: PnlConfig) -> list[mpmath.mpf]:
    with workprec(cfg.prec):
        return [mpmath.mpf(0)] * cfg.d + [cfg.c_value() * cfg.ln_n()]


def build_adleman_basis(cfg: PnlConfig) -> BasisMatrix:
    s = build_schnorr_basis(cfg)
    return BasisMatrix(s.columns + (tuple(build_target(cfg)),), cfg.prec)


def decode_candidate(z: Sequence[int], cfg: PnlConfig, mode: Mode = "schnorr") -> Candidate:
    d = cfg.d
    z = tuple(int(v) for v in z)
    if mode == "adleman":
        if len(z) != d + 1:
            raise ValueError(f"Adleman coefficient vectors have length {d + 1}")
        if z[d] == 0:
            raise NoCandidateError("last coordinate is zero")
        if z[d] > 0:
            z = tuple(-v for v in z)
        gamma = -z[d]
    elif mode == "schnorr":
        if len(z) != d:
            raise ValueError(f"Schnorr coefficient vectors have length {d}")
        gamma = 1
    else:
        raise ValueError(f"unknown mode {mode!r}")
    u = k = 1
    for q, e in zip(cfg.fb.primes[1:], z[:d]):
        if e > 0:
            u *= q**e
        elif e < 0:
            k *= q ** (-e)
    return Candidate(z, u, k, gamma, mode)


def one_norm_image(z: Sequence[int], cfg: PnlConfig, mode: Mode = "schnorr",
                   prec: int | None = None) -> mpmath.mpf:
    """``||A_1 z||_1`` (adleman) or ``||S_1 z - t||_1`` (schnorr)."""
    prec = prec or cfg.prec
    d = cfg.d
    logs = cfg.logs(prec)
    with workprec(prec):
        c = cfg.c_value(prec)
        lnn = cfg.ln_n(prec)
        diag = mpmath.fsum(abs(zi) * lg for zi, lg in zip(z[:d], logs) if zi)
        last = mpmath.fsum(zi * lg for zi, lg in zip(z[:d], logs) if zi)
        if mode == "adleman":
            last += z[d] * lnn
        else:
            last -= lnn
        return diag + c * abs(last)


def capture_threshold(cfg: PnlConfig, gamma: int = 1, prec: int | None = None) -> mpmath.mpf:
    """``2 ln C + 2 sigma ln p_d - gamma ln N``; may be negative.

    Defined for any C > 0; the capture guarantee itself needs C > 1.
    """
    return _threshold(cfg, gamma, prec or cfg.prec)


@lru_cache(maxsize=1024)
def _threshold(cfg: PnlConfig, gamma: int, prec: int) -> mpmath.mpf:
    with workprec(prec):
        return (2 * mpmath.log(cfg.c_value(prec)) + 2 * _mpf(cfg.sigma) * ln_hp(cfg.pd, prec)
                - gamma * cfg.ln_n(prec))


def svp_bound(epsilon, gamma: int, cfg: PnlConfig) -> mpmath.mpf:
    """Upper bound ``N^(gamma/2) / C * exp(epsilon/2)`` on ``|u - k N^gamma|``."""
    cfg.require_c_gt_one()
    with workprec(cfg.prec):
        return mpmath.sqrt(mpmath.mpf(cfg.n)) ** gamma / cfg.c_value() * mpmath.exp(
            mpmath.mpf(epsilon) / 2)


def cvp_bound(epsilon, cfg: PnlConfig) -> mpmath.mpf:
    return svp_bound(epsilon, 1, cfg)


def within_smooth_bound(v: int, pd: int, sigma) -> bool:
    """Exact test of ``|v| <= pd ** sigma`` for rational sigma."""
    s = Fraction(sigma).limit_denominator(10**6) if isinstance(sigma, float) else Fraction(sigma)
    return abs(v) ** s.denominator <= pd**s.numerator


def premise_holds(z: Sequence[int], cfg: PnlConfig, mode: Mode, gamma: int) -> tuple[bool, mpmath.mpf, mpmath.mpf]:
    """Decide ``image <= threshold``; ties inside the guard band get twice the precision."""
    prec = cfg.prec
    for attempt in range(3):
        img = one_norm_image(z, cfg, mode, prec)
        thr = capture_threshold(cfg, gamma, prec)
        with workprec(prec):
            band = mpmath.mpf(2) ** (-(prec // 4)) * max(1, abs(thr), img)
            diff = thr - img
        if abs(diff) > band or attempt == 2:
            return diff >= 0, img, thr
        prec *= 2
    raise AssertionError("unreachable")


def check_capture(cand: Candidate, cfg: PnlConfig, mode: Mode | None = None) -> CaptureReport:
    """Check the capture theorem for one candidate: premise (real) and conclusion (exact)."""
    mode = mode or cand.mode
    cfg.require_c_gt_one()
    ok, img, thr = premise_holds(cand.z, cfg, mode, cand.gamma)
    v = cand.u - cand.k * cfg.n**cand.gamma
    return CaptureReport(ok, within_smooth_bound(v, cfg.pd, cfg.sigma), v, img, thr)


def vol_adleman_closed(cfg: PnlConfig) -> mpmath.mpf:
    diag = _diag_entries(cfg, cfg.prec)
    with workprec(cfg.prec):
        return cfg.c_value() * cfg.ln_n() * mpmath.fprod(diag)


def d_sequence(cfg: PnlConfig) -> list[mpmath.mpf]:
    """``D_0 = 1, D_j = 1 + C^2 sum_{i<=j} (ln p_i)^(2 - 2/p)``."""
    return k_sequence(_xy_data(cfg), cfg.prec)


def vol_schnorr_closed(cfg: PnlConfig) -> mpmath.mpf:
    diag = _diag_entries(cfg, cfg.prec)
    with workprec(cfg.prec):
        c = cfg.c_value()
        expo = 2 - 2 / _mpf(cfg.p)
        s = mpmath.fsum(lg**expo for lg in cfg.logs())
        return mpmath.sqrt(1 + c * c * s) * mpmath.fprod(diag)


def _xy_data(cfg: PnlConfig) -> XySpec:
    diag = _diag_entries(cfg, cfg.prec)
    with workprec(cfg.prec):
        c = cfg.c_value()
        y = tuple(c * lg for lg in cfg.logs()) + (c * cfg.ln_n(),)
    return XySpec(tuple(diag), y)


@dataclass(frozen=True)
class PrimeLatticeGso:
    gso: GsoResult
    d_seq: list[mpmath.mpf]
    effective_target: list[mpmath.mpf]

    @property
    def target_star_norm_sq(self) -> mpmath.mpf:
        return self.gso.star_norms_sq[-1]


def gso_prime_basis(cfg: PnlConfig) -> PrimeLatticeGso:
    """Closed-form GSO of ``{b_1, ..., b_d, t}`` plus the projection of t onto span(b)."""
    xy = _xy_data(cfg)
    gso = gso_closed_form(xy, cfg.prec)
    t = build_target(cfg)
    with workprec(cfg.prec):
        eff = [ti - si for ti, si in zip(t, gso.star_vectors[-1])]
    return PrimeLatticeGso(gso, k_sequence(xy, cfg.prec), eff)

