"""Acceptance criteria, one test per criterion.

Each test records a single ``[ACCEPT n] PASS|FAIL ...`` line; conftest prints
them in the terminal summary.  ``python3 tests/test_acceptance.py`` runs just
this file.
"""

import json
import math
import random
import sys
import time
from pathlib import Path

import mpmath
import pytest

from pnlfactor import FactorOptions, factor
from pnlfactor.gf2 import BitMatrix, nullspace
from pnlfactor.lattice import gso_iterative, volume_gram
from pnlfactor.numerics import primes_first
from pnlfactor.prime_lattices import (
    Candidate,
    PnlConfig,
    build_adleman_basis,
    build_schnorr_basis,
    build_target,
    capture_threshold,
    cvp_bound,
    decode_candidate,
    gso_prime_basis,
    one_norm_image,
    premise_holds,
    svp_bound,
    vol_adleman_closed,
    vol_schnorr_closed,
    within_smooth_bound,
)
from pnlfactor.reduction import SearchBudget, brute_force_box, enumerate_close, enumerate_short, lll_reduce
from pnlfactor.relations import Relation, candidate_to_relation, load_relations, write_relations

sys.path.insert(0, str(Path(__file__).parent))
from oracles import gf2_left_nullspace_exhaustive, gf2_span  # noqa: E402

RESULTS: list[str] = []
TOL = mpmath.mpf(10) ** -9
GRID_D = (5, 20, 60)
GRID_P = (1, 2, 3)
GRID_C = (1, 10, "sqrtN")
SMALL_N = (143, 323, 10403)
SMALL_C = ("e", 10, "sqrtN")
SIGMAS = (1, 2, 3)


def report(n, ok, detail, seconds, limit=None):
    timing = f"{seconds:.2f}s" + (f" (limit {limit}s)" if limit else "")
    RESULTS.append(f"[ACCEPT {n}] {'PASS' if ok else 'FAIL'} {detail}; {timing}")
    return ok


def rel_ok(a, b, scale):
    """|a - b| within TOL relative to max(|a|, |b|), with ``scale`` as the floor for zeros."""
    return abs(a - b) <= TOL * max(abs(a), abs(b), scale)


def small_configs():
    for n in SMALL_N:
        for c in SMALL_C:
            for sigma in SIGMAS:
                yield PnlConfig(n, 4, p=1, c=c, sigma=sigma)


def z_box(dim, last_negative):
    pts = [z for z, *_ in brute_force_box(_unit_basis(dim), None, 3, with_norms=False)]
    return [z for z in pts if not last_negative or z[-1] < 0]


def _unit_basis(dim):
    from pnlfactor.lattice import BasisMatrix

    return BasisMatrix.from_columns([[int(i == j) for i in range(dim)] for j in range(dim)], 64)


# 1 ---------------------------------------------------------------------------

def test_criterion_1_gso_equivalence():
    t0 = time.perf_counter()
    bad = []
    for d in GRID_D:
        for p in GRID_P:
            for c in GRID_C:
                cfg = PnlConfig(10403, d, p=p, c=c)
                closed = gso_prime_basis(cfg).gso
                it = gso_iterative(build_adleman_basis(cfg))
                with mpmath.workprec(cfg.prec):
                    for va, vb in zip(closed.star_vectors, it.star_vectors):
                        scale = max(abs(x) for x in vb)
                        if not all(rel_ok(x, y, scale) for x, y in zip(va, vb)):
                            bad.append((d, p, c, "star"))
                    for ra, rb in zip(closed.mu, it.mu):
                        scale = max((abs(x) for x in rb), default=0)
                        if not all(rel_ok(x, y, scale) for x, y in zip(ra, rb)):
                            bad.append((d, p, c, "mu"))
                    if not all(rel_ok(x, y, 0) for x, y in zip(closed.star_norms_sq, it.star_norms_sq)):
                        bad.append((d, p, c, "norms"))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 10
    assert report(1, ok, f"27 configs, mismatches={bad[:3]}", dt, 10)


# 2 ---------------------------------------------------------------------------

def test_criterion_2_volume_identities():
    t0 = time.perf_counter()
    bad = []
    for d in GRID_D:
        for p in GRID_P:
            for c in GRID_C:
                cfg = PnlConfig(10403, d, p=p, c=c)
                vs, va = vol_schnorr_closed(cfg), vol_adleman_closed(cfg)
                gs, ga = volume_gram(build_schnorr_basis(cfg)), volume_gram(build_adleman_basis(cfg))
                with mpmath.workprec(cfg.prec):
                    tele = mpmath.sqrt(mpmath.fprod(gso_prime_basis(cfg).gso.star_norms_sq))
                    for name, a, b in (("schnorr", vs, gs), ("adleman", va, ga), ("telescoping", va, tele)):
                        if not rel_ok(a, b, 0):
                            bad.append((d, p, c, name))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 5
    assert report(2, ok, f"27 configs x 3 identities, mismatches={bad[:3]}", dt, 5)


# 3, 4 ------------------------------------------------------------------------

def test_criterion_3_adleman_capture_soundness():
    t0 = time.perf_counter()
    zs = z_box(5, last_negative=True)
    checked = violations = 0
    for cfg in small_configs():
        for z in zs:
            cand = decode_candidate(z, cfg, "adleman")
            ok, _, _ = premise_holds(z, cfg, "adleman", cand.gamma)
            if not ok:
                continue
            checked += 1
            if not within_smooth_bound(cand.u - cand.k * cfg.n**cand.gamma, cfg.pd, cfg.sigma):
                violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and checked > 0 and dt < 60
    assert report(3, ok, f"{len(zs)} z x 27 configs, premise true {checked}, violations {violations}", dt, 60)


def test_criterion_4_adleman_bound_soundness():
    t0 = time.perf_counter()
    zs = z_box(5, last_negative=True)
    violations = 0
    for cfg in small_configs():
        for z in zs:
            cand = decode_candidate(z, cfg, "adleman")
            eps = one_norm_image(z, cfg, "adleman")
            v = cand.u - cand.k * cfg.n**cand.gamma
            with mpmath.workprec(cfg.prec):
                if abs(v) > svp_bound(eps, cand.gamma, cfg) * (1 + TOL):
                    violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and dt < 60
    assert report(4, ok, f"{len(zs)} z x 27 configs, violations {violations}", dt, 60)


# 5 ---------------------------------------------------------------------------

def test_criterion_5_schnorr_capture_soundness():
    t0 = time.perf_counter()
    zs = [z for z in z_box(4, last_negative=False)]
    checked = violations = 0
    for cfg in small_configs():
        for z in zs:
            cand = decode_candidate(z, cfg, "schnorr")
            v = cand.u - cand.k * cfg.n
            eps = one_norm_image(z, cfg, "schnorr")
            with mpmath.workprec(cfg.prec):
                if abs(v) > cvp_bound(eps, cfg) * (1 + TOL):
                    violations += 1
            if premise_holds(z, cfg, "schnorr", 1)[0]:
                checked += 1
                if not within_smooth_bound(v, cfg.pd, cfg.sigma):
                    violations += 1
    dt = time.perf_counter() - t0
    ok = violations == 0 and checked > 0 and dt < 60
    assert report(5, ok, f"{len(zs)} z x 27 configs, premise true {checked}, violations {violations}", dt, 60)


# 6 ---------------------------------------------------------------------------

def _in_box(z):
    return all(abs(x) <= 3 for x in z)


def _float_image(z, logs, c, lnn, mode):
    """Double-precision 1-norm image, used only to skip points far outside the ball."""
    last = sum(zi * lg for zi, lg in zip(z, logs))
    last += z[-1] * lnn if mode == "adleman" else -lnn
    return sum(abs(zi) * lg for zi, lg in zip(z, logs)) + c * abs(last)


def _qualifying(cfg, zs, mode, slack=1e-6):
    """Box points passing the exact premise test; float images prune the clear misses."""
    logs = [float(x) for x in cfg.logs()]
    c, lnn = float(cfg.c_value()), float(cfg.ln_n())
    out = set()
    for z in zs:
        gamma = -z[-1] if mode == "adleman" else 1
        thr = float(capture_threshold(cfg, gamma))
        if _float_image(z, logs, c, lnn, mode) > thr + slack * max(1.0, abs(thr)):
            continue
        if premise_holds(z, cfg, mode, gamma)[0]:
            out.add(z)
    return out


def test_criterion_6_enumeration_completeness():
    """Enumerated sets must equal the brute-force qualifying sets on the box.

    The search ball can stick out of the [-3, 3] box; points outside the box
    have no oracle, so the comparison is on the box and every point returned
    outside it is still checked against the threshold.
    """
    t0 = time.perf_counter()
    box4 = z_box(4, last_negative=False)
    box5 = z_box(5, last_negative=True)
    mismatches, compared, skipped, outside = [], 0, 0, 0
    for cfg in small_configs():
        thr1 = capture_threshold(cfg, 1)
        if thr1 <= 0:
            skipped += 1
            continue
        radius = float(thr1)
        # close vectors in the Schnorr lattice, 1-norm ball of radius thr
        basis = build_schnorr_basis(cfg)
        t = build_target(cfg)
        want = _qualifying(cfg, box4, "schnorr")
        got = {h.z for h in enumerate_close(lll_reduce(basis), t, SearchBudget(radius, norm=1))}
        outside += sum(1 for z in got if not _in_box(z))
        if {z for z in got if _in_box(z)} != want or not all(
                premise_holds(z, cfg, "schnorr", 1)[0] for z in got):
            mismatches.append((cfg.n, cfg.c, cfg.sigma, "close"))
        # short vectors in the Adleman lattice, per-gamma threshold
        want = _qualifying(cfg, box5, "adleman")
        stream = enumerate_short(lll_reduce(build_adleman_basis(cfg)), SearchBudget(radius, norm=1),
                                 nonzero_last=True)
        got = {h.z for h in stream if premise_holds(h.z, cfg, "adleman", -h.z[-1])[0]}
        outside += sum(1 for z in got if not _in_box(z))
        if {z for z in got if _in_box(z)} != want:
            mismatches.append((cfg.n, cfg.c, cfg.sigma, "short"))
        compared += 1
    dt = time.perf_counter() - t0
    ok = not mismatches and compared > 0 and dt < 30
    assert report(6, ok, f"{compared} configs compared ({skipped} with empty ball skipped), "
                         f"{outside} hits beyond the box, mismatches={mismatches[:3]}", dt, 30)


# 7 ---------------------------------------------------------------------------

def test_criterion_7_gf2_oracle():
    t0 = time.perf_counter()
    rng = random.Random(2024)
    bad = 0
    for _ in range(200):
        r, c = rng.randint(1, 14), rng.randint(1, 11)
        rows = tuple(rng.getrandbits(c) for _ in range(r))
        basis = nullspace(BitMatrix(rows, c))
        span = gf2_span(basis)
        if span != gf2_left_nullspace_exhaustive(rows, c) or len(span) != 1 << len(basis):
            bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 10
    assert report(7, ok, f"200 matrices, mismatches {bad}", dt, 10)


# 8 ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [10403, 8051])
def test_criterion_8_end_to_end(n, tmp_path):
    d = 25
    path = tmp_path / "rels.jsonl"
    t0 = time.perf_counter()
    rep = factor(n, FactorOptions(dim=d, c="sqrtN", sigma=2, mode="schnorr", relations_file=str(path)))
    dt = time.perf_counter() - t0
    split = rep.ok and 1 < rep.factor < n and n % rep.factor == 0
    verified = len(load_relations(path).relations) if path.exists() else 0
    nontrivial = rep.x is not None and (rep.x - rep.y) % n != 0 and (rep.x + rep.y) % n != 0
    ok = split and verified >= d + 2 and nontrivial and dt < 120
    detail = (f"N={n} d={d}: factor={rep.factor} via {rep.method}, verified relations {verified} "
              f"(need {d + 2}), x != +-y {nontrivial}")
    assert report(8, ok, detail, dt, 120)


def test_criterion_8_supplement_8051_lattice_path(tmp_path):
    """8051 = 83 * 97 with d = 22 (p_d = 79), so trial division cannot split it."""
    n, d = 8051, 22
    path = tmp_path / "rels.jsonl"
    t0 = time.perf_counter()
    rep = factor(n, FactorOptions(dim=d, c="sqrtN", sigma=2, mode="schnorr", relations_file=str(path)))
    dt = time.perf_counter() - t0
    verified = len(load_relations(path).relations)
    nontrivial = rep.x is not None and (rep.x - rep.y) % n != 0 and (rep.x + rep.y) % n != 0
    ok = rep.ok and rep.factor in (83, 97) and verified >= d + 2 and nontrivial and dt < 120
    assert report("8s", ok, f"N={n} d={d}: factor={rep.factor} via {rep.method}, "
                            f"verified relations {verified}", dt, 120)


# 9 ---------------------------------------------------------------------------

def _hundred_relations(n, d, seed):
    rng = random.Random(seed)
    cfg = PnlConfig(n, d)
    small = [q for q in cfg.fb.primes[1:] if n % q]
    out = {}
    while len(out) < 100:
        k = rng.randint(1, 60)
        v = rng.choice([-1, 1]) * math.prod(rng.choice(small) for _ in range(rng.randint(0, 3)))
        rel = candidate_to_relation(Candidate((), k * n + v, k, 1, "schnorr"), cfg)
        if isinstance(rel, Relation):
            out[rel.key] = rel
    return list(out.values())


def test_criterion_9_relation_round_trip(tmp_path):
    t0 = time.perf_counter()
    n, d = 35, 10
    rels = _hundred_relations(n, d, 9)
    path = tmp_path / "rels.jsonl"
    write_relations(path, rels, n, d)
    first = load_relations(path)
    accepted = first.relations == rels and not first.rejected

    lines = path.read_text().splitlines()
    rng = random.Random(99)
    victims = rng.sample(range(1, len(lines)), 20)
    for i in victims:
        rec = json.loads(lines[i])
        vec = rng.choice("ab")
        rec[vec][rng.randrange(len(rec[vec]))] ^= 1
        lines[i] = json.dumps(rec)
    path.write_text("\n".join(lines) + "\n")
    second = load_relations(path)
    caught = sorted(ln - 1 for ln, _ in second.rejected) == sorted(victims)
    dt = time.perf_counter() - t0
    ok = accepted and caught and len(second.relations) == 80 and dt < 5
    assert report(9, ok, f"100 persisted, reload accepted {len(first.relations)}, "
                         f"tampered 20, rejected {len(second.rejected)}", dt, 5)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
