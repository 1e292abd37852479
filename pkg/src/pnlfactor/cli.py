"""``pnl-factor`` command line interface."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath

from .pipeline import FactorOptions, factor
from .prime_lattices import (
    PnlConfig,
    capture_threshold,
    gso_prime_basis,
    vol_adleman_closed,
    vol_schnorr_closed,
)
from .relations import load_relations


def _parse_c(text: str):
    if text in ("sqrtN", "e"):
        return text
    if text.startswith("value:"):
        return Fraction(text[len("value:"):])
    raise argparse.ArgumentTypeError("expected sqrtN, e or value:<number>")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="integer to factor (decimal)")
    p.add_argument("--dim", type=int, default=25, help="number of primes d")
    p.add_argument("--norm", type=Fraction, default=Fraction(1), help="norm index p of the basis")
    p.add_argument("--c-mode", type=_parse_c, default="sqrtN", dest="c",
                   help="scaling constant: sqrtN, e or value:<v>")
    p.add_argument("--sigma", type=Fraction, default=Fraction(2), help="smoothness slack")
    p.add_argument("--json", action="store_true", help="emit a JSON document")


def _norm_arg(p: Fraction):
    return int(p) if p.denominator == 1 else p


def cmd_factor(args) -> int:
    opts = FactorOptions(dim=args.dim, norm=_norm_arg(args.norm), c=args.c, sigma=args.sigma,
                         mode=args.mode, seed=args.seed, relations_file=args.relations_file)
    rep = factor(args.n, opts)
    if args.json:
        print(json.dumps(rep.to_dict(), default=str))
    elif rep.ok:
        print(rep.factor)
    if not rep.ok:
        print(f"failure: {rep.reason}", file=sys.stderr)
        return 1
    return 0


def cmd_analyze(args) -> int:
    cfg = PnlConfig(args.n, args.dim, _norm_arg(args.norm), args.c, args.sigma)
    pg = gso_prime_basis(cfg)
    doc = {
        "n": cfg.n,
        "dim": cfg.d,
        "norm": str(cfg.p),
        "C": mpmath.nstr(cfg.c_value(), 15),
        "prec": cfg.prec,
        "vol_schnorr": mpmath.nstr(vol_schnorr_closed(cfg), 15),
        "vol_adleman": mpmath.nstr(vol_adleman_closed(cfg), 15),
        "D": [mpmath.nstr(v, 15) for v in pg.d_seq],
        "gso_norms_sq": [mpmath.nstr(v, 15) for v in pg.gso.star_norms_sq[:-1]],
        "target_star_norm_sq": mpmath.nstr(pg.target_star_norm_sq, 15),
    }
    if cfg.c_value() > 1:
        doc["capture_threshold"] = {g: mpmath.nstr(capture_threshold(cfg, g), 15) for g in (1, 2, 3)}
    if args.json:
        print(json.dumps(doc))
    else:
        for key, val in doc.items():
            print(f"{key}: {val}")
    return 0


def cmd_verify(args) -> int:
    res = load_relations(args.relations_file, args.n, args.dim)
    for lineno, why in res.rejected:
        print(f"line {lineno}: {why}", file=sys.stderr)
    print(f"{len(res.relations)} relations verified, {len(res.rejected)} rejected")
    return 1 if res.rejected else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnl-factor",
                                     description="Prime number lattice factoring toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="factor an integer")
    _add_config_args(p)
    p.add_argument("--mode", choices=("schnorr", "adleman"), default="schnorr")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--relations-file", default=None)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("analyze", help="print volumes, GSO data and capture thresholds")
    _add_config_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="re-verify a relations file")
    p.add_argument("relations_file")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
