"""Command-line entry point: ``edad transversal | sweep | security | verify``.

Exit codes: 0 success, 1 other runtime error, 2 configuration error,
3 cache error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import keyrates, sweep
from .errors import CacheError, ConfigurationError, DomainError, EdadError, UnsupportedSizeError
from .protocols import (
    CACHE_ENV,
    MAX_PAIRS,
    build_transversal,
    cache_path,
    default_cache_dir,
    read_transversal,
    serialize_transversal,
    write_transversal,
)
from .search import FAMILIES, parse_family
from .verify import run_checks

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_CACHE, EXIT_VERIFY = 0, 1, 2, 3, 4

DEFAULT_QGRID = "0.15:0.35:0.005"


def _cache_dir(arg) -> Path:
    return Path(arg) if arg else default_cache_dir()


def _out_path(arg, m: int) -> Path:
    if arg is None:
        return cache_path(default_cache_dir(), m)
    path = Path(arg)
    return cache_path(path, m) if path.is_dir() else path


def cmd_transversal(args) -> int:
    m = args.m
    if not 1 <= m <= MAX_PAIRS:
        raise UnsupportedSizeError(f"m must be in 1..{MAX_PAIRS}, got {m}")
    path = _out_path(args.out, m)
    built = build_transversal(m)
    if path.exists() and not args.force:
        cached = read_transversal(path, m)
        if serialize_transversal(cached) != serialize_transversal(built):
            raise CacheError(f"{path} holds a different transversal; rerun with --force")
        print(f"verified {len(cached)} protocols checksum={cached.checksum:08x} {path}")
        return EXIT_OK
    write_transversal(path, built)
    print(f"{len(built)} protocols checksum={built.checksum:08x} {path}")
    return EXIT_OK


def _families(text: str):
    if text == "all":
        return FAMILIES
    return tuple(parse_family(name) for name in text.split(",") if name.strip())


def cmd_sweep(args) -> int:
    grid = sweep.parse_grid(args.grid) if args.grid else sweep.DEFAULT_GRIDS[args.noise]
    cfg = sweep.RunConfig(
        noise=args.noise,
        grid=grid,
        families=_families(args.families),
        objective=args.objective,
        perm_set=args.perms,
        workers=args.workers,
        cache_dir=_cache_dir(args.cache),
        dejmps_baseline=args.dejmps_baseline,
    )
    records = sweep.run_sweep(cfg)
    if args.format == "csv":
        text = sweep.records_to_csv(records, baseline=cfg.dejmps_baseline)
    else:
        text = sweep.records_to_jsonl(records)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def _base_family(name: str) -> str:
    return "six_state" if name.startswith("six_state") else "bb84"


def cmd_security(args) -> int:
    names = keyrates.SECURITY_FAMILIES if args.family == "all" else (args.family,)
    for name in names:
        q = keyrates.critical_qber(name, tol=args.tol)
        perm = keyrates.winning_permutation(name, q - args.tol)
        print(f"{name}: Q* = {q:.6f} (permutation {perm.label()})")
    if args.finite:
        start, stop, step = sweep.parse_grid(args.qgrid)
        qs = sweep.grid_values(start, stop, step)
        for base in dict.fromkeys(_base_family(n) for n in names):
            for cfg in keyrates.ED_CONFIGS[base]:
                print(f"# {base} {cfg} N<={args.nmax}")
                print("Q,min,max")
                for q in map(float, qs):
                    lo, hi = keyrates.finite_envelope(base, cfg, args.nmax, q)
                    print(f"{q!r},{lo!r},{hi!r}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(tol=args.tol, cache_dir=_cache_dir(args.cache), echo=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    cache_help = f"cache directory (default ${CACHE_ENV} or ~/.cache/edad)"

    p = sub.add_parser("transversal", help="build or verify a transversal cache")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", help="cache file or directory (default: cache directory)")
    p.add_argument("--force", action="store_true", help="rewrite an existing file")
    p.set_defaults(func=cmd_transversal)

    p = sub.add_parser("sweep", help="optimal protocols over a noise grid")
    p.add_argument("--noise", choices=sweep.NOISE_MODELS, default="werner")
    p.add_argument("--families", default="all", help="comma separated, e.g. 2-1,3-2-1")
    p.add_argument("--objective", choices=("fidelity", "keyrate"), default="keyrate")
    p.add_argument("--perms", choices=("pauli4", "full24"), default="pauli4")
    p.add_argument("--grid", help="start:stop:step (default depends on --noise)")
    p.add_argument("--cache", help=cache_help)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dejmps-baseline", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("security", help="critical QBER and finite envelopes")
    p.add_argument("--family", choices=("all",) + keyrates.SECURITY_FAMILIES, default="all")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--finite", action="store_true")
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--qgrid", default=DEFAULT_QGRID)
    p.set_defaults(func=cmd_security)

    p = sub.add_parser("verify", help="run the oracle suite")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--cache", help=cache_help)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CacheError as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (ConfigurationError, DomainError, UnsupportedSizeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EdadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
