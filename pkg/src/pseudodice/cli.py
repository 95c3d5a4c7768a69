"""Command-line interface.

Exit codes: 0 success, 2 configuration/format errors, 3 capacity or
bounds errors, 4 numerical failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness, stats
from .bitseq import binarize_digits, load_bit_file, pattern_census, save_bit_file, save_census_csv
from .constdigits import Constant, gen_digits, gen_digits_alt, load_digit_file, save_digit_file
from .errors import PseudodiceError
from .mtprng import mt_binary_sequence

_ALT_VERIFY_CAP = 100_000


def _cmd_gen_digits(args) -> int:
    constant = Constant(args.constant)
    stream = gen_digits(constant, args.count)
    if args.verify:
        check = min(args.count, _ALT_VERIFY_CAP)
        alt = gen_digits_alt(constant, check)
        if (stream.digits[:check] != alt.digits).any():
            print("verification FAILED: algorithms disagree", file=sys.stderr)
            return 4
        print(f"verified first {check} digits against the alternate algorithm")
    save_digit_file(stream, args.out)
    print(f"wrote {stream.count} digits of {constant.value} to {args.out}")
    return 0


def _cmd_binarize(args) -> int:
    stream = load_digit_file(args.infile)
    bits = binarize_digits(stream, args.threshold, inclusive=not args.strict)
    save_bit_file(bits, args.out)
    print(f"wrote {bits.count} bits to {args.out}")
    return 0


def _cmd_census(args) -> int:
    bits = load_bit_file(args.infile)
    census = pattern_census(bits, args.n, args.length)
    save_census_csv(census, args.out)
    print(f"wrote census over first {args.n} bits (L={args.length}) to {args.out}")
    return 0


def _cmd_normality(args) -> int:
    bits = load_bit_file(args.infile)
    grid = [int(v) for v in args.n_grid.split(",") if v]
    reports = []
    for n in grid:
        census = pattern_census(bits, n, args.length)
        report = stats.normality_test(census, args.k)
        reports.append(report.to_dict())
    with open(args.out, "w", encoding="ascii") as fh:
        json.dump({"source": bits.source, "reports": reports}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for r in reports:
        flag = "VIOLATED" if r["violated"] else "ok"
        print(f"n={r['n']}: statistic={r['statistic']:.6f} bound={r['bound']:.6f} {flag}")
    return 0


def _cmd_mt(args) -> int:
    bits = mt_binary_sequence(args.seed, args.count, args.threshold)
    save_bit_file(bits, args.out)
    print(f"wrote {bits.count} MT bits (seed {args.seed}) to {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    text = Path(args.config).read_text(encoding="ascii") if args.config else ""
    config = harness.parse_config(text, experiment=args.which)
    report = harness.run_experiment(config)
    written = harness.emit_report(report, args.out)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudodice",
        description="Predictability and normality analysis of pseudo-random 0-1 sequences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-digits", help="generate a digit cache file")
    p.add_argument("--constant", required=True, choices=[c.value for c in Constant])
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--verify", action="store_true",
                   help="cross-check against the alternate algorithm (up to 1e5 digits)")
    p.set_defaults(func=_cmd_gen_digits)

    p = sub.add_parser("binarize", help="binarize a digit cache into a bit file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--threshold", type=int, default=5)
    p.add_argument("--strict", action="store_true",
                   help="use digit > threshold instead of digit >= threshold")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_binarize)

    p = sub.add_parser("census", help="pattern census of a bit file prefix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--length", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("normality", help="normality test over an n grid")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--n-grid", default="10000,100000,1000000,9000000")
    p.add_argument("--length", type=int, default=7)
    p.add_argument("--k", type=float, default=5.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_normality)

    p = sub.add_parser("mt", help="write an MT19937 binary sequence")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mt)

    p = sub.add_parser("experiment", help="run experiment a, b or c")
    p.add_argument("which", choices=["a", "b", "c"])
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", required=True, help="output directory for the report")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PseudodiceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
