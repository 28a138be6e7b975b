"""Command-line front end.

Exit codes: 0 certified (or command succeeded), 1 input error,
2 certification failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import protofile, theories
from .coinflip import analyze, validate_protocol
from .protocol import Protocol
from .sip import SweepError, delta_sweep, sweep_csv

EXIT_OK, EXIT_INPUT, EXIT_CERT = 0, 1, 2
DEFAULT_DELTAS = "0.5,0.25,0.1,0.05"


class InputError(Exception):
    pass


def _seed() -> int:
    raw = os.environ.get("SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"SEED must be an integer, got {raw!r}") from None


def _deltas(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse delta list {text!r}") from None
    if not vals:
        raise InputError("no delta given")
    if any(not (v > 0) or v == float("inf") for v in vals):
        raise InputError("delta must be positive")
    return vals


def _load(source: str) -> Protocol:
    """A protocol file path, or the name of a shipped theory."""
    if not Path(source).exists():
        try:
            return theories.get_theory(source).protocol
        except (KeyError, ValueError):
            raise InputError(f"{source}: no such file or theory") from None
    try:
        return protofile.load(source)
    except protofile.ProtocolFileError as exc:
        raise InputError(f"{source}: {exc}") from None


def _validated(source: str) -> Protocol:
    p = _load(source)
    bad = validate_protocol(p)
    if bad:
        raise InputError("invalid protocol:\n" + "\n".join(f"  {v}" for v in bad))
    return p


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_analyze(args) -> int:
    deltas = _deltas(args.delta)
    p = _validated(args.source)
    report = analyze(p, deltas, mode=args.mode, seed=_seed(), samples=args.samples)
    if args.out:
        _write(report.to_json(), args.out)
    if args.out != "-":
        sys.stdout.write(report.summary_table())
    return EXIT_OK if report.theorem4_pass else EXIT_CERT


def cmd_sweep(args) -> int:
    deltas = _deltas(args.deltas)
    if args.b not in (0, 1):
        raise InputError("--b must be 0 or 1")
    p = _validated(args.source)
    try:
        rows = delta_sweep(p, args.b, deltas, mode=args.mode, samples=args.samples, seed=_seed())
    except SweepError as exc:
        raise InputError(str(exc)) from None
    _write(sweep_csv(rows), args.out)
    return EXIT_OK if len(rows) == len(deltas) and rows[-1].status == "Optimal" else EXIT_CERT


def cmd_theories(args) -> int:
    if args.export:
        name, path = args.export
        try:
            spec = theories.get_theory(name)
        except (KeyError, ValueError) as exc:
            raise InputError(str(exc.args[0] if exc.args else exc)) from None
        _write(protofile.dumps(spec.protocol), path)
        return EXIT_OK
    for name in theories.ZOO_NAMES:
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coinsip", description="Coin-flipping cheating bounds in GPTs.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="certify the bias lower bound of a protocol")
    a.add_argument("source", help="protocol JSON file or theory name (e.g. polygon_5)")
    a.add_argument("--delta", default=DEFAULT_DELTAS, help="mesh fineness, or a comma list")
    a.add_argument("--out", help="write the JSON report here ('-' for stdout)")
    a.add_argument("--mode", choices=("extreme", "full"), default="extreme")
    a.add_argument("--samples", type=int, default=10_000, help="covering-check samples")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="discretized Bob values over decreasing deltas")
    s.add_argument("source")
    s.add_argument("--deltas", default=DEFAULT_DELTAS, help="strictly decreasing comma list")
    s.add_argument("--b", type=int, default=0, help="outcome Bob forces (0 or 1)")
    s.add_argument("--out", help="CSV path (default stdout)")
    s.add_argument("--mode", choices=("extreme", "full"), default="extreme")
    s.add_argument("--samples", type=int, default=10_000)
    s.set_defaults(func=cmd_sweep)

    t = sub.add_parser("theories", help="list shipped theories or export one")
    g = t.add_mutually_exclusive_group()
    g.add_argument("--list", action="store_true")
    g.add_argument("--export", nargs=2, metavar=("NAME", "PATH"))
    t.set_defaults(func=cmd_theories)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
