"""Tracer command line.

``tracer run SCRIPT --out FILE [--include PKG]... [--exclude PKG]...
[--fingerprints] [--max-records N]``

Exit codes: 0 success, 1 usage or I/O failure, 2 the target script raised
(partial trace written), 3 record cap reached (truncated trace written).
"""

from __future__ import annotations

import argparse
import sys

from .core import (
    ConcurrentTargetError,
    RecordCapExceeded,
    ScriptError,
    TracerConfig,
    trace_script,
)

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_SCRIPT_ERROR = 2
EXIT_TRUNCATED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracer", description="Trace a Python script's calls to typed JSONL."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a script under call interception")
    run.add_argument("script")
    run.add_argument("--out", required=True)
    run.add_argument("--include", action="append", default=[], metavar="PKG")
    run.add_argument("--exclude", action="append", default=[], metavar="PKG")
    run.add_argument("--fingerprints", action="store_true")
    run.add_argument("--max-records", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = TracerConfig(
            script=args.script,
            output=args.out,
            include=tuple(args.include),
            exclude=tuple(args.exclude),
            fingerprints=args.fingerprints,
            max_records=args.max_records,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        trace_script(config)
    except ScriptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCRIPT_ERROR
    except RecordCapExceeded as exc:
        print(f"warning: {exc}", file=sys.stderr)
        return EXIT_TRUNCATED
    except (ConcurrentTargetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
