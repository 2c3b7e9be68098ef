"""Command line entry point.

Exit codes: 0 success, 2 solver non-convergence on any ladder point,
3 invalid configuration.  The output directory resolves as
--out flag > WEDGECMC_OUT environment variable > config [output] directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .config import load_config
from .errors import ParseError, ValidationError
from .sweep import run_sweep


def build_parser():
    p = argparse.ArgumentParser(
        prog="wedgecmc",
        description="CMC leaves of flat wedge spacetimes: ladder sweeps and reports",
    )
    p.add_argument("--config", required=True, help="run configuration file")
    p.add_argument("--out", default=None, help="output directory (overrides config/env)")
    p.add_argument("--jobs", type=int, default=1, help="concurrent ladder solves")
    p.add_argument("--tol", type=float, default=None, help="override solver tolerance")
    p.add_argument(
        "--ladder",
        default=None,
        metavar="START:RATIO:COUNT",
        help="override the lambda ladder with a geometric one",
    )
    p.add_argument(
        "--emit", choices=("csv", "json", "all"), default=None, help="report formats"
    )
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.tol is not None:
            cfg = dataclasses.replace(
                cfg, solver=dataclasses.replace(cfg.solver, tolerance=args.tol)
            )
        if args.ladder is not None:
            try:
                start, ratio, count = args.ladder.split(":")
                start, ratio, count = float(start), float(ratio), int(count)
            except ValueError:
                raise ValidationError("ladder", f"bad --ladder spec {args.ladder!r}")
            if ratio <= 1:
                raise ValidationError("ladder.ratio", "must be > 1")
            cfg = dataclasses.replace(
                cfg, ladder=tuple(start * ratio**k for k in range(count))
            )
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    out_dir = args.out or os.environ.get("WEDGECMC_OUT") or cfg.output_dir
    code, summary, paths = run_sweep(cfg, jobs=args.jobs, out_dir=out_dir, emit=args.emit)
    for p in paths:
        print(p)
    if code != 0:
        bad = [s for s in summary["solves"] if not s["converged"]]
        print(f"{len(bad)} ladder point(s) failed to converge", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
