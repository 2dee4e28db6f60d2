"""Command line entry point.

Usage: isoflow run CONFIG [--out DIR] [--refine K]

Runs the experiment described by a config file, writes CSV artifacts and a
summary.txt of stable `key = value` lines, prints one pass/fail line per
built-in check, and exits 0 iff every check passed.
"""

import argparse
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .experiments import _fmt, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isoflow",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one configured experiment")
    run.add_argument("config", help="path to the config file")
    run.add_argument("--out", default=None,
                     help="output directory (overrides [output] dir)")
    run.add_argument("--refine", type=int, default=0, metavar="K",
                     help="double all grid resolutions K times")
    return parser


def write_summary(path: Path, report) -> None:
    with open(path, "w", newline="\n") as fh:
        for key, value in report.summary.items():
            fh.write(f"{key} = {_fmt(value)}\n")
        for check in report.checks:
            fh.write(f"check_{check.name} = {'pass' if check.passed else 'fail'}\n")
        fh.write(f"overall = {'pass' if report.passed else 'fail'}\n")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 2
    if args.refine < 0:
        print("error: --refine must be >= 0", file=sys.stderr)
        return 2
    if args.refine:
        cfg = cfg.refine(args.refine)
    out_dir = Path(args.out) if args.out else Path(cfg.out_dir)
    try:
        report = run_experiment(cfg, out_dir)
    except Exception as exc:  # solver failures surface as nonzero status
        print(f"error: {cfg.experiment} failed: {exc}", file=sys.stderr)
        return 1
    write_summary(out_dir / "summary.txt", report)
    for check in report.checks:
        verdict = "PASS" if check.passed else "FAIL"
        print(f"{verdict} {check.name}: {check.detail}")
    print(f"artifacts: {', '.join(report.artifacts + ['summary.txt'])} in {out_dir}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
