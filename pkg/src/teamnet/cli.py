"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from . import export
from .config import SimConfig, load_config
from .errors import ConfigError, InvariantViolation
from .sim_engine import run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INVARIANT = 4

log = logging.getLogger("teamnet")


def parse_seeds(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("at least one seed is required")
    if len(set(seeds)) != len(seeds):
        raise argparse.ArgumentTypeError(f"duplicate seeds in {text!r}")
    return seeds


def _run_one(config: dict[str, Any], out_dir: str) -> tuple[float, int]:
    report = run(SimConfig.from_dict(config), out_dir=out_dir)
    return report.success_rate, report.rewires_performed


def _run_many(jobs: list[tuple[dict[str, Any], str]], n_jobs: int) -> list[tuple[float, int]]:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_run_one(cfg, out) for cfg, out in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        futures = [pool.submit(_run_one, cfg, out) for cfg, out in jobs]
        return [f.result() for f in futures]


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    report = run(cfg, out_dir=args.out)
    print(f"announced={report.tasks_announced} succeeded={report.tasks_succeeded} "
          f"failed={report.tasks_failed} open={report.tasks_open} "
          f"success_rate={report.success_rate:.4f} rewires={report.rewires_performed}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg.with_changes(seed=s).to_dict(), str(out / f"seed_{s}")) for s in args.seeds]
    results = _run_many(jobs, args.jobs)
    rows = [(s, repr(rate), rewires) for s, (rate, rewires) in zip(args.seeds, results)]
    export.write_csv(out / "summary.csv", ("seed", "success_rate", "rewires"), rows)
    for row in rows:
        print(*row, sep="\t")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for s in args.seeds:
        for arm, enabled in (("on", True), ("off", False)):
            arm_cfg = cfg.with_changes(seed=s, adaptation_enabled=enabled)
            jobs.append((arm_cfg.to_dict(), str(out / f"seed_{s}" / arm)))
    results = _run_many(jobs, args.jobs)
    rows = []
    for k, s in enumerate(args.seeds):
        rate_on, rate_off = results[2 * k][0], results[2 * k + 1][0]
        rows.append((s, repr(rate_on), repr(rate_off), repr(rate_on - rate_off)))
    export.write_csv(out / "compare.csv", ("seed", "rate_on", "rate_off", "delta"), rows)
    for row in rows:
        print(*row, sep="\t")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    load_config(args.config)
    print(f"{args.config}: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teamnet", description="Network-constrained team formation simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    for name, func, text in (
        ("sweep", cmd_sweep, "run one simulation per seed"),
        ("compare", cmd_compare, "run every seed with adaptation on and off"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.add_argument("--seeds", required=True, type=parse_seeds, help="comma-separated, e.g. 1,2,3")
        p.add_argument("--out", required=True)
        p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("validate", help="check a config without running it")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
