"""Command line entry point: ``nsaniso <experiment> --config file.ini``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from nsaniso.config import EXPERIMENTS, ConfigError, load_config
from nsaniso.io import write_outputs

USAGE_ERROR = 64

log = logging.getLogger("nsaniso")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nsaniso", description="Anisotropic Navier-Stokes experiments on a box.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="INI configuration file")
    p.add_argument("--out", help="output root (default: the config's [output] dir)")
    p.add_argument("--jobs", type=int, help="worker processes for sweeps (default: $NSANISO_JOBS or 1)")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--plots", action="store_true", help="also render PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _jobs(value: int | None) -> int:
    if value is None:
        value = int(os.environ.get("NSANISO_JOBS", "1"))
    if value < 1:
        raise ConfigError("--jobs must be at least 1")
    return value


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else USAGE_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.experiment)
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed, initial={**cfg.initial, "seed": args.seed})
        jobs = _jobs(args.jobs)
    except (ConfigError, ValueError) as exc:
        print(f"nsaniso: configuration error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    from nsaniso.experiments import run_experiment

    out_dir = Path(args.out or cfg.output_dir) / cfg.name
    try:
        report = run_experiment(cfg, jobs)
    except ValueError as exc:
        print(f"nsaniso: {cfg.name} failed: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        write_outputs(report, out_dir, cfg.echo())
        if args.plots or cfg.plots:
            from nsaniso.plotting import render_report

            render_report(report, out_dir)
    except OSError as exc:
        print(f"nsaniso: {exc}", file=sys.stderr)
        return USAGE_ERROR
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} margin={c.margin:.6g}")
    print(f"outputs in {out_dir}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
