"""Command-line entry point.

    anc run <experiment> --config <file> --out <dir>
            [--freq-range a:b:step] [--ref-mics Q] [--method NAME ...]
            [--seed N] [--no-figures]

Log verbosity is controlled by the ANC_LOG environment variable
(DEBUG | INFO | WARNING | ERROR; default WARNING).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from .config import METHODS, validate_config
from .errors import ConfigError
from .experiments import EXPERIMENTS, run_experiment


def _setup_logging() -> None:
    level = os.environ.get("ANC_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _parse_freq_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected a:b:step")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("frequency range values must be numeric")
    if a <= 0 or b < a or step <= 0:
        raise argparse.ArgumentTypeError("need 0 < a <= b and step > 0")
    return a, b, step


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anc",
        description="2D spatial active-noise-control simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a canned experiment")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", default=None, help="YAML config file (optional)")
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--freq-range", type=_parse_freq_range, default=None,
                     metavar="A:B:STEP", help="override the frequency sweep (Hz)")
    run.add_argument("--ref-mics", type=int, default=None, metavar="Q",
                     help="override the reference microphone count")
    run.add_argument("--method", action="append", default=None,
                     choices=sorted(METHODS), help="restrict methods (repeatable)")
    run.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    run.add_argument("--no-figures", action="store_true",
                     help="skip PNG rendering, emit CSVs only")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)

    try:
        cfg = validate_config(args.config)
        overrides = {}
        if args.freq_range is not None:
            a, b, step = args.freq_range
            if args.experiment == "fig1":
                overrides.update(fig1_freq_start=a, fig1_freq_stop=b,
                                 fig1_freq_step=step)
            else:
                overrides.update(freq_start=a, freq_stop=b, freq_step=step)
        if args.ref_mics is not None:
            if args.ref_mics < 1:
                raise ConfigError("--ref-mics must be >= 1")
            if args.experiment == "fig6":
                overrides["fig6_ref_counts"] = (args.ref_mics,)
            else:
                overrides["ref_count"] = args.ref_mics
        if args.method:
            overrides["methods"] = tuple(dict.fromkeys(args.method))
        if args.seed is not None:
            overrides["seed"] = args.seed
        if overrides:
            cfg = dataclasses.replace(cfg, **overrides)
        run_experiment(args.experiment, cfg, args.out,
                       render_figures=not args.no_figures)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
