"""``qtm <experiment> [--config FILE] [--out PATH] [--threads N] [--set key=value ...]``

Exit status: 0 on success, 1 on a configuration error, 2 on a numerical
failure (degenerate steady state, residual or trace breach).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from qtm.config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config, parse_overrides, update_from_pairs
from qtm.experiments import Table, run, write_csv, write_json
from qtm.liouvillian import DegenerateSteadyStateError, NotAStateError

log = logging.getLogger("qtm")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qtm", description="Autonomous entanglement-engine experiments")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--threads", type=int, help="worker threads for sweeps (default: $QTM_THREADS or all cores)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    pairs = parse_overrides(args.overrides)
    pairs["experiment"] = args.experiment
    if args.out is not None:
        pairs["out"] = args.out
    if args.threads is not None:
        pairs["threads"] = str(args.threads)
    elif "threads" not in pairs and os.environ.get("QTM_THREADS"):
        pairs["threads"] = os.environ["QTM_THREADS"]
    return update_from_pairs(cfg, pairs).validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        result = run(cfg)
    except ConfigError as exc:
        print(f"qtm: config error: {exc}", file=sys.stderr)
        return 1
    except (DegenerateSteadyStateError, NotAStateError) as exc:
        print(f"qtm: numerical failure: {exc}", file=sys.stderr)
        return 2

    writer = write_csv if isinstance(result, Table) else write_json
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            writer(result, fh)
    else:
        writer(result, sys.stdout)
    if result.failed:
        print("qtm: numerical failure: see flagged rows/entries in the output", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
