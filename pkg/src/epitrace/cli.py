"""Command-line entry points: single runs and experiment suites."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import POLICIES, SimConfig, load_config
from .harness import run_simulation
from .suite import SUITE_NAMES, run_experiment_suite


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epitrace",
        description="Agent-based epidemic simulator with decentralized test allocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation")
    sim.add_argument("--config", type=Path, help="JSON config file (defaults apply otherwise)")
    sim.add_argument("--seed", type=int, help="master seed override")
    sim.add_argument("--policy", choices=POLICIES, help="testing policy override")
    sim.add_argument("--days", type=int, help="horizon override")
    sim.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    suite = sub.add_parser("suite", help="run an experiment suite")
    suite.add_argument("--name", choices=SUITE_NAMES, required=True)
    suite.add_argument("--config", type=Path, help="base JSON config file")
    suite.add_argument("--seeds", type=int, default=1, help="number of matched seeds")
    suite.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    return parser


def _load_base(args) -> SimConfig:
    return load_config(args.config) if args.config else SimConfig()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = _load_base(args)
            overrides = {}
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.policy is not None:
                overrides["policy"] = args.policy
            if args.days is not None:
                overrides["days"] = args.days
            if overrides:
                config = config.replace(**overrides)
            stem = f"{config.policy}-seed{config.seed:03d}"
            result = run_simulation(
                config,
                csv_path=args.out / f"{stem}.csv",
                log_path=args.out / f"{stem}.log",
            )
            print(f"wrote {args.out / (stem + '.csv')} cum_infections={result.cumulative_infections}")
        else:
            run_experiment_suite(args.name, _load_base(args), args.seeds, args.out)
            print(f"wrote {args.out / 'summary.csv'}")
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
