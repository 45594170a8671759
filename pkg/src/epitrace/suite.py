"""Multi-run experiment suites with matched seeds and a summary table.

Each suite writes one CSV (plus a diagnostics log) per run into a
subdirectory per group, and a `summary.csv` with mean and sample standard
deviation of cumulative infections over seeds.  Groups of a suite run on
matched master seeds, so policy and app-usage comparisons are paired.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np

from .config import SimConfig
from .harness import run_simulation

SUITE_NAMES = ("uncontrolled", "policy-comparison", "rho-sweep")
SUMMARY_HEADER = "group,seeds,mean_cum_infections,std_cum_infections"

RHO_LEVELS = (1.0, 0.75, 0.5)
POLICY_LEVELS = ("ts", "tsdc", "ppto")


def _group_configs(suite: str, base: SimConfig) -> list[tuple[str, SimConfig]]:
    if suite == "uncontrolled":
        return [("uncontrolled", base.replace(policy="none", tests_per_day=0))]
    if suite == "policy-comparison":
        return [(policy, base.replace(policy=policy)) for policy in POLICY_LEVELS]
    if suite == "rho-sweep":
        return [(f"rho-{rho}", base.replace(policy="ppto", app_usage=rho)) for rho in RHO_LEVELS]
    raise ValueError(f"unknown suite {suite!r}; choose one of {SUITE_NAMES}")


def run_experiment_suite(
    suite: str,
    base: SimConfig,
    n_seeds: int,
    out_dir: Path,
    verbose: bool = True,
) -> dict[str, list[int]]:
    """Run the named suite; returns cumulative infections per group per seed."""
    if n_seeds < 1:
        raise ValueError("need at least one seed")
    out_dir = Path(out_dir)
    groups = _group_configs(suite, base)
    outcomes: dict[str, list[int]] = {name: [] for name, _ in groups}

    for name, group_config in groups:
        group_dir = out_dir / name
        for offset in range(n_seeds):
            seed = base.seed + offset
            config = group_config.replace(seed=seed)
            started = time.perf_counter()
            result = run_simulation(
                config,
                csv_path=group_dir / f"seed{seed:03d}.csv",
                log_path=group_dir / f"seed{seed:03d}.log",
            )
            outcomes[name].append(result.cumulative_infections)
            if verbose:
                elapsed = time.perf_counter() - started
                print(
                    f"[{suite}] {name} seed={seed} cum_infections={result.cumulative_infections} "
                    f"({elapsed:.1f}s)",
                    file=sys.stderr,
                    flush=True,
                )

    lines = [SUMMARY_HEADER]
    for name, values in outcomes.items():
        arr = np.asarray(values, dtype=float)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        lines.append(f"{name},{len(arr)},{arr.mean():.3f},{std:.3f}")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "summary.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return outcomes
