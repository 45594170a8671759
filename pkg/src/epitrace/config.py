"""Run configuration: a flat JSON key-value file mirrored by `SimConfig`.

Unknown keys are rejected so typos fail loudly.  The JSON schema shipped
in docs/config_schema.json documents every field.  Defaults reproduce the
package's reference scenario (10,000 agents, 30 days, mean 10 daily
contacts); the transmission and asymptomatic-share defaults come from the
calibration sweep in scripts/calibrate.py.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .contacts import TruncatedExponential
from .epidemic import ContagionParams

POLICIES = ("none", "ts", "tsdc", "ppto")
PREVALENCE_MODES = ("ground_truth", "reported")
BACKWARD_WEIGHTINGS = ("sequential", "flat")


@dataclass(frozen=True)
class SimConfig:
    population: int = 10000
    days: int = 30
    tests_per_day: int = 100
    trajectory_iterations: int = 100
    window_days: int = 14
    initial_symptomatic: int = 5
    mean_degree: float = 10.0
    heavy_pair_fraction: float = 0.4
    heavy_pair_weight: float = 0.9
    app_usage: float = 1.0

    beta_asymptomatic: float = 0.093
    beta_presymptomatic: float = 0.124
    beta_symptomatic: float = 0.155
    distance_scale: float = 2.0
    duration_scale: float = 10.0
    asymptomatic_fraction: float = 0.82
    recovery_days_min: int = 5
    recovery_days_max: int = 15
    incubation_days_min: int = 1
    incubation_days_max: int = 12

    contact_distance_scale: float = 1.5
    contact_distance_max: float = 5.0
    contact_duration_scale: float = 15.0
    contact_duration_max: float = 120.0

    test_sensitivity: float = 1.0
    test_specificity: float = 1.0

    policy: str = "none"
    prevalence_mode: str = "ground_truth"
    backward_weighting: str = "sequential"
    hop_budget_factor: int = 10

    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.days < 1:
            raise ValueError("horizon must be at least one day")
        if self.tests_per_day < 0:
            raise ValueError("daily test budget must be non-negative")
        if self.policy == "ppto" and self.trajectory_iterations < 1:
            raise ValueError("the trajectory policy needs at least one iteration per day")
        if self.window_days < 1:
            raise ValueError("lookback window must be at least one day")
        if not 0 <= self.initial_symptomatic <= self.population:
            raise ValueError("initial symptomatic count out of range")
        if not 0.0 <= self.app_usage <= 1.0:
            raise ValueError("app usage must be a probability")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; choose one of {POLICIES}")
        if self.prevalence_mode not in PREVALENCE_MODES:
            raise ValueError(f"unknown prevalence mode {self.prevalence_mode!r}")
        if self.backward_weighting not in BACKWARD_WEIGHTINGS:
            raise ValueError(f"unknown backward weighting {self.backward_weighting!r}")
        if self.hop_budget_factor < 1:
            raise ValueError("hop budget factor must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        # delegate range checks
        self.contagion_params()
        self.distance_dist()
        self.duration_dist()

    def contagion_params(self) -> ContagionParams:
        return ContagionParams(
            beta_asymptomatic=self.beta_asymptomatic,
            beta_presymptomatic=self.beta_presymptomatic,
            beta_symptomatic=self.beta_symptomatic,
            distance_scale=self.distance_scale,
            duration_scale=self.duration_scale,
            asymptomatic_fraction=self.asymptomatic_fraction,
            recovery_days_range=(self.recovery_days_min, self.recovery_days_max),
            incubation_days_range=(self.incubation_days_min, self.incubation_days_max),
        )

    def distance_dist(self) -> TruncatedExponential:
        return TruncatedExponential(self.contact_distance_scale, self.contact_distance_max)

    def duration_dist(self) -> TruncatedExponential:
        return TruncatedExponential(self.contact_duration_scale, self.contact_duration_max)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


def load_config(path) -> SimConfig:
    """Read a JSON config file, rejecting unknown keys."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"config root must be a JSON object: {path}")
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ValueError(f"unknown config keys {unknown} in {path}")
    return SimConfig(**raw)


def save_config(config: SimConfig, path) -> None:
    Path(path).write_text(json.dumps(dataclasses.asdict(config), indent=2) + "\n", encoding="utf-8")
