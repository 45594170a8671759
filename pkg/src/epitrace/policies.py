"""Daily swab-test policies and the test oracle.

Policies pick at most K agents to test from what they can observe.  The
two baselines prioritize the newly symptomatic (TS) and additionally
their recent direct contacts (TSDC, which is allowed to read the
simulator's ground-truth contact log); leftover budget is spent uniformly
at random over the remaining eligible (non-isolated, not yet picked)
agents.  When a priority tier overflows the remaining budget, a uniform
random subset of that tier is taken.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Set

import numpy as np

from .epidemic import HealthState, Individual


@dataclass(frozen=True)
class SwabTest:
    """Imperfect test: sensitivity on the infected, specificity on the rest."""

    sensitivity: float = 1.0
    specificity: float = 1.0

    def __post_init__(self):
        for name, value in (("sensitivity", self.sensitivity), ("specificity", self.specificity)):
            if not 0.5 < value <= 1.0:
                raise ValueError(f"{name} must be in (0.5, 1.0]")


@dataclass(frozen=True)
class PolicyDecision:
    """One day's testing outcome."""

    day: int
    tested: frozenset[int]
    positives: frozenset[int]


def _random_subset(pool: Iterable[int], size: int, rng: np.random.Generator) -> set[int]:
    items = sorted(pool)
    if size >= len(items):
        return set(items)
    picked = rng.choice(len(items), size=size, replace=False)
    return {items[i] for i in picked}


def _fill_tiers(tiers: list[set[int]], k: int, rng: np.random.Generator) -> set[int]:
    chosen: set[int] = set()
    for tier in tiers:
        tier = tier - chosen
        room = k - len(chosen)
        if room <= 0:
            break
        chosen |= tier if len(tier) <= room else _random_subset(tier, room, rng)
    return chosen


def policy_ts(
    new_symptomatics: Set[int],
    eligible: Set[int],
    k: int,
    rng: np.random.Generator,
) -> set[int]:
    """Test the newly symptomatic, then random eligible agents up to K."""
    if k < 0:
        raise ValueError("test budget must be non-negative")
    return _fill_tiers([set(new_symptomatics) & set(eligible), set(eligible)], k, rng)


def policy_tsdc(
    new_symptomatics: Set[int],
    direct_contacts_of: Callable[[int], Set[int]],
    eligible: Set[int],
    k: int,
    rng: np.random.Generator,
) -> set[int]:
    """Test the newly symptomatic, their recent direct contacts, then random fill."""
    if k < 0:
        raise ValueError("test budget must be non-negative")
    symptomatic = set(new_symptomatics) & set(eligible)
    contacts: set[int] = set()
    for agent in sorted(new_symptomatics):
        contacts |= set(direct_contacts_of(agent))
    contacts = (contacts & set(eligible)) - symptomatic
    return _fill_tiers([symptomatic, contacts, set(eligible)], k, rng)


def run_test(individual: Individual, test: SwabTest, rng: np.random.Generator) -> bool:
    """Swab one agent; True means positive."""
    infected = individual.state in (
        HealthState.ASYMPTOMATIC,
        HealthState.PRESYMPTOMATIC,
        HealthState.SYMPTOMATIC,
    )
    p_positive = test.sensitivity if infected else 1.0 - test.specificity
    return bool(rng.random() < p_positive)
