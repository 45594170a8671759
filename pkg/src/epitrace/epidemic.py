"""Five-class disease dynamics: susceptible, asymptomatic, presymptomatic,
symptomatic, recovered.

Per-contact transmission probability is a separable kernel in contact
distance and duration, scaled by a per-class base transmissibility
(symptomatic >= presymptomatic >= asymptomatic).  Newly infected agents
branch into the asymptomatic course (recover after a sampled number of
days) or the presymptomatic course (symptoms after a sampled incubation,
then recovery on a fresh clock).  Recovered is absorbing; no reinfection.

State bookkeeping is array-backed for speed; `Individual` is a read-only
per-agent snapshot used by tests and the testing policies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .contacts import Contact, ContactSet


class HealthState(IntEnum):
    SUSCEPTIBLE = 0
    ASYMPTOMATIC = 1
    PRESYMPTOMATIC = 2
    SYMPTOMATIC = 3
    RECOVERED = 4


INFECTIOUS_STATES = (
    HealthState.ASYMPTOMATIC,
    HealthState.PRESYMPTOMATIC,
    HealthState.SYMPTOMATIC,
)

_UNSET = -1


@dataclass(frozen=True)
class ContagionParams:
    """Transmission and disease-clock parameters.

    beta_* are per-class transmissibility caps in [0, 1], ordered
    asymptomatic <= presymptomatic <= symptomatic.  distance_scale (meters)
    and duration_scale (minutes) shape the per-contact kernel
    exp(-distance/distance_scale) * (1 - exp(-duration/duration_scale)).
    Recovery and incubation durations are sampled uniformly (integer days,
    inclusive bounds).
    """

    beta_asymptomatic: float = 0.093
    beta_presymptomatic: float = 0.124
    beta_symptomatic: float = 0.155
    distance_scale: float = 2.0
    duration_scale: float = 10.0
    asymptomatic_fraction: float = 0.82
    recovery_days_range: tuple[int, int] = (5, 15)
    incubation_days_range: tuple[int, int] = (1, 12)

    def __post_init__(self):
        if not 0.0 <= self.beta_asymptomatic <= self.beta_presymptomatic <= self.beta_symptomatic <= 1.0:
            raise ValueError(
                "per-class transmissibility must satisfy "
                "0 <= asymptomatic <= presymptomatic <= symptomatic <= 1"
            )
        if self.distance_scale <= 0 or self.duration_scale <= 0:
            raise ValueError("kernel scales must be positive")
        if not 0.0 <= self.asymptomatic_fraction <= 1.0:
            raise ValueError("asymptomatic_fraction must be in [0, 1]")
        for lo, hi in (self.recovery_days_range, self.incubation_days_range):
            if not (isinstance(lo, int) and isinstance(hi, int)) or lo < 1 or hi < lo:
                raise ValueError("duration ranges must be integer days with 1 <= lo <= hi")

    def beta_by_state(self) -> np.ndarray:
        """Transmissibility indexed by HealthState code (0 for S and R)."""
        return np.array(
            [0.0, self.beta_asymptomatic, self.beta_presymptomatic, self.beta_symptomatic, 0.0]
        )


def proximity_kernel(distance, duration, params: ContagionParams):
    """Distance/duration factor of the transmission probability.

    Accepts scalars or numpy arrays; monotone decreasing in distance,
    increasing in duration, and bounded in [0, 1).
    """
    return np.exp(-np.asarray(distance, dtype=float) / params.distance_scale) * (
        -np.expm1(-np.asarray(duration, dtype=float) / params.duration_scale)
    )


def delta(
    infector_state: HealthState,
    target_state: HealthState,
    distance: float,
    duration: float,
    params: ContagionParams,
) -> float:
    """Probability that one contact transmits the infection.

    Zero unless the target is susceptible and the infector is currently
    infectious; otherwise beta_class * kernel(distance, duration).
    """
    if distance < 0 or duration < 0:
        raise ValueError("contact distance and duration must be non-negative")
    if target_state != HealthState.SUSCEPTIBLE:
        return 0.0
    if infector_state not in INFECTIOUS_STATES:
        return 0.0
    beta = params.beta_by_state()[int(infector_state)]
    p = beta * math.exp(-distance / params.distance_scale) * (
        1.0 - math.exp(-duration / params.duration_scale)
    )
    return min(max(p, 0.0), 1.0)


@dataclass(frozen=True)
class Individual:
    """Read-only snapshot of one agent's disease bookkeeping."""

    id: int
    state: HealthState
    infection_day: int | None
    symptom_onset_day: int | None
    recovery_day: int | None
    asymptomatic_prob: float
    isolated: bool
    app_active_prob: float

    @property
    def incubation_days(self) -> int | None:
        if self.infection_day is None or self.symptom_onset_day is None:
            return None
        return self.symptom_onset_day - self.infection_day

    @property
    def recovery_days(self) -> int | None:
        if self.recovery_day is None:
            return None
        anchor = (
            self.symptom_onset_day
            if self.state == HealthState.SYMPTOMATIC and self.symptom_onset_day is not None
            else self.infection_day
        )
        return None if anchor is None else self.recovery_day - anchor


class PopulationLedger:
    """Array-backed partition of the population into the five classes.

    Tracks, per agent: disease state, infection day, (scheduled or actual)
    symptom onset day, recovery day, isolation flag, and the per-agent
    asymptomatic-course and app-usage probabilities.
    """

    def __init__(self, n: int, asymptomatic_prob: float = 0.0, app_active_prob: float = 1.0):
        if n < 1:
            raise ValueError("population must be at least 1")
        self.n = n
        self.day = 0
        self.state = np.full(n, HealthState.SUSCEPTIBLE, dtype=np.int8)
        self.infection_day = np.full(n, _UNSET, dtype=np.int32)
        self.symptom_onset_day = np.full(n, _UNSET, dtype=np.int32)
        self.recovery_day = np.full(n, _UNSET, dtype=np.int32)
        self.isolated = np.zeros(n, dtype=bool)
        self.asymptomatic_prob = np.full(n, asymptomatic_prob, dtype=float)
        self.app_active_prob = np.full(n, app_active_prob, dtype=float)
        # refreshed by contagion_step
        self.new_infections_today: np.ndarray = np.empty(0, dtype=np.int64)
        self.new_symptomatics_today: np.ndarray = np.empty(0, dtype=np.int64)

    # -- set views ---------------------------------------------------------

    def ids_in(self, state: HealthState) -> np.ndarray:
        return np.flatnonzero(self.state == state)

    @property
    def susceptible(self) -> set[int]:
        return set(self.ids_in(HealthState.SUSCEPTIBLE).tolist())

    @property
    def asymptomatic(self) -> set[int]:
        return set(self.ids_in(HealthState.ASYMPTOMATIC).tolist())

    @property
    def presymptomatic(self) -> set[int]:
        return set(self.ids_in(HealthState.PRESYMPTOMATIC).tolist())

    @property
    def symptomatic(self) -> set[int]:
        return set(self.ids_in(HealthState.SYMPTOMATIC).tolist())

    @property
    def recovered(self) -> set[int]:
        return set(self.ids_in(HealthState.RECOVERED).tolist())

    @property
    def isolated_ids(self) -> set[int]:
        return set(np.flatnonzero(self.isolated).tolist())

    def active_ids(self) -> np.ndarray:
        """Agents free to circulate (not isolated)."""
        return np.flatnonzero(~self.isolated)

    def counts(self) -> np.ndarray:
        """Class sizes indexed by HealthState code."""
        return np.bincount(self.state, minlength=5)

    def individual(self, agent_id: int) -> Individual:
        def opt(arr):
            v = int(arr[agent_id])
            return None if v == _UNSET else v

        return Individual(
            id=agent_id,
            state=HealthState(int(self.state[agent_id])),
            infection_day=opt(self.infection_day),
            symptom_onset_day=opt(self.symptom_onset_day),
            recovery_day=opt(self.recovery_day),
            asymptomatic_prob=float(self.asymptomatic_prob[agent_id]),
            isolated=bool(self.isolated[agent_id]),
            app_active_prob=float(self.app_active_prob[agent_id]),
        )

    # -- mutations ---------------------------------------------------------

    def seed_symptomatic(
        self, ids: Sequence[int], params: ContagionParams, rng: np.random.Generator, onset_day: int = 1
    ) -> None:
        """Place the initial symptomatic cases.

        They count as having contracted the disease before the run starts
        and manifest on `onset_day`, so the first day's policy sees them as
        newly symptomatic and they isolate at that day's end.
        """
        ids = np.asarray(sorted(ids), dtype=np.int64)
        if len(ids) and (self.state[ids] != HealthState.SUSCEPTIBLE).any():
            raise ValueError("initial symptomatic agents must start susceptible")
        lo, hi = params.recovery_days_range
        self.state[ids] = HealthState.SYMPTOMATIC
        self.infection_day[ids] = 0
        self.symptom_onset_day[ids] = onset_day
        self.recovery_day[ids] = onset_day + rng.integers(lo, hi + 1, size=len(ids))

    def isolate(self, ids: Iterable[int]) -> None:
        idx = np.asarray(sorted(set(ids)), dtype=np.int64)
        if len(idx):
            self.isolated[idx] = True

    def assert_conservation(self) -> None:
        counts = self.counts()
        if int(counts.sum()) != self.n:
            raise AssertionError(f"class sizes {counts.tolist()} do not sum to {self.n}")


def _contact_arrays(contacts) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(contacts, ContactSet):
        return contacts.u, contacts.v, contacts.distance, contacts.duration, contacts.days
    items: list[Contact] = list(contacts)
    u = np.array([c.u for c in items], dtype=np.int64)
    v = np.array([c.v for c in items], dtype=np.int64)
    l = np.array([c.distance for c in items], dtype=float)
    r = np.array([c.duration for c in items], dtype=float)
    t = np.array([c.day for c in items], dtype=np.int64)
    return u, v, l, r, t


def contagion_step(
    ledger: PopulationLedger,
    contacts,
    params: ContagionParams,
    rng: np.random.Generator,
) -> PopulationLedger:
    """Advance one day of disease dynamics over the day's contacts.

    Who is infectious is frozen at the start of the step (an agent
    infected today cannot transmit today).  One Bernoulli draw per contact
    decides transmission; new cases branch asymptomatic/presymptomatic and
    get their clocks sampled.  Then presymptomatics whose incubation ends
    today turn symptomatic (fresh recovery clock), and agents whose
    recovery clock ends today move to recovered.

    Mutates and returns `ledger`; refreshes `new_infections_today` and
    `new_symptomatics_today`.
    """
    day = ledger.day
    u, v, dist, dur, days = _contact_arrays(contacts)

    if len(u):
        if days.min() != day or days.max() != day:
            raise ValueError(f"contacts not dated at ledger day {day}")
        if u.min() < 0 or max(u.max(), v.max()) >= ledger.n:
            raise KeyError("contact endpoint outside the population")
        if ledger.isolated[u].any() or ledger.isolated[v].any():
            raise ValueError("isolated agents cannot appear in the day's contacts")

    state = ledger.state
    new_infected = np.empty(0, dtype=np.int64)

    if len(u):
        su = state[u]
        sv = state[v]
        beta = params.beta_by_state()
        infectious = np.isin(state, INFECTIOUS_STATES)
        u_is_target = (su == HealthState.SUSCEPTIBLE) & infectious[v]
        v_is_target = (sv == HealthState.SUSCEPTIBLE) & infectious[u]

        kern = proximity_kernel(dist, dur, params)
        prob = np.where(u_is_target, beta[sv] * kern, 0.0) + np.where(
            v_is_target, beta[su] * kern, 0.0
        )
        hit = rng.random(len(u)) < prob
        targets = np.where(u_is_target, u, v)[hit]
        new_infected = np.unique(targets)

    if len(new_infected):
        goes_asymptomatic = rng.random(len(new_infected)) < ledger.asymptomatic_prob[new_infected]
        rec_lo, rec_hi = params.recovery_days_range
        inc_lo, inc_hi = params.incubation_days_range
        recovery = rng.integers(rec_lo, rec_hi + 1, size=len(new_infected))
        incubation = rng.integers(inc_lo, inc_hi + 1, size=len(new_infected))

        ledger.infection_day[new_infected] = day
        asym = new_infected[goes_asymptomatic]
        presym = new_infected[~goes_asymptomatic]
        state[asym] = HealthState.ASYMPTOMATIC
        ledger.recovery_day[asym] = day + recovery[goes_asymptomatic]
        state[presym] = HealthState.PRESYMPTOMATIC
        ledger.symptom_onset_day[presym] = day + incubation[~goes_asymptomatic]

    # incubation ending today: presymptomatic -> symptomatic, fresh recovery clock
    onset = np.flatnonzero((state == HealthState.PRESYMPTOMATIC) & (ledger.symptom_onset_day == day))
    if len(onset):
        rec_lo, rec_hi = params.recovery_days_range
        state[onset] = HealthState.SYMPTOMATIC
        ledger.recovery_day[onset] = day + rng.integers(rec_lo, rec_hi + 1, size=len(onset))

    # recovery clocks ending today (asymptomatic or symptomatic -> recovered)
    recovering = np.flatnonzero(
        ((state == HealthState.ASYMPTOMATIC) | (state == HealthState.SYMPTOMATIC))
        & (ledger.recovery_day == day)
    )
    state[recovering] = HealthState.RECOVERED

    ledger.new_infections_today = new_infected
    # covers both true onsets and the seeded cases whose onset is scheduled today
    ledger.new_symptomatics_today = np.flatnonzero(
        (state == HealthState.SYMPTOMATIC) & (ledger.symptom_onset_day == day)
    )
    return ledger
