"""End-to-end daily simulation loop.

Order within each day is fixed: draw contacts among the non-isolated,
log them on the devices, evaluate contagion, hand the observable state to
the testing policy, swab, then isolate the day's positives and the newly
symptomatic at day end.  One metrics row per day goes to CSV with the
exact header `day,S,A,P,Y,R,isolated,new_infections,cum_infections,tests_used`;
trajectory-protocol diagnostics go to a side log, one line per day.

Runs are bit-reproducible: all randomness flows through named substreams
of the master seed, so re-running a config yields identical CSV bytes and
orthogonal knobs (e.g. iteration count) cannot disturb the epidemic path.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import SimConfig
from .contacts import ContactSet, build_graph, sample_day
from .devices import (
    DeviceStore,
    LogMirror,
    TokenRouter,
    assign_day_pseudonyms,
    prune_window,
    record_day_contacts,
    trajectory_seed_tokens,
)
from .epidemic import ContagionParams, HealthState, PopulationLedger, contagion_step, proximity_kernel
from .policies import PolicyDecision, SwabTest, policy_ts, policy_tsdc, run_test
from .rng import RngBundle
from .tracing import PrevalenceEstimate, run_daily_ppto_bulk

CSV_HEADER = "day,S,A,P,Y,R,isolated,new_infections,cum_infections,tests_used"

_PRUNE_EVERY = 14  # device-log pruning cadence (memory hygiene; readers filter by window anyway)


@dataclass(frozen=True)
class DayMetrics:
    day: int
    susceptible: int
    asymptomatic: int
    presymptomatic: int
    symptomatic: int
    recovered: int
    isolated: int
    new_infections: int
    cum_infections: int
    tests_used: int

    def to_csv_row(self) -> str:
        return (
            f"{self.day},{self.susceptible},{self.asymptomatic},{self.presymptomatic},"
            f"{self.symptomatic},{self.recovered},{self.isolated},{self.new_infections},"
            f"{self.cum_infections},{self.tests_used}"
        )


@dataclass
class SimulationResult:
    config: SimConfig
    metrics: list[DayMetrics]
    ledger: PopulationLedger
    log_lines: list[str]
    decisions: list[PolicyDecision]
    max_handled_per_iteration: int  # across all days; quiescence demands <= population

    @property
    def cumulative_infections(self) -> int:
        return self.metrics[-1].cum_infections if self.metrics else 0


def metrics_to_csv(metrics: list[DayMetrics]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for row in metrics:
        buf.write(row.to_csv_row() + "\n")
    return buf.getvalue()


def make_delta_hat(
    prevalence: PrevalenceEstimate, params: ContagionParams
) -> Callable[[object, object], object]:
    """Prevalence-weighted transmission probability for an unknown infector class."""
    beta_mix = (
        prevalence.p_asymptomatic * params.beta_asymptomatic
        + prevalence.p_presymptomatic * params.beta_presymptomatic
        + prevalence.p_symptomatic * params.beta_symptomatic
    )

    def transmission(distance, duration):
        return beta_mix * proximity_kernel(distance, duration, params)

    return transmission


def _prevalence(config: SimConfig, ledger: PopulationLedger, params: ContagionParams) -> PrevalenceEstimate:
    if config.prevalence_mode == "ground_truth":
        counts = ledger.counts()
        total = int(
            counts[HealthState.ASYMPTOMATIC]
            + counts[HealthState.PRESYMPTOMATIC]
            + counts[HealthState.SYMPTOMATIC]
        )
        if total > 0:
            return PrevalenceEstimate(
                counts[HealthState.ASYMPTOMATIC] / total,
                counts[HealthState.PRESYMPTOMATIC] / total,
                counts[HealthState.SYMPTOMATIC] / total,
            )
        return PrevalenceEstimate(1 / 3, 1 / 3, 1 / 3)
    # "reported": a fixed class-share prior from the published disease
    # parameters (expected time spent in each class), using no ground truth
    alpha = params.asymptomatic_fraction
    mean_rec = sum(params.recovery_days_range) / 2
    mean_inc = sum(params.incubation_days_range) / 2
    weights = (alpha * mean_rec, (1 - alpha) * mean_inc, (1 - alpha) * mean_rec)
    total = sum(weights)
    return PrevalenceEstimate(*(w / total for w in weights))


class _ContactHistory:
    """Ground-truth contact log for the baseline that traces direct contacts."""

    def __init__(self, window: int):
        self.window = window
        self.days: list[tuple[int, np.ndarray, np.ndarray]] = []

    def add(self, contacts: ContactSet) -> None:
        self.days.append((contacts.day, contacts.u.copy(), contacts.v.copy()))
        cutoff = contacts.day - self.window
        self.days = [entry for entry in self.days if entry[0] >= cutoff]

    def direct_contacts_of(self, agent: int) -> set[int]:
        out: set[int] = set()
        for _, u, v in self.days:
            out.update(v[u == agent].tolist())
            out.update(u[v == agent].tolist())
        return out


def run_simulation(
    config: SimConfig,
    csv_path: Optional[Path] = None,
    log_path: Optional[Path] = None,
) -> SimulationResult:
    """Execute the configured run; optionally write the CSV and the day log."""
    rngs = RngBundle(config.seed)
    params = config.contagion_params()
    n = config.population
    window = config.window_days

    graph = build_graph(
        n,
        config.mean_degree,
        config.heavy_pair_fraction,
        rngs.graph,
        heavy_weight=config.heavy_pair_weight,
        distance_dist=config.distance_dist(),
        duration_dist=config.duration_dist(),
    )

    ledger = PopulationLedger(
        n, asymptomatic_prob=config.asymptomatic_fraction, app_active_prob=config.app_usage
    )
    if config.initial_symptomatic:
        seeds = np.sort(rngs.disease.choice(n, size=config.initial_symptomatic, replace=False))
        ledger.seed_symptomatic(seeds.tolist(), params, rngs.disease, onset_day=1)

    stores = [DeviceStore(i) for i in range(n)]
    router = TokenRouter()
    mirror = LogMirror() if config.policy == "ppto" else None
    history = _ContactHistory(window) if config.policy == "tsdc" else None
    swab = SwabTest(config.test_sensitivity, config.test_specificity)
    reported_day = np.full(n, -1, dtype=np.int64)
    reported_day[ledger.symptom_onset_day == 1] = 1  # the seeded cases report on day 1

    metrics: list[DayMetrics] = []
    log_lines: list[str] = []
    decisions: list[PolicyDecision] = []
    cum_infections = 0
    prev_recovered = 0
    max_handled = 0

    for day in range(1, config.days + 1):
        ledger.day = day
        active = ledger.active_ids()

        contacts = sample_day(graph, day, active, rngs.contacts)
        record_day_contacts(contacts, stores, router, ledger.app_active_prob, rngs.devices, mirror)
        if history is not None:
            history.add(contacts)
        if day % _PRUNE_EVERY == 0:
            for store in stores:
                prune_window(store, day, window, router)
            if mirror is not None:
                mirror.prune(day, window)

        # membership in the infectious classes begins the day after contracting,
        # so swabs taken today are evaluated against the day-start state
        pre_test_state = ledger.state.copy()
        contagion_step(ledger, contacts, params, rngs.disease)
        ledger.assert_conservation()

        new_symptomatic = ledger.new_symptomatics_today
        fresh = new_symptomatic[reported_day[new_symptomatic] < 0]
        reported_day[fresh] = day

        eligible = set(ledger.active_ids().tolist())
        tested: set[int] = set()
        if config.tests_per_day > 0 and config.policy != "none":
            new_symptomatic_set = set(new_symptomatic.tolist())
            if config.policy == "ts":
                tested = policy_ts(new_symptomatic_set, eligible, config.tests_per_day, rngs.policy)
            elif config.policy == "tsdc":
                tested = policy_tsdc(
                    new_symptomatic_set,
                    history.direct_contacts_of,
                    eligible,
                    config.tests_per_day,
                    rngs.policy,
                )
            elif config.policy == "ppto":
                tested, diag_line, handled = _ppto_tests(
                    config, ledger, stores, mirror, reported_day, day, params, rngs, eligible
                )
                log_lines.append(diag_line)
                max_handled = max(max_handled, handled)

        positives: set[int] = set()
        for agent in sorted(tested):
            swab_view = replace(
                ledger.individual(agent), state=HealthState(int(pre_test_state[agent]))
            )
            if run_test(swab_view, swab, rngs.policy):
                positives.add(agent)
        newly_reported = [a for a in sorted(positives) if reported_day[a] < 0]
        reported_day[newly_reported] = day
        decision = PolicyDecision(day, frozenset(tested), frozenset(positives))
        decisions.append(decision)

        ledger.isolate(positives | set(new_symptomatic.tolist()))

        counts = ledger.counts()
        recovered = int(counts[HealthState.RECOVERED])
        if recovered < prev_recovered:
            raise AssertionError("recovered count decreased")
        prev_recovered = recovered
        cum_infections += len(ledger.new_infections_today)
        metrics.append(
            DayMetrics(
                day=day,
                susceptible=int(counts[HealthState.SUSCEPTIBLE]),
                asymptomatic=int(counts[HealthState.ASYMPTOMATIC]),
                presymptomatic=int(counts[HealthState.PRESYMPTOMATIC]),
                symptomatic=int(counts[HealthState.SYMPTOMATIC]),
                recovered=recovered,
                isolated=int(ledger.isolated.sum()),
                new_infections=len(ledger.new_infections_today),
                cum_infections=cum_infections,
                tests_used=len(decision.tested),
            )
        )

    result = SimulationResult(
        config=config,
        metrics=metrics,
        ledger=ledger,
        log_lines=log_lines,
        decisions=decisions,
        max_handled_per_iteration=max_handled,
    )
    if csv_path is not None:
        Path(csv_path).parent.mkdir(parents=True, exist_ok=True)
        Path(csv_path).write_text(metrics_to_csv(metrics), encoding="utf-8")
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        Path(log_path).write_text("\n".join(log_lines) + ("\n" if log_lines else ""), encoding="utf-8")
    return result


def _ppto_tests(
    config: SimConfig,
    ledger: PopulationLedger,
    stores: list[DeviceStore],
    mirror: LogMirror,
    reported_day: np.ndarray,
    day: int,
    params: ContagionParams,
    rngs: RngBundle,
    eligible: set[int],
) -> tuple[set[int], str, int]:
    """One day of the trajectory policy: protocol run, linkage, random fill."""
    window = config.window_days
    linkage = assign_day_pseudonyms(stores, rngs.devices)

    recent = np.flatnonzero((reported_day > day - window) & (reported_day >= 0) & (reported_day <= day))

    transmission = make_delta_hat(_prevalence(config, ledger, params), params)
    # every device reports anonymously; the authority cannot tell which of the
    # top scores belong to already-isolated positives, so those picks burn
    # budget that falls back to the random fill below
    result = run_daily_ppto_bulk(
        k=config.tests_per_day,
        iterations=config.trajectory_iterations,
        day=day,
        window=window,
        seed_devices=recent.tolist(),
        mirror=mirror,
        devices=stores,
        reporting=stores,
        transmission=transmission,
        rng=rngs.trajectory,
        weighting=config.backward_weighting,
        hop_budget=config.hop_budget_factor * config.population,
    )

    tested = {linkage[pseudonym] for pseudonym in result.selected} & eligible
    missing = config.tests_per_day - len(tested)
    if missing > 0:
        pool = sorted(eligible - tested)
        if pool:
            take = min(missing, len(pool))
            picked = rngs.policy.choice(len(pool), size=take, replace=False)
            tested.update(pool[i] for i in picked)
    return tested, result.diagnostics.format_line(day), result.diagnostics.max_handled_per_iteration
