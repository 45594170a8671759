"""Decentralized risk scoring via Monte-Carlo infection trajectories.

Once a day, starting from the devices of recently reported positives,
simulated infection paths are walked through the anonymized contact logs:
a request addressed to a token wakes the device that generated it, which
bumps its own risk score, guesses which earlier logged contact infected
it (one draw, weighted by each contact's transmission probability times
the probability that all earlier contacts failed to transmit), and
replays transmission coin-flips over its later logged contacts.  Every
hop emits requests for peer tokens only.  After N such iterations the
devices report (pseudonym, score) pairs and the K highest-scoring
pseudonyms are picked for testing.

This module deliberately sees nothing but device records, tokens, daily
pseudonyms, a transmission-probability callable, and aggregate iteration
parameters: no agent identities, no health states, no ground-truth
contact data.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np

from .devices import DeviceStore, LogMirror, TokenRouter

# (distance, duration) -> probability a single contact transmitted.
# May be vectorized over numpy arrays or plain scalar.
TransmissionProb = Callable[[object, object], object]


@dataclass(frozen=True)
class TrajectoryRequest:
    """Token-addressed wake-up: carries the iteration index and nothing else."""

    iteration: int
    token: int


@dataclass(frozen=True)
class InfectionScore:
    """Anonymous daily report: reporting pseudonym and trajectory-hit count."""

    pseudonym: int
    score: int


@dataclass(frozen=True)
class PrevalenceEstimate:
    """Published daily aggregate: class shares among the currently infected."""

    p_asymptomatic: float
    p_presymptomatic: float
    p_symptomatic: float

    def __post_init__(self):
        probs = (self.p_asymptomatic, self.p_presymptomatic, self.p_symptomatic)
        if any(p < 0 or p > 1 for p in probs):
            raise ValueError("prevalence shares must be probabilities")
        if abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("prevalence shares must sum to 1")


class MessageBus:
    """FIFO request queue with delivery counters."""

    def __init__(self):
        self.queue: deque[TrajectoryRequest] = deque()
        self.enqueued = 0
        self.handled = 0
        self.duplicates = 0
        self.unmatched = 0

    def __len__(self) -> int:
        return len(self.queue)

    def send(self, request: TrajectoryRequest) -> None:
        self.queue.append(request)
        self.enqueued += 1

    def pop(self) -> TrajectoryRequest:
        return self.queue.popleft()


@dataclass
class PptoDiagnostics:
    """Per-day protocol counters (one log line per day)."""

    iterations: int = 0
    seeds_skipped: int = 0
    requests_enqueued: int = 0
    handled: int = 0
    duplicates: int = 0
    unmatched: int = 0
    max_handled_per_iteration: int = 0
    max_processed_per_iteration: int = 0
    devices_touched: int = 0
    score_histogram: list[int] = field(default_factory=list)

    def format_line(self, day: int) -> str:
        hist = ",".join(str(c) for c in self.score_histogram)
        return (
            f"day={day} iterations={self.iterations} requests={self.requests_enqueued} "
            f"handled={self.handled} duplicates={self.duplicates} unmatched={self.unmatched} "
            f"max_handled_per_iter={self.max_handled_per_iteration} "
            f"devices_touched={self.devices_touched} skipped_seeds={self.seeds_skipped} "
            f"score_hist=[{hist}]"
        )


@dataclass
class PptoDayResult:
    scores: list[InfectionScore]
    ranked: list[InfectionScore]
    selected: list[int]
    shortfall: int
    diagnostics: PptoDiagnostics


class _WindowView:
    """A device log restricted to the lookback window, sorted by day.

    Caches per-record transmission probabilities and the running product
    of their complements (the "not infected earlier" factor), so repeated
    wake-ups of one device within a day cost one array scan each.
    """

    __slots__ = ("records", "days", "probs", "not_earlier")

    def __init__(self, store: DeviceStore, day: int, window: int, transmission: TransmissionProb):
        recs = store.window_records(day, window)
        recs.sort(key=lambda rec: rec.day)  # stable: same-day ties keep insertion order
        self.records = recs
        self.days = np.array([rec.day for rec in recs], dtype=np.int64)
        self.probs = _evaluate_transmission(transmission, recs)
        # not_earlier[i] = prod_{k < i} (1 - probs[k])
        self.not_earlier = np.concatenate([[1.0], np.cumprod(1.0 - self.probs)])[:-1]


def _evaluate_transmission(transmission: TransmissionProb, recs) -> np.ndarray:
    if not recs:
        return np.empty(0, dtype=float)
    dist = np.array([rec.distance for rec in recs], dtype=float)
    dur = np.array([rec.duration for rec in recs], dtype=float)
    try:
        vals = np.asarray(transmission(dist, dur), dtype=float)
        if vals.shape != dist.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(transmission(d, r)) for d, r in zip(dist, dur)], dtype=float)
    if (vals < 0).any() or (vals > 1).any():
        raise ValueError("transmission probabilities must lie in [0, 1]")
    return vals


def _view(
    store: DeviceStore,
    day: int,
    window: int,
    transmission: TransmissionProb,
    cache: Optional[dict],
) -> _WindowView:
    if cache is None:
        return _WindowView(store, day, window, transmission)
    view = cache.get(id(store))
    if view is None:
        view = _WindowView(store, day, window, transmission)
        cache[id(store)] = view
    return view


def backward_trajectory(
    store: DeviceStore,
    t_prime: int,
    iteration: int,
    day: int,
    window: int,
    transmission: TransmissionProb,
    bus: MessageBus,
    rng: np.random.Generator,
    cache: Optional[dict] = None,
    weighting: str = "sequential",
) -> Optional[int]:
    """Guess the contact that infected this device before `t_prime`.

    Candidates are the window records strictly before `t_prime`.  Each
    gets weight p(contact transmitted) times, in the default sequential
    weighting, the probability that every earlier candidate failed to
    transmit.  One candidate is drawn and a request for its peer token is
    enqueued; returns that token, or None when there is no candidate or
    all weights vanish.
    """
    view = _view(store, day, window, transmission, cache)
    nb = int(np.searchsorted(view.days, t_prime, side="left"))  # records with day <= t_prime - 1
    if nb == 0:
        return None
    if weighting == "sequential":
        weights = view.not_earlier[:nb] * view.probs[:nb]
    elif weighting == "flat":
        weights = view.probs[:nb].copy()
    else:
        raise ValueError(f"unknown backward weighting {weighting!r}")
    total = float(weights.sum())
    if total <= 0.0:
        return None
    cumulative = np.cumsum(weights)
    chosen = int(np.searchsorted(cumulative, rng.random() * total, side="right"))
    chosen = min(chosen, nb - 1)
    token = view.records[chosen].peer_token
    bus.send(TrajectoryRequest(iteration, token))
    return token


def forward_trajectory(
    store: DeviceStore,
    t_prime: int,
    iteration: int,
    day: int,
    window: int,
    transmission: TransmissionProb,
    bus: MessageBus,
    rng: np.random.Generator,
    cache: Optional[dict] = None,
) -> list[int]:
    """Replay transmission over the window records after `t_prime`.

    An independent coin-flip per record; each success enqueues a request
    for that record's peer token.  Returns the tokens requested.
    """
    view = _view(store, day, window, transmission, cache)
    start = int(np.searchsorted(view.days, t_prime, side="right"))  # records with day >= t_prime + 1
    if start >= len(view.records):
        return []
    hits = rng.random(len(view.records) - start) < view.probs[start:]
    tokens = [view.records[start + k].peer_token for k in np.flatnonzero(hits)]
    for token in tokens:
        bus.send(TrajectoryRequest(iteration, token))
    return tokens


def handle_request(
    store: DeviceStore,
    request: TrajectoryRequest,
    day: int,
    window: int,
    transmission: TransmissionProb,
    bus: MessageBus,
    rng: np.random.Generator,
    cache: Optional[dict] = None,
    weighting: str = "sequential",
) -> bool:
    """Device reaction to a request for one of its own tokens.

    Idempotent per iteration: if this iteration's flag is already raised
    the request is dropped.  Otherwise the score is bumped, the flag
    raised, and the trajectory continues backward and forward from the
    day of the record that owns the token.  Returns whether the request
    was handled (False = duplicate).
    """
    record = store.own_tokens.get(request.token)
    if record is None:
        raise LookupError("request delivered to a device that does not own the token")
    if request.iteration in store.iteration_flags:
        return False
    store.score += 1
    store.iteration_flags.add(request.iteration)
    t_prime = record.day
    backward_trajectory(
        store, t_prime, request.iteration, day, window, transmission, bus, rng, cache, weighting
    )
    forward_trajectory(store, t_prime, request.iteration, day, window, transmission, bus, rng, cache)
    return True


def select_top_k(
    scores: Sequence[InfectionScore],
    k: int,
    rng: np.random.Generator,
) -> tuple[list[int], int]:
    """Pseudonyms of the K highest positive scores.

    Boundary ties are broken uniformly at random (seeded).  Zero scores
    are never selected; the returned shortfall is how many of the K slots
    stayed unfilled.
    """
    if k < 0:
        raise ValueError("selection budget must be non-negative")
    positive = [s for s in scores if s.score > 0]
    if len(positive) <= k:
        return [s.pseudonym for s in positive], k - len(positive)
    tiebreak = rng.random(len(positive))
    order = sorted(range(len(positive)), key=lambda i: (-positive[i].score, tiebreak[i]))
    return [positive[i].pseudonym for i in order[:k]], 0


def rank_scores(scores: Sequence[InfectionScore], rng: np.random.Generator) -> list[InfectionScore]:
    """All positive scores, highest first, ties in seeded random order."""
    positive = [s for s in scores if s.score > 0]
    tiebreak = rng.random(len(positive))
    order = sorted(range(len(positive)), key=lambda i: (-positive[i].score, tiebreak[i]))
    return [positive[i] for i in order]


def run_daily_ppto(
    k: int,
    iterations: int,
    day: int,
    window: int,
    seed_token_sets: Sequence[Sequence[int]],
    devices: Sequence[DeviceStore],
    reporting: Sequence[DeviceStore],
    transmission: TransmissionProb,
    router: TokenRouter,
    rng: np.random.Generator,
    bus: Optional[MessageBus] = None,
    weighting: str = "sequential",
    hop_budget: Optional[int] = None,
) -> PptoDayResult:
    """One day of the trajectory protocol.

    `seed_token_sets` holds, per recently reported positive, the peer
    tokens of that device's window records (no identities).  Each of the
    N iterations picks one positive uniformly, one of its tokens
    uniformly, and injects a request; the bus is drained to quiescence
    before the next iteration starts.  Scores and flags of all devices
    are reset up front.  Reporting devices then publish (pseudonym,
    score) and the K best positive scores are selected.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    if hop_budget is None:
        hop_budget = 10 * max(len(devices), 1)
    if bus is None:
        bus = MessageBus()

    for store in devices:
        store.reset_protocol_state()

    diag = PptoDiagnostics()
    usable = [list(tokens) for tokens in seed_token_sets if len(tokens) > 0]
    diag.seeds_skipped = len(seed_token_sets) - len(usable)

    touched: set[int] = set()
    cache: dict = {}
    if usable:
        for n in range(1, iterations + 1):
            seed_set = usable[int(rng.integers(0, len(usable)))]
            token = seed_set[int(rng.integers(0, len(seed_set)))]
            bus.send(TrajectoryRequest(n, token))
            handled_here = 0
            processed_here = 0
            while bus.queue:
                request = bus.pop()
                processed_here += 1
                if processed_here > hop_budget:
                    raise RuntimeError(
                        f"hop budget {hop_budget} exhausted in iteration {n}: protocol bug"
                    )
                store = router.lookup(request.token)
                if store is None:
                    bus.unmatched += 1
                    continue
                if handle_request(
                    store, request, day, window, transmission, bus, rng, cache, weighting
                ):
                    bus.handled += 1
                    handled_here += 1
                    touched.add(id(store))
                else:
                    bus.duplicates += 1
            diag.iterations = n
            diag.max_handled_per_iteration = max(diag.max_handled_per_iteration, handled_here)
            diag.max_processed_per_iteration = max(diag.max_processed_per_iteration, processed_here)

    diag.requests_enqueued = bus.enqueued
    diag.handled = bus.handled
    diag.duplicates = bus.duplicates
    diag.unmatched = bus.unmatched
    diag.devices_touched = len(touched)

    scores = []
    for store in reporting:
        if store.day_pseudonym is None:
            raise ValueError("reporting device has no daily pseudonym assigned")
        scores.append(InfectionScore(store.day_pseudonym, store.score))
    if scores:
        max_score = max(s.score for s in scores)
        hist = [0] * (max_score + 1)
        for s in scores:
            hist[s.score] += 1
        diag.score_histogram = hist

    if k < 0:
        raise ValueError("selection budget must be non-negative")
    ranked = rank_scores(scores, rng)
    selected = [s.pseudonym for s in ranked[:k]]
    shortfall = max(0, k - len(ranked))
    return PptoDayResult(
        scores=scores, ranked=ranked, selected=selected, shortfall=shortfall, diagnostics=diag
    )


# -- bulk engine --------------------------------------------------------------
#
# The functions above define the protocol semantics request by request.
# Daily runs over ten thousand devices walk the same logs hundreds of
# thousands of times, so the simulation harness uses this compiled engine:
# the union of device logs in columnar form (LogMirror), the same backward
# weighting and forward coin-flips, and a per-iteration flag guard.  Rows
# address records directly, which carries exactly the information a token
# carries: which record on which device.


@numba.njit(cache=True)
def _cascade(
    iterations,
    usable_rows_start,
    usable_rows_end,
    rec_day,
    rec_prob,
    rec_peer,
    dev_start,
    window_lo,
    sequential,
    hop_budget,
    seed_value,
):
    np.random.seed(seed_value)
    n_dev = len(dev_start) - 1
    n_rec = len(rec_day)
    scores = np.zeros(n_dev, dtype=np.int64)
    flags = np.full(n_dev, -1, dtype=np.int64)
    gamma_cum = np.zeros(n_rec, dtype=np.float64)
    gamma_lo = np.full(n_dev, -1, dtype=np.int64)  # in-window start once weights are built
    queue = np.empty(4 * hop_budget + 16, dtype=np.int64)

    handled_total = 0
    duplicates = 0
    enqueued = 0
    max_handled = 0
    max_processed = 0
    budget_hit = False
    n_usable = len(usable_rows_start)

    for n in range(iterations):
        qi = int(np.random.random() * n_usable)
        if qi >= n_usable:
            qi = n_usable - 1
        lo = usable_rows_start[qi]
        hi = usable_rows_end[qi]
        pick = lo + int(np.random.random() * (hi - lo))
        if pick >= hi:
            pick = hi - 1
        queue[0] = rec_peer[pick]
        head = 0
        tail = 1
        enqueued += 1
        handled_here = 0
        processed = 0
        while head < tail:
            row = queue[head]
            head += 1
            processed += 1
            if processed > hop_budget:
                budget_hit = True
                break
            dev = 0
            # owning device of the row via CSR search
            left = 0
            right = n_dev
            while left < right:
                mid = (left + right) // 2
                if dev_start[mid + 1] <= row:
                    left = mid + 1
                else:
                    right = mid
            dev = left
            if flags[dev] == n:
                duplicates += 1
                continue
            flags[dev] = n
            scores[dev] += 1
            handled_here += 1
            anchor = rec_day[row]
            ds = dev_start[dev]
            de = dev_start[dev + 1]
            # in-window start of this device's slice
            lb = ds
            right = de
            while lb < right:
                mid = (lb + right) // 2
                if rec_day[mid] < window_lo:
                    lb = mid + 1
                else:
                    right = mid
            # first record at or after the anchor day
            nb = lb
            right = de
            while nb < right:
                mid = (nb + right) // 2
                if rec_day[mid] < anchor:
                    nb = mid + 1
                else:
                    right = mid
            if nb > lb:
                if gamma_lo[dev] != lb:
                    # build this device's cumulative backward weights for the day
                    acc = 0.0
                    survive = 1.0
                    for i in range(lb, de):
                        if sequential:
                            acc += survive * rec_prob[i]
                            survive *= 1.0 - rec_prob[i]
                        else:
                            acc += rec_prob[i]
                        gamma_cum[i] = acc
                    gamma_lo[dev] = lb
                total = gamma_cum[nb - 1]
                if total > 0.0:
                    x = np.random.random() * total
                    left = lb
                    right = nb - 1
                    while left < right:
                        mid = (left + right) // 2
                        if gamma_cum[mid] <= x:
                            left = mid + 1
                        else:
                            right = mid
                    if tail < len(queue):
                        queue[tail] = rec_peer[left]
                        tail += 1
                        enqueued += 1
                    else:
                        budget_hit = True
                        break
            # forward: first record strictly after the anchor day
            fs = lb
            right = de
            while fs < right:
                mid = (fs + right) // 2
                if rec_day[mid] <= anchor:
                    fs = mid + 1
                else:
                    right = mid
            for i in range(fs, de):
                if np.random.random() < rec_prob[i]:
                    if tail < len(queue):
                        queue[tail] = rec_peer[i]
                        tail += 1
                        enqueued += 1
                    else:
                        budget_hit = True
                        break
            if budget_hit:
                break
        handled_total += handled_here
        if handled_here > max_handled:
            max_handled = handled_here
        if processed > max_processed:
            max_processed = processed
        if budget_hit:
            break
    return scores, handled_total, duplicates, enqueued, max_handled, max_processed, budget_hit


def run_daily_ppto_bulk(
    k: int,
    iterations: int,
    day: int,
    window: int,
    seed_devices: Sequence[int],
    mirror: LogMirror,
    devices: Sequence[DeviceStore],
    reporting: Sequence[DeviceStore],
    transmission: TransmissionProb,
    rng: np.random.Generator,
    weighting: str = "sequential",
    hop_budget: Optional[int] = None,
) -> PptoDayResult:
    """One day of the protocol on the columnar log union.

    Observably equivalent to `run_daily_ppto`: each of the N iterations
    starts from a uniformly chosen recent positive and one of its window
    records chosen uniformly (the record's mirror row stands in for the
    peer token), then runs the same flag-guarded backward/forward walk.
    Randomness is driven by one seed drawn from `rng` per call.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    if k < 0:
        raise ValueError("selection budget must be non-negative")
    if weighting not in ("sequential", "flat"):
        raise ValueError(f"unknown backward weighting {weighting!r}")
    if hop_budget is None:
        hop_budget = 10 * max(len(devices), 1)

    for store in devices:
        store.reset_protocol_state()

    diag = PptoDiagnostics()
    n_dev = len(devices)

    # columnar day state: records CSR-grouped by owning device, day-ordered
    order = np.argsort(mirror.device, kind="stable")
    rec_day = mirror.day[order].astype(np.int64)
    rec_prob = _evaluate_transmission_arrays(transmission, mirror.distance[order], mirror.duration[order])
    inverse = np.empty(len(order), dtype=np.int64)
    inverse[order] = np.arange(len(order), dtype=np.int64)
    rec_peer = inverse[mirror.peer_row[order]]
    devices_sorted = mirror.device[order]
    dev_start = np.searchsorted(devices_sorted, np.arange(n_dev + 1), side="left").astype(np.int64)

    window_lo = day - window
    starts = []
    ends = []
    for q in seed_devices:
        ds, de = int(dev_start[q]), int(dev_start[q + 1])
        lb = ds + int(np.searchsorted(rec_day[ds:de], window_lo, side="left"))
        if lb < de:
            starts.append(lb)
            ends.append(de)
        else:
            diag.seeds_skipped += 1

    touched = 0
    if starts:
        seed_value = int(rng.integers(0, 2**31 - 1))
        scores_arr, handled, dups, enqueued, max_handled, max_processed, budget_hit = _cascade(
            iterations,
            np.asarray(starts, dtype=np.int64),
            np.asarray(ends, dtype=np.int64),
            rec_day,
            rec_prob,
            rec_peer,
            dev_start,
            window_lo,
            weighting == "sequential",
            hop_budget,
            seed_value,
        )
        if budget_hit:
            raise RuntimeError(f"hop budget {hop_budget} exhausted: protocol bug")
        for pos, store in enumerate(devices):
            store.score = int(scores_arr[pos])
        diag.iterations = iterations
        diag.requests_enqueued = enqueued
        diag.handled = handled
        diag.duplicates = dups
        diag.max_handled_per_iteration = int(max_handled)
        diag.max_processed_per_iteration = int(max_processed)
        touched = int((scores_arr > 0).sum())
    diag.devices_touched = touched

    scores = []
    for store in reporting:
        if store.day_pseudonym is None:
            raise ValueError("reporting device has no daily pseudonym assigned")
        scores.append(InfectionScore(store.day_pseudonym, store.score))
    if scores:
        max_score = max(s.score for s in scores)
        hist = [0] * (max_score + 1)
        for s in scores:
            hist[s.score] += 1
        diag.score_histogram = hist

    ranked = rank_scores(scores, rng)
    selected = [s.pseudonym for s in ranked[:k]]
    shortfall = max(0, k - len(ranked))
    return PptoDayResult(
        scores=scores, ranked=ranked, selected=selected, shortfall=shortfall, diagnostics=diag
    )


def _evaluate_transmission_arrays(
    transmission: TransmissionProb, dist: np.ndarray, dur: np.ndarray
) -> np.ndarray:
    if len(dist) == 0:
        return np.empty(0, dtype=float)
    try:
        vals = np.asarray(transmission(dist, dur), dtype=float)
        if vals.shape != dist.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(transmission(d, r)) for d, r in zip(dist, dur)], dtype=float)
    if (vals < 0).any() or (vals > 1).any():
        raise ValueError("transmission probabilities must lie in [0, 1]")
    return vals
