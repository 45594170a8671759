"""Random daily contact generation from a two-tier pairwise weight structure.

Each unordered pair (u, v) has a probability w of meeting on any given day.
A configurable fraction of the population is joined into high-weight
"household" pairs (recurrent, near-daily encounters); every other pair
shares one low uniform background weight (sporadic encounters), chosen so
the population-mean expected daily contact count hits the configured
target.  Weights are fixed at build time.

Contact distances and durations are drawn from truncated exponential
distributions.  Sampling a day is pure given the graph and the generator
state, and materializes each undirected contact exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class Contact(NamedTuple):
    """One undirected contact event (u < v)."""

    u: int
    v: int
    day: int
    distance: float  # meters
    duration: float  # minutes


@dataclass(frozen=True)
class TruncatedExponential:
    """Exponential with the given scale, truncated to (0, upper]."""

    scale: float
    upper: float

    def __post_init__(self):
        if self.scale <= 0 or self.upper <= 0:
            raise ValueError("scale and upper bound must be positive")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # complement of the uniform keeps the support away from zero
        u = 1.0 - rng.random(size)
        mass = -np.expm1(-self.upper / self.scale)
        return -self.scale * np.log1p(-u * mass)


DEFAULT_DISTANCE = TruncatedExponential(scale=1.5, upper=5.0)
DEFAULT_DURATION = TruncatedExponential(scale=15.0, upper=120.0)


class ContactSet:
    """A day's contacts, column-oriented; iterates as `Contact` tuples."""

    def __init__(self, day: int, u: np.ndarray, v: np.ndarray, distance: np.ndarray, duration: np.ndarray):
        self.day = int(day)
        self.u = np.asarray(u, dtype=np.int64)
        self.v = np.asarray(v, dtype=np.int64)
        self.distance = np.asarray(distance, dtype=float)
        self.duration = np.asarray(duration, dtype=float)

    @property
    def days(self) -> np.ndarray:
        return np.full(len(self.u), self.day, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.u)

    def __iter__(self) -> Iterator[Contact]:
        for i in range(len(self.u)):
            yield Contact(
                int(self.u[i]), int(self.v[i]), self.day, float(self.distance[i]), float(self.duration[i])
            )

    @classmethod
    def from_contacts(cls, day: int, contacts: Iterable[Contact]) -> "ContactSet":
        items = sorted(contacts)
        return cls(
            day,
            np.array([c.u for c in items], dtype=np.int64),
            np.array([c.v for c in items], dtype=np.int64),
            np.array([c.distance for c in items], dtype=float),
            np.array([c.duration for c in items], dtype=float),
        )


class ContactGraph:
    """Pairwise daily-contact probabilities: explicit edges on a uniform background."""

    def __init__(
        self,
        n: int,
        edges: Sequence[tuple[int, int, float]],
        background_weight: float,
        distance_dist: TruncatedExponential = DEFAULT_DISTANCE,
        duration_dist: TruncatedExponential = DEFAULT_DURATION,
    ):
        if n < 2:
            raise ValueError("need at least two individuals")
        if not 0.0 <= background_weight <= 1.0:
            raise ValueError("background weight must be a probability")
        self.n = n
        self.background_weight = float(background_weight)
        self.distance_dist = distance_dist
        self.duration_dist = duration_dist

        canon: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            if u == v:
                raise ValueError("self-contact edge")
            if not 0 <= u < n and 0 <= v < n:
                raise ValueError("edge endpoint outside population")
            if not 0.0 <= w <= 1.0:
                raise ValueError("edge weight must be a probability")
            key = (u, v) if u < v else (v, u)
            if key in canon and canon[key] != w:
                raise ValueError(f"conflicting weights for pair {key}")
            canon[key] = float(w)
        pairs = sorted(canon)
        self.edge_u = np.array([p[0] for p in pairs], dtype=np.int64)
        self.edge_v = np.array([p[1] for p in pairs], dtype=np.int64)
        self.edge_w = np.array([canon[p] for p in pairs], dtype=float)
        self._edge_index = {p: i for i, p in enumerate(pairs)}

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int, float]], **kwargs) -> "ContactGraph":
        return cls(n, edges, background_weight=kwargs.pop("background_weight", 0.0), **kwargs)

    def weight(self, u: int, v: int) -> float:
        if u == v:
            return 0.0
        key = (u, v) if u < v else (v, u)
        i = self._edge_index.get(key)
        return float(self.edge_w[i]) if i is not None else self.background_weight

    def expected_degree(self, u: int) -> float:
        on_edges = (self.edge_u == u) | (self.edge_v == u)
        explicit = float(self.edge_w[on_edges].sum())
        return explicit + self.background_weight * (self.n - 1 - int(on_edges.sum()))

    def mean_expected_degree(self) -> float:
        total_pairs = self.n * (self.n - 1) // 2
        background_pairs = total_pairs - len(self.edge_w)
        total = float(self.edge_w.sum()) + self.background_weight * background_pairs
        return 2.0 * total / self.n


def build_graph(
    n: int,
    mean_degree: float,
    heavy_pair_fraction: float,
    rng: np.random.Generator,
    heavy_weight: float = 0.9,
    distance_dist: TruncatedExponential = DEFAULT_DISTANCE,
    duration_dist: TruncatedExponential = DEFAULT_DURATION,
) -> ContactGraph:
    """Build the two-tier graph with population-mean daily degree `mean_degree`.

    `heavy_pair_fraction` of the population (rounded down to whole pairs)
    is joined into disjoint high-weight pairs; the remaining weight budget
    is spread uniformly over every other pair.
    """
    if n < 2:
        raise ValueError("need at least two individuals")
    if mean_degree <= 0:
        raise ValueError("mean degree must be positive")
    if mean_degree >= n:
        raise ValueError("mean degree cannot reach the population size")
    if not 0.0 <= heavy_pair_fraction <= 1.0:
        raise ValueError("heavy pair fraction must be in [0, 1]")
    if not 0.0 < heavy_weight <= 1.0:
        raise ValueError("heavy weight must be in (0, 1]")

    budget = n * mean_degree / 2.0  # target sum of all pair weights
    m = int(heavy_pair_fraction * n / 2.0)
    matched = rng.permutation(n)[: 2 * m]
    total_pairs = n * (n - 1) // 2
    background_pairs = total_pairs - m

    w_heavy = min(heavy_weight, budget / m) if m else 0.0
    if background_pairs:
        w_bg = (budget - m * w_heavy) / background_pairs
    else:
        # complete matching with no room left: the pairs carry everything
        w_heavy = min(1.0, budget / m)
        w_bg = 0.0
    if w_bg > 1.0:
        raise ValueError("mean degree too large for the pair budget")

    edges = [
        (int(matched[2 * i]), int(matched[2 * i + 1]), w_heavy)
        for i in range(m)
    ]
    return ContactGraph(
        n,
        edges,
        background_weight=w_bg,
        distance_dist=distance_dist,
        duration_dist=duration_dist,
    )


def _pair_offsets(a: int) -> int:
    return a * (a - 1) // 2


def _linear_to_pair(idx: np.ndarray, a: int) -> tuple[np.ndarray, np.ndarray]:
    """Invert row-major upper-triangle enumeration of pairs of range(a)."""
    idx = idx.astype(np.int64)
    b = 2 * a - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2.0).astype(np.int64)
    # one-step correction for float rounding at the row boundaries
    offset = i * a - i * (i + 1) // 2
    too_far = offset > idx
    i = np.where(too_far, i - 1, i)
    offset = i * a - i * (i + 1) // 2
    next_off = (i + 1) * a - (i + 1) * (i + 2) // 2
    overshoot = idx >= next_off
    i = np.where(overshoot, i + 1, i)
    offset = i * a - i * (i + 1) // 2
    j = idx - offset + i + 1
    return i, j


def sample_day(
    graph: ContactGraph,
    day: int,
    active: Iterable[int],
    rng: np.random.Generator,
) -> ContactSet:
    """Draw one day's contacts among the non-isolated agents.

    Every pair with both endpoints active is included independently with
    its weight; distances and durations are drawn from the graph's
    distributions.  Output is sorted by (u, v).
    """
    active_arr = np.asarray(sorted(set(active)), dtype=np.int64)
    if len(active_arr) and (active_arr[0] < 0 or active_arr[-1] >= graph.n):
        raise ValueError("active ids outside population")
    a = len(active_arr)
    if a < 2:
        return ContactSet(day, np.empty(0, np.int64), np.empty(0, np.int64), np.empty(0), np.empty(0))

    active_mask = np.zeros(graph.n, dtype=bool)
    active_mask[active_arr] = True

    # explicit (heavy) pairs
    live = active_mask[graph.edge_u] & active_mask[graph.edge_v]
    live_idx = np.flatnonzero(live)
    hit = rng.random(len(live_idx)) < graph.edge_w[live_idx]
    eu = graph.edge_u[live_idx[hit]]
    ev = graph.edge_v[live_idx[hit]]

    # uniform background over all other active pairs
    bu = np.empty(0, dtype=np.int64)
    bv = np.empty(0, dtype=np.int64)
    if graph.background_weight > 0.0:
        # positions of active agents in the sorted active list
        pos = np.full(graph.n, -1, dtype=np.int64)
        pos[active_arr] = np.arange(a)
        li = pos[graph.edge_u[live_idx]]
        lj = pos[graph.edge_v[live_idx]]
        lo = np.minimum(li, lj)
        hi = np.maximum(li, lj)
        heavy_linear = set((lo * a - lo * (lo + 1) // 2 + (hi - lo - 1)).tolist())

        m_pairs = _pair_offsets(a) - len(heavy_linear)
        k = int(rng.binomial(m_pairs, graph.background_weight)) if m_pairs > 0 else 0
        chosen: list[int] = []
        seen: set[int] = set(heavy_linear)
        while len(chosen) < k:
            batch = rng.integers(0, _pair_offsets(a), size=max(16, 2 * (k - len(chosen))))
            for idx in batch.tolist():
                if idx not in seen:
                    seen.add(idx)
                    chosen.append(idx)
                    if len(chosen) == k:
                        break
        if chosen:
            ci, cj = _linear_to_pair(np.array(chosen, dtype=np.int64), a)
            bu = active_arr[ci]
            bv = active_arr[cj]

    u = np.concatenate([eu, bu])
    v = np.concatenate([ev, bv])
    order = np.lexsort((v, u))
    u, v = u[order], v[order]
    distance = graph.distance_dist.sample(rng, len(u))
    duration = graph.duration_dist.sample(rng, len(u))
    return ContactSet(day, u, v, distance, duration)


# -- serialization -----------------------------------------------------------

EDGELIST_HEADER = "# epitrace contact graph v1"


def save_edgelist(graph: ContactGraph, path) -> None:
    """Write the graph to a text file: metadata comments, then `u v w` lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(EDGELIST_HEADER + "\n")
        fh.write(f"# n={graph.n} background={graph.background_weight!r}\n")
        fh.write(
            f"# distance scale={graph.distance_dist.scale!r} upper={graph.distance_dist.upper!r}\n"
        )
        fh.write(
            f"# duration scale={graph.duration_dist.scale!r} upper={graph.duration_dist.upper!r}\n"
        )
        for u, v, w in zip(graph.edge_u, graph.edge_v, graph.edge_w):
            fh.write(f"{int(u)} {int(v)} {float(w)!r}\n")


def load_edgelist(path) -> ContactGraph:
    meta: dict[str, float] = {}
    edges: list[tuple[int, int, float]] = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != EDGELIST_HEADER:
            raise ValueError(f"not a contact graph file: {path}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                tokens = line[1:].split()
                prefix = tokens[0] + "." if "=" not in tokens[0] else ""
                for field in tokens:
                    if "=" in field:
                        key, val = field.split("=", 1)
                        meta[prefix + key] = float(val)
                continue
            u, v, w = line.split()
            edges.append((int(u), int(v), float(w)))
    return ContactGraph(
        int(meta["n"]),
        edges,
        background_weight=meta["background"],
        distance_dist=TruncatedExponential(meta["distance.scale"], meta["distance.upper"]),
        duration_dist=TruncatedExponential(meta["duration.scale"], meta["duration.upper"]),
    )
