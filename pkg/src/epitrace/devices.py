"""Per-agent contact-log devices and the token-addressed delivery fabric.

Every recorded contact mints two fresh random 128-bit tokens, one per
side; each device appends a mirrored record (day, own token, peer token,
distance, duration).  The router stands in for broadcast delivery: a
request addressed to a token reaches exactly the device that generated
it, and nothing else ever learns who that is.  The owning agent id is
kept on the store as simulator-side bookkeeping only (`_sim_owner`) and
must never be read by the trajectory protocol.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .contacts import Contact, ContactSet

TOKEN_BYTES = 16


class DeviceRecord(NamedTuple):
    """One logged contact as seen from the owning device."""

    day: int
    own_token: int
    peer_token: int
    distance: float
    duration: float


class DeviceStore:
    """Append-only anonymized contact log of one device, plus protocol state."""

    __slots__ = ("_sim_owner", "records", "own_tokens", "iteration_flags", "score", "day_pseudonym")

    def __init__(self, owner: int):
        self._sim_owner = owner
        self.records: list[DeviceRecord] = []
        self.own_tokens: dict[int, DeviceRecord] = {}
        self.iteration_flags: set[int] = set()
        self.score = 0
        self.day_pseudonym: Optional[int] = None

    def append(self, record: DeviceRecord) -> None:
        self.records.append(record)
        self.own_tokens[record.own_token] = record

    def reset_protocol_state(self) -> None:
        self.iteration_flags.clear()
        self.score = 0

    def window_records(self, day: int, window: int) -> list[DeviceRecord]:
        lo = day - window
        return [rec for rec in self.records if lo <= rec.day <= day]

    def __repr__(self) -> str:  # pragma: no cover
        return f"DeviceStore(records={len(self.records)}, score={self.score})"


class TokenRouter:
    """Token -> generating device map (the simulation stand-in for broadcast)."""

    def __init__(self):
        self._by_token: dict[int, DeviceStore] = {}

    def __len__(self) -> int:
        return len(self._by_token)

    def __contains__(self, token: int) -> bool:
        return token in self._by_token

    def register(self, token: int, store: DeviceStore) -> None:
        if token in self._by_token:
            raise ValueError("token already registered")
        self._by_token[token] = store

    def lookup(self, token: int) -> Optional[DeviceStore]:
        """The device that generated the token, or None (request dies silently)."""
        return self._by_token.get(token)

    def forget(self, tokens: Iterable[int]) -> None:
        for token in tokens:
            self._by_token.pop(token, None)


def generate_token(router: TokenRouter, rng: np.random.Generator) -> int:
    """Fresh random 128-bit token, regenerated on the (negligible) collision."""
    while True:
        token = int.from_bytes(rng.bytes(TOKEN_BYTES), "big")
        if token not in router:
            return token


def update_dev_data(
    store_u: DeviceStore,
    store_v: DeviceStore,
    contact: Contact,
    router: TokenRouter,
    rng: np.random.Generator,
) -> None:
    """Log one contact on both devices and register the two fresh tokens."""
    owners = {store_u._sim_owner, store_v._sim_owner}
    if owners != {contact.u, contact.v}:
        raise ValueError("contact endpoints do not match the two device owners")
    if store_u._sim_owner != contact.u:
        store_u, store_v = store_v, store_u
    token_u = generate_token(router, rng)
    router.register(token_u, store_u)
    token_v = generate_token(router, rng)
    router.register(token_v, store_v)
    store_u.append(DeviceRecord(contact.day, token_u, token_v, contact.distance, contact.duration))
    store_v.append(DeviceRecord(contact.day, token_v, token_u, contact.distance, contact.duration))


def apply_app_usage(
    contact: Contact,
    rho_u: float,
    rho_v: float,
    rng: np.random.Generator,
) -> bool:
    """Whether this contact gets recorded: both devices must be active."""
    if not (0.0 <= rho_u <= 1.0 and 0.0 <= rho_v <= 1.0):
        raise ValueError("app-usage probabilities must be in [0, 1]")
    return rng.random() < rho_u * rho_v


class LogMirror:
    """Columnar union of all device logs, one row per directed record.

    Holds exactly the fields every device record holds (day, distance,
    duration) plus which device the row belongs to and the row index of
    the mirrored record on the peer device.  It carries no agent attributes
    and no ground-truth contacts beyond what the devices logged; it exists
    so the trajectory protocol can walk the logs in bulk.
    """

    def __init__(self):
        self.day = np.empty(0, dtype=np.int32)
        self.device = np.empty(0, dtype=np.int32)
        self.peer_row = np.empty(0, dtype=np.int64)
        self.distance = np.empty(0, dtype=np.float64)
        self.duration = np.empty(0, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.day)

    def append_day(self, day: int, u: np.ndarray, v: np.ndarray, distance: np.ndarray, duration: np.ndarray) -> None:
        m = len(u)
        if m == 0:
            return
        base = len(self.day)
        self.day = np.concatenate([self.day, np.full(2 * m, day, dtype=np.int32)])
        self.device = np.concatenate([self.device, u.astype(np.int32), v.astype(np.int32)])
        rows = np.arange(base, base + 2 * m, dtype=np.int64)
        self.peer_row = np.concatenate([self.peer_row, rows[m:], rows[:m]])
        self.distance = np.concatenate([self.distance, distance, distance])
        self.duration = np.concatenate([self.duration, duration, duration])

    def prune(self, current_day: int, window: int) -> None:
        cutoff = current_day - window
        keep = self.day >= cutoff
        if keep.all():
            return
        remap = np.cumsum(keep, dtype=np.int64) - 1
        self.day = self.day[keep]
        self.device = self.device[keep]
        self.peer_row = remap[self.peer_row[keep]]
        self.distance = self.distance[keep]
        self.duration = self.duration[keep]


def record_day_contacts(
    contacts: ContactSet,
    stores: Sequence[DeviceStore],
    router: TokenRouter,
    app_active_prob: np.ndarray,
    rng: np.random.Generator,
    mirror: Optional[LogMirror] = None,
) -> int:
    """Batched daily device update: the app-usage gate, then mirrored records.

    Equivalent to apply_app_usage + update_dev_data per contact, with the
    gate draws taken for the whole day up front followed by the token
    material (one draw sequence per day, deterministic under seed).
    Returns the number of contacts recorded.
    """
    k = len(contacts)
    if k == 0:
        return 0
    gate = rng.random(k) < app_active_prob[contacts.u] * app_active_prob[contacts.v]
    idx = np.flatnonzero(gate)
    if len(idx) == 0:
        return 0
    if mirror is not None:
        mirror.append_day(
            contacts.day, contacts.u[idx], contacts.v[idx], contacts.distance[idx], contacts.duration[idx]
        )
    material = rng.bytes(2 * TOKEN_BYTES * len(idx))
    day = contacts.day
    us = contacts.u[idx].tolist()
    vs = contacts.v[idx].tolist()
    dists = contacts.distance[idx].tolist()
    durs = contacts.duration[idx].tolist()
    by_token = router._by_token
    new_record = tuple.__new__
    from_bytes = int.from_bytes
    pos = 0
    setdefault = by_token.setdefault
    for u, v, distance, duration in zip(us, vs, dists, durs):
        token_u = from_bytes(material[pos : pos + TOKEN_BYTES], "big")
        token_v = from_bytes(material[pos + TOKEN_BYTES : pos + 2 * TOKEN_BYTES], "big")
        pos += 2 * TOKEN_BYTES
        store_u = stores[u]
        store_v = stores[v]
        if setdefault(token_u, store_u) is not store_u:  # collision: regenerate
            token_u = generate_token(router, rng)
            by_token[token_u] = store_u
        if setdefault(token_v, store_v) is not store_v:
            token_v = generate_token(router, rng)
            by_token[token_v] = store_v
        rec_u = new_record(DeviceRecord, (day, token_u, token_v, distance, duration))
        rec_v = new_record(DeviceRecord, (day, token_v, token_u, distance, duration))
        store_u.records.append(rec_u)
        store_u.own_tokens[token_u] = rec_u
        store_v.records.append(rec_v)
        store_v.own_tokens[token_v] = rec_v
    return len(idx)


def prune_window(
    store: DeviceStore,
    current_day: int,
    window: int,
    router: Optional[TokenRouter] = None,
) -> DeviceStore:
    """Drop records older than the lookback window (day < current_day - window).

    Keeps the own-token index consistent; if a router is given, the
    dropped tokens stop being addressable as well.
    """
    if window < 1:
        raise ValueError("window must be at least one day")
    cutoff = current_day - window
    stale = [rec for rec in store.records if rec.day < cutoff]
    if not stale:
        return store
    store.records = [rec for rec in store.records if rec.day >= cutoff]
    for rec in stale:
        del store.own_tokens[rec.own_token]
    if router is not None:
        router.forget(rec.own_token for rec in stale)
    return store


def trajectory_seed_tokens(store: DeviceStore, day: int, window: int) -> list[int]:
    """Peer tokens of the device's window records.

    These are the only handles through which a trajectory can be started
    from this device's log: each addresses the counterpart device of one
    recorded contact.
    """
    return [rec.peer_token for rec in store.window_records(day, window)]


def assign_day_pseudonyms(
    stores: Sequence[DeviceStore],
    rng: np.random.Generator,
) -> dict[int, int]:
    """Give every device a fresh daily reporting pseudonym.

    Returns pseudonym -> owner, the linkage the simulator keeps for
    isolation bookkeeping; the trajectory protocol only ever sees the
    pseudonyms.
    """
    linkage: dict[int, int] = {}
    draws = rng.integers(0, np.iinfo(np.int64).max, size=len(stores))
    for store, value in zip(stores, draws):
        pseudonym = int(value)
        while pseudonym in linkage:
            pseudonym = int(rng.integers(0, np.iinfo(np.int64).max))
        store.day_pseudonym = pseudonym
        linkage[pseudonym] = store._sim_owner
    return linkage


def dump_store(store: DeviceStore) -> str:
    """Human-readable log dump, debugging only (never fed to the protocol)."""
    lines = [
        f"day={rec.day} own={rec.own_token:032x} peer={rec.peer_token:032x} "
        f"dist={rec.distance:.2f}m dur={rec.duration:.1f}min"
        for rec in store.records
    ]
    return "\n".join(lines)
