"""Named random substreams derived from one master seed.

Every source of randomness in a run (graph construction, daily contact
draws, disease progression, device bookkeeping, policy fills, trajectory
sampling) pulls from its own generator.  Consuming extra draws in one
stream therefore never shifts another: e.g. raising the trajectory
iteration count leaves the epidemic path untouched.
"""

from __future__ import annotations

import numpy as np

# Stable stream codes; appending new streams must not renumber old ones.
STREAMS = {
    "graph": 1,
    "contacts": 2,
    "disease": 3,
    "devices": 4,
    "policy": 5,
    "trajectory": 6,
}


def substream(master_seed: int, name: str) -> np.random.Generator:
    """Return the named generator for this master seed."""
    try:
        code = STREAMS[name]
    except KeyError:
        raise ValueError(f"unknown rng stream {name!r}") from None
    return np.random.default_rng(np.random.SeedSequence((master_seed, code)))


class RngBundle:
    """All substreams for one simulation run."""

    def __init__(self, master_seed: int):
        self.master_seed = master_seed
        for name in STREAMS:
            setattr(self, name, substream(master_seed, name))
