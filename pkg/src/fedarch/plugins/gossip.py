"""Decentralised aggregator: gossip averaging without a central server.

Mixing distinguishes a client's own model (kept exact) from the copies it
receives over the wire (which may be compressed or noised): every update
reads the pre-step models simultaneously, so two clients on a ring both
land on the midpoint after one step.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..rng import substream


def ring_step(own: dict[int, np.ndarray],
              wire: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Each participant averages pairwise with its ring successor."""
    ids = sorted(own)
    if len(ids) < 2:
        return {cid: w.copy() for cid, w in own.items()}
    out = {}
    for pos, cid in enumerate(ids):
        succ = ids[(pos + 1) % len(ids)]
        out[cid] = 0.5 * (own[cid] + wire[succ])
    return out


def random_k_step(own: dict[int, np.ndarray], wire: dict[int, np.ndarray],
                  k: int, seed: int, round_no: int) -> dict[int, np.ndarray]:
    """Each participant averages with k seeded-drawn distinct neighbors."""
    ids = sorted(own)
    if k < 1:
        raise ConfigError("random_k topology needs k >= 1")
    if len(ids) < 2:
        return {cid: w.copy() for cid, w in own.items()}
    out = {}
    for cid in ids:
        others = [i for i in ids if i != cid]
        take = min(k, len(others))
        rng = substream(seed, "gossip_neighbors", cid, round_no)
        picks = rng.choice(len(others), size=take, replace=False)
        neighbors = [others[int(p)] for p in sorted(picks)]
        stack = [own[cid]] + [wire[n] for n in neighbors]
        out[cid] = np.mean(stack, axis=0)
    return out


def exchange_counts(topology: str, k: int, n_participants: int) -> int:
    """Models received per participant in one gossip step."""
    if n_participants < 2:
        return 0
    if topology == "ring":
        return 1
    if topology == "random_k":
        return min(k, n_participants - 1)
    raise ConfigError(f"unknown gossip topology {topology!r}")
