"""Deterministic random streams for the simulator.

All randomness flows through Philox4x64 (a counter-based generator with an
explicit 128-bit key), with one independent child stream per (purpose,
ids...) tuple. The key is the first 16 bytes of
SHA-256("<seed>|<purpose>|<id>|<id>...|"), so any implementation of Philox
and SHA-256 reproduces every draw exactly; there is no hidden global state
and no draw-order coupling between subsystems.

Purpose tags in use: class_means, client_sizes, client_labels,
group_profile, client_features, test_set, device, participation,
minibatch, mask, dp_noise, oversample_jitter, gossip_neighbors,
kmeans_init.
"""

from __future__ import annotations

import hashlib

import numpy as np
from numpy.random import Generator, Philox


def substream(seed: int, purpose: str, *ids: int) -> Generator:
    """Independent generator for one (seed, purpose, ids) tuple."""
    msg = f"{seed}|{purpose}|" + "|".join(str(i) for i in ids)
    digest = hashlib.sha256(msg.encode("utf-8")).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return Generator(Philox(key=key))


def mask_stream(seed: int, i: int, j: int, round_no: int) -> Generator:
    """Stream shared by the (i, j) client pair for round `round_no`, i < j."""
    if not i < j:
        raise ValueError("pairwise mask streams are keyed with i < j")
    return substream(seed, "mask", i, j, round_no)
