"""Secure aggregator: exact additive masking plus optional Gaussian noise.

Updates are converted to fixed point (scale 2^16, 64-bit), each (i, j)
client pair adds/subtracts the same seeded mask vector, and all arithmetic
wraps mod 2^64 — so the masked sum equals the unmasked fixed-point sum
exactly while no single masked update reveals anything. Differential
privacy is simulated by per-coordinate Gaussian noise added to each update
before masking; there is no epsilon/delta accounting.
"""

from __future__ import annotations

import numpy as np

from ..errors import MaskingCardinalityError
from ..rng import mask_stream, substream

FIXED_POINT_SCALE = 1 << 16


def to_fixed(w: np.ndarray) -> np.ndarray:
    return np.rint(np.asarray(w, dtype=np.float64) * FIXED_POINT_SCALE).astype(np.int64)


def from_fixed(x: np.ndarray) -> np.ndarray:
    return x.astype(np.float64) / FIXED_POINT_SCALE


def plain_fixed_sum(updates: list[np.ndarray]) -> np.ndarray:
    """Reference sum in fixed point, no masking. int64 result."""
    total = np.zeros(updates[0].shape, dtype=np.int64)
    for w in updates:
        total = total + to_fixed(w)
    return total


def add_dp_noise(w: np.ndarray, dp_sigma: float, seed: int, client_id: int,
                 round_no: int) -> np.ndarray:
    if dp_sigma <= 0:
        return w
    rng = substream(seed, "dp_noise", client_id, round_no)
    return w + dp_sigma * rng.standard_normal(w.shape)


def secure_sum(updates: list[tuple[int, np.ndarray]], seed: int, round_no: int,
               masking: bool = True, dp_sigma: float = 0.0) -> np.ndarray:
    """Aggregate updates without the server seeing any of them in the clear.

    Returns the float sum recovered from fixed point. With dp_sigma > 0
    each update is noised before conversion.
    """
    if masking and len(updates) < 2:
        raise MaskingCardinalityError("pairwise masking needs >= 2 participants")
    updates = sorted(updates, key=lambda u: u[0])
    ids = [cid for cid, _ in updates]
    d = updates[0][1].size

    masked: list[np.ndarray] = []
    for cid, w in updates:
        w = add_dp_noise(w, dp_sigma, seed, cid, round_no)
        masked.append(to_fixed(w).view(np.uint64))

    if masking:
        with np.errstate(over="ignore"):
            for a in range(len(ids)):
                for b in range(a + 1, len(ids)):
                    mask = mask_stream(seed, ids[a], ids[b], round_no).integers(
                        0, 1 << 64, size=d, dtype=np.uint64)
                    masked[a] = masked[a] + mask
                    masked[b] = masked[b] - mask

    with np.errstate(over="ignore"):
        total = np.zeros(d, dtype=np.uint64)
        for m in masked:
            total = total + m
    return from_fixed(total.view(np.int64))
