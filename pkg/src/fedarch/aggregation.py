"""Model aggregation primitives."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, EmptyUpdateError


def fedavg_aggregate(updates: list[tuple[int, np.ndarray, int]]) -> np.ndarray:
    """Sample-size-weighted mean of local weights.

    `updates` holds (client_id, weights, n_samples). Summation order is
    fixed to ascending client id for bit-reproducibility.
    """
    if not updates:
        raise EmptyUpdateError("no updates to aggregate")
    updates = sorted(updates, key=lambda u: u[0])
    shape = updates[0][1].shape
    total = sum(n for _, _, n in updates)
    if total <= 0:
        raise EmptyUpdateError("aggregate needs a positive sample count")
    out = np.zeros(shape)
    for _, w, n in updates:
        if w.shape != shape:
            raise DimensionMismatchError(f"update shape {w.shape} != {shape}")
        out += (n / total) * w
    return out


def async_merge(global_w: np.ndarray, update_w: np.ndarray, staleness: int,
                alpha: float) -> np.ndarray:
    """Staleness-discounted mixing: the older the base model, the smaller
    the step the update is allowed to take."""
    if staleness < 0:
        raise ValueError("staleness must be >= 0")
    if global_w.shape != update_w.shape:
        raise DimensionMismatchError(
            f"update shape {update_w.shape} != {global_w.shape}")
    a = alpha / (1.0 + staleness)
    return (1.0 - a) * global_w + a * update_w
