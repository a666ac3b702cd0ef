"""Heterogeneous data handler: local oversampling toward class balance.

Minority classes are resampled with replacement and Gaussian feature
jitter until every class present on the device matches the majority
count. Raw data never leaves the device and the original array is kept
untouched for evaluation.
"""

from __future__ import annotations

import numpy as np

from ..rng import substream

JITTER_SIGMA = 0.05


def balance_local_data(X: np.ndarray, y: np.ndarray, seed: int,
                       client_id: int) -> tuple[np.ndarray, np.ndarray, dict]:
    classes, counts = np.unique(y, return_counts=True)
    info = {"original_size": len(y), "single_class": len(classes) == 1}
    if len(classes) <= 1 or counts.min() == counts.max():
        return X, y, {**info, "added": 0}

    rng = substream(seed, "oversample_jitter", client_id)
    target = int(counts.max())
    extra_X, extra_y = [], []
    for cls, count in zip(classes, counts):
        deficit = target - int(count)
        if deficit <= 0:
            continue
        rows = np.flatnonzero(y == cls)
        picks = rows[rng.integers(0, len(rows), size=deficit)]
        jitter = JITTER_SIGMA * rng.standard_normal((deficit, X.shape[1]))
        extra_X.append(X[picks] + jitter)
        extra_y.append(np.full(deficit, cls, dtype=y.dtype))

    X_out = np.vstack([X] + extra_X)
    y_out = np.concatenate([y] + extra_y)
    return X_out, y_out, {**info, "added": int(len(y_out) - len(y))}
