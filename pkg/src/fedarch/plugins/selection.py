"""Client selector and client cluster mechanics."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, EmptySelectionError
from ..rng import substream


def select_clients(records: list[dict], min_speed: float = 0.0,
                   min_bandwidth: float = 0.0, top_k: int | None = None) -> list[int]:
    """Pick the devices that meet the policy, fastest first.

    `records` carry client_id, device_speed and bandwidth. Ties break on
    client id, so the result is deterministic.
    """
    qualified = [r for r in records
                 if r["device_speed"] >= min_speed and r["bandwidth"] >= min_bandwidth]
    if not qualified:
        raise EmptySelectionError(
            f"no client meets min_speed={min_speed}, min_bandwidth={min_bandwidth}")
    qualified.sort(key=lambda r: (-r["device_speed"], r["client_id"]))
    if top_k is not None:
        if top_k < 1:
            raise ConfigError("top_k must be >= 1")
        qualified = qualified[:top_k]
    return sorted(r["client_id"] for r in qualified)


def label_histogram(y: np.ndarray, n_classes: int) -> np.ndarray:
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    return counts / max(counts.sum(), 1.0)


def cluster_by_label_distribution(histograms: np.ndarray, n_groups: int,
                                  seed: int, iterations: int = 20) -> np.ndarray:
    """Group clients by k-means over their label histograms.

    Seeded init, fixed iteration count, assignment ties to the lowest
    group id; empty groups are repaired deterministically by moving the
    point farthest from its centroid out of the largest group.
    """
    n = len(histograms)
    if n_groups < 1:
        raise ConfigError("n_groups must be >= 1")
    if n_groups > n:
        raise ConfigError("n_groups cannot exceed the number of clients")
    if n_groups == 1:
        return np.zeros(n, dtype=int)

    rng = substream(seed, "kmeans_init")
    centroids = histograms[rng.choice(n, size=n_groups, replace=False)].copy()
    assign = np.zeros(n, dtype=int)
    for _ in range(iterations):
        dists = ((histograms[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = dists.argmin(axis=1)  # argmin takes the lowest index on ties
        for g in range(n_groups):
            members = np.flatnonzero(assign == g)
            if len(members):
                centroids[g] = histograms[members].mean(axis=0)
            else:
                sizes = np.bincount(assign, minlength=n_groups)
                donor = int(sizes.argmax())
                donor_members = np.flatnonzero(assign == donor)
                spread = ((histograms[donor_members] - centroids[donor]) ** 2).sum(axis=1)
                moved = donor_members[int(spread.argmax())]
                assign[moved] = g
                centroids[g] = histograms[moved]
    return assign


def assign_groups(clients, toggle: dict, n_classes: int, seed: int) -> np.ndarray:
    """Resolve the cluster toggle to a group id per client."""
    grouping = toggle.get("grouping", "by_label_distribution")
    n_groups = int(toggle.get("n_groups", 2))
    if grouping == "by_group_label":
        labels = [c.group_label for c in clients]
        if any(lbl is None for lbl in labels):
            raise ConfigError("by_group_label grouping needs group-structured data")
        return np.asarray(labels, dtype=int)
    if grouping == "by_label_distribution":
        hist = np.stack([label_histogram(c.y, n_classes) for c in clients])
        return cluster_by_label_distribution(hist, n_groups, seed)
    raise ConfigError(f"unknown grouping {grouping!r}")
