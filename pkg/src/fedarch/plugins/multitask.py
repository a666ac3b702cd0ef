"""Multi-task model trainer: related tasks share a feature block.

Task datasets are generated from class means whose first `shared_dims`
coordinates come from one common draw (the shared latent structure);
the remaining coordinates are task-specific. Each client trains every
task, averages the shared weight columns across its task models before
uplink, and the server runs per-task federated averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..rng import substream
from ..simdata import FEATURE_STD
from .. import model as mdl


@dataclass
class TaskData:
    # per client: (X, y); plus one held-out test set per task
    clients: list[tuple[np.ndarray, np.ndarray]]
    test_X: np.ndarray
    test_y: np.ndarray


def generate_multitask_data(seed: int, n_clients: int, n_features: int,
                            n_classes: int, n_tasks: int, shared_dims: int,
                            samples_per_client: list[int], label_skew_beta: float,
                            test_set_size: int = 1000) -> list[TaskData]:
    if n_tasks < 2:
        raise ConfigError("multi-task training needs n_tasks >= 2")
    if not 0 <= shared_dims <= n_features:
        raise ConfigError("shared_dims must be within the feature count")

    shared_block = substream(seed, "mt_shared_means").standard_normal(
        (n_classes, shared_dims))
    tasks = []
    for t in range(n_tasks):
        task_block = substream(seed, "mt_task_means", t).standard_normal(
            (n_classes, n_features - shared_dims))
        means = np.hstack([shared_block, task_block])
        means /= np.maximum(np.linalg.norm(means, axis=1, keepdims=True), 1e-12)

        clients = []
        for cid in range(n_clients):
            rng = substream(seed, "mt_labels", cid, t)
            props = rng.dirichlet(np.full(n_classes, label_skew_beta))
            counts = rng.multinomial(samples_per_client[cid], props)
            y = np.repeat(np.arange(n_classes), counts)
            feat_rng = substream(seed, "mt_features", cid, t)
            X = means[y] + FEATURE_STD * feat_rng.standard_normal((len(y), n_features))
            clients.append((X, y))

        test_rng = substream(seed, "mt_test", t)
        test_y = test_rng.integers(0, n_classes, size=test_set_size)
        test_X = means[test_y] + FEATURE_STD * test_rng.standard_normal(
            (test_set_size, n_features))
        tasks.append(TaskData(clients=clients, test_X=test_X, test_y=test_y))
    return tasks


def train_client_tasks(task_models: list[np.ndarray], client_tasks: list[tuple],
                       shared_dims: int, epochs: int, lr: float) -> list[np.ndarray]:
    """Local step for one client: train every task, then unify the shared
    weight columns across the task models (bias column excluded)."""
    locals_ = [mdl.train(task_models[t], X, y, epochs, lr)
               for t, (X, y) in enumerate(client_tasks)]
    if shared_dims > 0:
        shared = np.mean([w[:, :shared_dims] for w in locals_], axis=0)
        for w in locals_:
            w[:, :shared_dims] = shared
    return locals_
