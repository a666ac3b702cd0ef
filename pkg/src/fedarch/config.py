"""Simulation configuration and measured outcomes.

Both types serialize to JSON. A config fully determines a run: same config
(seed included) means bit-identical metrics, so `SimMetrics` comparisons
can be done on canonical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite
from typing import Any, Optional

import numpy as np

from .errors import ConfigError

KNOWN_TOGGLES = (
    "client_registry", "client_selector", "client_cluster",
    "message_compressor", "model_co_versioning_registry",
    "model_replacement_trigger", "deployment_selector",
    "multi_task_model_trainer", "heterogeneous_data_handler",
    "incentive_registry", "asynchronous_aggregator",
    "decentralised_aggregator", "hierarchical_aggregator",
    "secure_aggregator",
)

_DIST_KINDS = ("fixed", "uniform", "uniform_int", "choice", "per_client")


def draw_dist(spec: dict, rng: np.random.Generator, client_id: int = 0) -> Any:
    """One draw from a distribution spec dict.

    `per_client` is not random at all: it assigns values[client_id % len],
    which pins heterogeneity (e.g. one known straggler) to fixed clients.
    """
    kind = spec.get("kind")
    if kind == "fixed":
        return spec["value"]
    if kind == "uniform":
        return float(rng.uniform(spec["low"], spec["high"]))
    if kind == "uniform_int":
        return int(rng.integers(spec["low"], spec["high"] + 1))
    if kind == "choice":
        return spec["values"][int(rng.integers(0, len(spec["values"])))]
    if kind == "per_client":
        values = spec["values"]
        return values[client_id % len(values)]
    raise ConfigError(f"unknown distribution kind {kind!r} (want one of {_DIST_KINDS})")


def _check_dist(spec: Any, where: str) -> dict:
    if not isinstance(spec, dict) or spec.get("kind") not in _DIST_KINDS:
        raise ConfigError(f"{where}: expected a distribution spec, got {spec!r}")
    return spec


@dataclass
class SimConfig:
    seed: int
    n_clients: int = 10
    n_features: int = 10
    n_classes: int = 4
    samples_per_client: dict = field(
        default_factory=lambda: {"kind": "fixed", "value": 50})
    label_skew_beta: float = 1.0
    group_structure: Optional[dict] = None  # {"n_groups": int, "concentration": float}
    rounds: int = 20
    local_epochs: int = 1
    learning_rate: float = 0.5
    batch_size: Optional[int] = None  # None = full batch
    network: dict = field(default_factory=lambda: {
        "latency": {"kind": "fixed", "value": 0.05},
        "bandwidth": {"kind": "fixed", "value": 1.0e6}})
    device_speed: dict = field(default_factory=lambda: {"kind": "fixed", "value": 1000.0})
    device_memory: dict = field(default_factory=lambda: {"kind": "choice",
                                                         "values": [1, 2, 4, 8]})
    dropout_prob: float = 0.0
    pattern_toggles: dict = field(default_factory=dict)
    target_accuracy: Optional[float] = None
    server_crash_round: Optional[int] = None
    strict_complements: bool = False
    test_set_size: int = 2000
    class_means_seed: Optional[int] = None  # fixes task geometry across seeds

    def __post_init__(self) -> None:
        if self.seed is None:
            raise ConfigError("seed is mandatory")
        for name in ("n_clients", "n_features", "n_classes", "rounds", "test_set_size"):
            if int(getattr(self, name)) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.local_epochs < 0:
            raise ConfigError("local_epochs must be >= 0")
        if not (isfinite(self.label_skew_beta) and self.label_skew_beta > 0):
            raise ConfigError("label_skew_beta must be > 0")
        if not (isfinite(self.learning_rate) and self.learning_rate >= 0):
            raise ConfigError("learning_rate must be >= 0")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ConfigError("dropout_prob must be in [0, 1]")
        if self.batch_size is not None and self.batch_size <= 0:
            raise ConfigError("batch_size must be positive")
        _check_dist(self.samples_per_client, "samples_per_client")
        _check_dist(self.device_speed, "device_speed")
        _check_dist(self.device_memory, "device_memory")
        for key in ("latency", "bandwidth"):
            _check_dist(self.network.get(key), f"network.{key}")
        if self.group_structure is not None:
            if int(self.group_structure.get("n_groups", 0)) < 1:
                raise ConfigError("group_structure.n_groups must be >= 1")
        if not isinstance(self.pattern_toggles, dict):
            raise ConfigError("pattern_toggles must be an object")
        for pid in self.pattern_toggles:
            if pid not in KNOWN_TOGGLES:
                raise ConfigError(f"unknown pattern toggle {pid!r}")

    @staticmethod
    def from_dict(doc: dict) -> "SimConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be an object")
        fields = {f for f in SimConfig.__dataclass_fields__}
        unknown = set(doc) - fields
        if unknown:
            raise ConfigError(f"config: unknown field(s) {sorted(unknown)}")
        if "seed" not in doc:
            raise ConfigError("seed is mandatory")
        return SimConfig(**doc)

    def to_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            val = getattr(self, name)
            out[name] = val
        return out

    def with_toggle(self, pattern_id: str, params: Optional[dict]) -> "SimConfig":
        """Copy with one plugin switched on (params dict) or off (None)."""
        toggles = {k: dict(v) for k, v in self.pattern_toggles.items()}
        if params is None:
            toggles.pop(pattern_id, None)
        else:
            toggles[pattern_id] = dict(params)
        doc = self.to_dict()
        doc["pattern_toggles"] = toggles
        return SimConfig.from_dict(doc)


@dataclass
class SimMetrics:
    accuracy_per_round: list[float]
    final_accuracy: float
    per_client_accuracy: list[float]
    accuracy_variance_across_clients: float
    participation_count: list[int]
    mean_participation: float
    bytes_uplink: int
    bytes_downlink: int
    central_bytes_uplink: int
    central_bytes_downlink: int
    n_uplink_messages: int
    n_downlink_messages: int
    simulated_wall_time: float
    rounds_to_target: Optional[int]
    time_to_target: Optional[float]
    messages_to_target: Optional[int]
    event_log_digest: str
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @staticmethod
    def from_dict(doc: dict) -> "SimMetrics":
        return SimMetrics(**doc)
