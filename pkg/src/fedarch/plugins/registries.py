"""Append-only registries: client records, model co-versioning, incentives.

The ledger-backed variants described for these patterns are modelled as
hash-chained append-only logs: each entry commits to its predecessor, so
recomputing the chain detects any tampered record. Consensus and smart
contracts are out of scope.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import DuplicateVersionError
from ..jsonutil import canonical_dumps

GENESIS = "0" * 64


def model_hash(w: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(w, dtype=np.float64).tobytes()).hexdigest()


def _entry_hash(record: dict, prev_hash: str) -> str:
    payload = canonical_dumps(record) + prev_hash
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class HashChain:
    """Append-only log where every entry links to the previous one."""

    def __init__(self, chained: bool = True) -> None:
        self.chained = chained
        self.entries: list[dict] = []  # {record, prev_hash, hash}

    def append(self, record: dict) -> str:
        prev = self.entries[-1]["hash"] if self.entries else GENESIS
        entry_hash = _entry_hash(record, prev) if self.chained else ""
        self.entries.append({"record": record, "prev_hash": prev if self.chained else "",
                             "hash": entry_hash})
        return entry_hash

    @property
    def head(self) -> str:
        if not self.entries:
            return GENESIS
        return self.entries[-1]["hash"]

    def verify(self) -> tuple[bool, Optional[int]]:
        """Recompute the chain; returns (ok, index of first bad entry)."""
        if not self.chained:
            return True, None
        prev = GENESIS
        for i, e in enumerate(self.entries):
            if e["prev_hash"] != prev or _entry_hash(e["record"], prev) != e["hash"]:
                return False, i
            prev = e["hash"]
        return True, None

    def export_records(self) -> str:
        """Line-delimited records with the chain head in a footer record."""
        lines = [canonical_dumps(e) for e in self.entries]
        lines.append(canonical_dumps({"footer": True, "head": self.head,
                                      "entries": len(self.entries)}))
        return "\n".join(lines) + "\n"


class ClientRegistry:
    """Per-device records: metadata, uptime history, last participation."""

    def __init__(self, hash_chained: bool = True) -> None:
        self.chain = HashChain(chained=hash_chained)
        self.records: dict[int, dict] = {}

    def register(self, client_id: int, metadata: dict) -> None:
        rec = {"kind": "register", "client_id": client_id, "metadata": metadata,
               "last_seen_round": None, "seen_rounds": 0}
        self.records[client_id] = rec
        self.chain.append({"kind": "register", "client_id": client_id,
                           "metadata": metadata})

    def mark_seen(self, client_id: int, round_no: int) -> None:
        rec = self.records[client_id]
        rec["last_seen_round"] = round_no
        rec["seen_rounds"] += 1
        self.chain.append({"kind": "seen", "client_id": client_id, "round": round_no})

    def export_records(self) -> str:
        return self.chain.export_records()


class CoVersioningRegistry:
    """Aligns each local model hash with the global version it fed."""

    def __init__(self, hash_chained: bool = True) -> None:
        self.chain = HashChain(chained=hash_chained)
        self.entries: dict[int, dict] = {}
        self._by_local_hash: dict[str, int] = {}

    def record_co_version(self, global_version: int,
                          contributions: list[tuple[int, str]],
                          metrics: Optional[dict] = None) -> None:
        if global_version in self.entries:
            raise DuplicateVersionError(f"version {global_version} already recorded")
        entry = {"global_version": global_version,
                 "contributions": [{"client_id": cid, "local_hash": h}
                                   for cid, h in sorted(contributions)],
                 "metrics": metrics or {}}
        self.entries[global_version] = entry
        for cid, h in contributions:
            self._by_local_hash[h] = global_version
        self.chain.append(entry)

    def lookup(self, local_hash: str) -> Optional[int]:
        return self._by_local_hash.get(local_hash)

    def export_records(self) -> str:
        return self.chain.export_records()


@dataclass
class IncentiveLedger:
    """Accumulated rewards per device and the participation boost they buy."""

    reward_per_update: float = 1.0
    p_base: float = 0.5
    p_gain: float = 0.1
    rewards: dict[int, float] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)

    def update_incentives(self, accepted: list[tuple[int, int]], round_no: int) -> None:
        """Credit each accepted update with reward_per_update x n_samples/1000."""
        for cid, n_samples in sorted(accepted):
            credit = self.reward_per_update * n_samples / 1000.0
            self.rewards[cid] = self.rewards.get(cid, 0.0) + credit
            self.history.append({"round": round_no, "client_id": cid, "credit": credit})

    def total_reward(self, client_id: int) -> float:
        return self.rewards.get(client_id, 0.0)

    def participation_prob(self, client_id: int) -> float:
        p = self.p_base + self.p_gain * math.log1p(self.total_reward(client_id))
        return min(max(p, self.p_base), 1.0)
