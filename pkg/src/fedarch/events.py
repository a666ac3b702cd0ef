"""Event queue and tamper-evident event log for the simulator."""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Any

from .jsonutil import canonical_dumps


@dataclass(frozen=True)
class Event:
    time: float
    seq: int
    kind: str
    actor: str
    data: dict = field(default_factory=dict)


class EventQueue:
    """Pending events ordered by (time, sequence_no).

    The sequence number is assigned at enqueue, so simultaneous events
    always dequeue in the order they were scheduled — that single rule
    fixes every tie deterministically.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Event]] = []
        self._next_seq = 0
        self.current_time = 0.0

    def push(self, time: float, kind: str, actor: str, **data: Any) -> Event:
        ev = Event(time=time, seq=self._next_seq, kind=kind, actor=actor, data=data)
        self._next_seq += 1
        heapq.heappush(self._heap, (time, ev.seq, ev))
        return ev

    def pop(self) -> Event:
        time, _, ev = heapq.heappop(self._heap)
        self.current_time = max(self.current_time, time)
        return ev

    def __len__(self) -> int:
        return len(self._heap)


class EventLog:
    """Append-only record of everything that happened in a run."""

    def __init__(self) -> None:
        self.records: list[dict] = []

    def append(self, time: float, event: str, actor: str, bytes_: int = 0) -> None:
        self.records.append(
            {"time": time, "event": event, "actor": actor, "bytes": bytes_})

    def digest(self) -> str:
        h = hashlib.sha256()
        for rec in self.records:
            h.update(canonical_dumps(rec).encode("utf-8"))
            h.update(b"\n")
        return h.hexdigest()

    def to_ldjson(self) -> str:
        return "\n".join(canonical_dumps(r) for r in self.records) + "\n"
