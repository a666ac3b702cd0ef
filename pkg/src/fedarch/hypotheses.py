"""Directional A/B hypotheses over simulator metrics.

Each hypothesis pins one (or two) decision-model edges to a measurable
claim: a scenario, a single pattern toggle, and comparator checks applied
to the median metric across paired seeds. The canonical ten ship in
``data/hypotheses.json``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .catalog import PatternCatalog
from .config import KNOWN_TOGGLES
from .errors import SchemaError
from .jsonutil import load_json_path

COMPARATORS = ("<", ">", "<=", ">=")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EdgeRef:
    pattern_id: str
    attribute_id: str
    direction: str

    def key(self) -> tuple[str, str, str]:
        return (self.pattern_id, self.attribute_id, self.direction)


@dataclass(frozen=True)
class MetricCheck:
    metric: str
    op: str          # "<" ">" "<=" ">="
    rhs: str | float  # "off" compares against the OFF arm, else a constant
    slack: float = 0.0

    def to_dict(self) -> dict:
        out = {"metric": self.metric, "op": self.op, "rhs": self.rhs}
        if self.slack:
            out["slack"] = self.slack
        return out


@dataclass(frozen=True)
class Hypothesis:
    id: str
    title: str
    edge_refs: tuple[EdgeRef, ...]
    toggle: str
    toggle_params: dict
    scenario: dict           # SimConfig fields, seed excluded
    checks: tuple[MetricCheck, ...]
    seeds: int = 10
    base_seed: int = 100
    aggregation: str = "median"

    def seed_list(self) -> list[int]:
        return [self.base_seed + i for i in range(self.seeds)]


def _parse_hypothesis(doc: dict, where: str) -> Hypothesis:
    allowed = {"id", "title", "edge_refs", "toggle", "toggle_params", "scenario",
               "checks", "seeds", "base_seed", "aggregation"}
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {sorted(unknown)}")
    refs = []
    for r in doc.get("edge_refs", []):
        refs.append(EdgeRef(pattern_id=r["pattern_id"], attribute_id=r["attribute_id"],
                            direction=r["direction"]))
    if not refs:
        raise SchemaError(f"{where}: a hypothesis needs at least one edge_ref")
    checks = []
    for c in doc.get("checks", []):
        op = c.get("op")
        if op not in COMPARATORS:
            raise SchemaError(f"{where}: unknown comparator {op!r}")
        rhs = c.get("rhs", "off")
        if not (rhs == "off" or isinstance(rhs, (int, float))):
            raise SchemaError(f"{where}: rhs must be 'off' or a number")
        checks.append(MetricCheck(metric=c["metric"], op=op, rhs=rhs,
                                  slack=float(c.get("slack", 0.0))))
    if not checks:
        raise SchemaError(f"{where}: a hypothesis needs at least one check")
    toggle = doc.get("toggle")
    if toggle not in KNOWN_TOGGLES:
        raise SchemaError(f"{where}: unknown toggle {toggle!r}")
    seeds = int(doc.get("seeds", 10))
    if seeds < 3:
        raise SchemaError(f"{where}: need at least 3 seeds for a median")
    return Hypothesis(
        id=str(doc["id"]), title=str(doc.get("title", "")), edge_refs=tuple(refs),
        toggle=toggle, toggle_params=dict(doc.get("toggle_params", {})),
        scenario=dict(doc.get("scenario", {})), checks=tuple(checks),
        seeds=seeds, base_seed=int(doc.get("base_seed", 100)),
        aggregation=str(doc.get("aggregation", "median")))


def load_hypotheses(path: str | Path) -> list[Hypothesis]:
    doc = load_json_path(path)
    if not isinstance(doc, dict) or "hypotheses" not in doc:
        raise SchemaError(f"{path}: expected an object with a 'hypotheses' list")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema_version")
    out = [_parse_hypothesis(h, f"{path}/{h.get('id', '?')}")
           for h in doc["hypotheses"]]
    seen = set()
    for h in out:
        if h.id in seen:
            raise SchemaError(f"duplicate hypothesis id {h.id}")
        seen.add(h.id)
    return out


def default_hypotheses_path() -> Path:
    return Path(str(resources.files("fedarch") / "data" / "hypotheses.json"))


def load_default_hypotheses() -> list[Hypothesis]:
    return load_hypotheses(default_hypotheses_path())


def check_refs_against_catalog(hypotheses: list[Hypothesis],
                               cat: PatternCatalog) -> list[str]:
    """Every edge_ref must name a real catalog edge; returns problems."""
    edges = {(e.pattern_id, e.attribute_id, e.direction)
             for m in cat.decision_models for e in m.effects}
    problems = []
    for h in hypotheses:
        for ref in h.edge_refs:
            if ref.key() not in edges:
                problems.append(f"{h.id}: edge {ref.key()} not in catalog")
    return problems
