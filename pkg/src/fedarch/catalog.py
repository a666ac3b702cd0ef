"""Pattern catalog: domain types, loading, validation and queries.

The catalog is plain versioned data (``data/catalog.json``) describing 15
architectural patterns for federated learning, the quality attributes they
affect (signed effect edges), the relations between them (complements /
alternatives) and their adoption constraints, grouped into four decision
models. Loading is strict about structure; content-level checks live in
`validate_catalog`, which reports violations as data instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from . import canonical
from .errors import (
    DanglingReferenceError,
    DuplicateIdError,
    NotFoundError,
    SchemaError,
)
from .jsonutil import load_json_path

PATTERN_CATEGORIES = (
    "client_management", "model_management", "model_training",
    "model_aggregation", "configuration",
)
DECISION_MODEL_IDS = (
    "client_management", "model_management_configuration",
    "model_aggregation", "model_training",
)
CASE_STUDY_IDS = ("meta", "intel_openfl", "siemens_ifl")
DIRECTIONS = ("benefit", "tradeoff")
RELATION_KINDS = ("complements", "alternative")

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class QualityAttribute:
    id: str
    name: str
    higher_is_better: bool = True


@dataclass(frozen=True)
class Pattern:
    id: str
    name: str
    category: str
    summary: str
    source_anchor: str
    aliases: tuple[str, ...] = ()


@dataclass(frozen=True)
class Effect:
    pattern_id: str
    attribute_id: str
    direction: str  # "benefit" | "tradeoff"
    note: str
    source_anchor: str
    weight: float = 1.0

    @property
    def sign(self) -> int:
        return 1 if self.direction == "benefit" else -1


@dataclass(frozen=True)
class Relation:
    kind: str  # "complements" | "alternative"
    from_pattern: str  # complements: the dependent pattern
    to_pattern: str    # complements: the required initial pattern
    scope_attribute: Optional[str] = None  # set only on scoped alternatives
    note: str = ""


@dataclass(frozen=True)
class Constraint:
    pattern_id: str
    key: str
    description: str


@dataclass(frozen=True)
class DecisionModel:
    id: str
    member_pattern_ids: tuple[str, ...]
    effects: tuple[Effect, ...]
    relations: tuple[Relation, ...]
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class CaseStudyMapping:
    id: str
    pattern_ids: tuple[str, ...]
    component_notes: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass(frozen=True)
class PatternCatalog:
    schema_version: int
    canonical_content: bool
    constraint_keys: tuple[str, ...]
    attributes: tuple[QualityAttribute, ...]
    patterns: tuple[Pattern, ...]
    decision_models: tuple[DecisionModel, ...]
    case_studies: tuple[CaseStudyMapping, ...]

    # --- lookups (read-only views over the frozen data) ---

    def attribute_ids(self) -> set[str]:
        return {a.id for a in self.attributes}

    def pattern(self, pattern_id: str) -> Pattern:
        for p in self.patterns:
            if p.id == pattern_id or pattern_id in p.aliases:
                return p
        raise NotFoundError(f"unknown pattern: {pattern_id!r}")

    def has_pattern(self, pattern_id: str) -> bool:
        return any(p.id == pattern_id for p in self.patterns)

    def decision_model(self, model_id: str) -> DecisionModel:
        for m in self.decision_models:
            if m.id == model_id:
                return m
        raise NotFoundError(f"unknown decision model: {model_id!r}")

    def model_of(self, pattern_id: str) -> DecisionModel:
        for m in self.decision_models:
            if pattern_id in m.member_pattern_ids:
                return m
        raise NotFoundError(f"pattern {pattern_id!r} belongs to no decision model")

    def case_study(self, case_id: str) -> CaseStudyMapping:
        for c in self.case_studies:
            if c.id == case_id:
                return c
        raise NotFoundError(f"unknown case study: {case_id!r}")

    def all_effects(self) -> tuple[tuple[str, Effect], ...]:
        """Every effect edge with its decision-model id."""
        out = []
        for m in self.decision_models:
            out.extend((m.id, e) for e in m.effects)
        return tuple(out)


@dataclass(frozen=True)
class PatternNeighborhood:
    """One pattern with everything attached to it in its decision model."""
    pattern: Pattern
    decision_model_id: str
    effects: tuple[Effect, ...]
    relations: tuple[Relation, ...]  # relations touching the pattern, either end
    constraints: tuple[Constraint, ...]


# --------------------------------------------------------------------------
# parsing


def _require(obj: dict, key: str, kind: type, where: str) -> Any:
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    val = obj[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise SchemaError(f"{where}: field {key!r} must be a number")
        return float(val)
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return val


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown field(s) {sorted(unknown)}")


def _check_enum(value: str, allowed: tuple[str, ...], where: str) -> str:
    if value not in allowed:
        raise SchemaError(f"{where}: {value!r} not one of {list(allowed)}")
    return value


def _parse_effect(obj: dict, where: str) -> Effect:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: effect must be an object")
    _check_keys(obj, {"pattern_id", "attribute_id", "direction", "note",
                      "source_anchor", "weight"}, where)
    weight = float(obj.get("weight", 1.0))
    if not weight > 0 or weight != weight or weight == float("inf"):
        raise SchemaError(f"{where}: weight must be finite and positive")
    return Effect(
        pattern_id=_require(obj, "pattern_id", str, where),
        attribute_id=_require(obj, "attribute_id", str, where),
        direction=_check_enum(_require(obj, "direction", str, where), DIRECTIONS, where),
        note=str(obj.get("note", "")),
        source_anchor=str(obj.get("source_anchor", "")),
        weight=weight,
    )


def _parse_relation(obj: dict, where: str) -> Relation:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: relation must be an object")
    _check_keys(obj, {"kind", "from_pattern", "to_pattern", "scope_attribute", "note"}, where)
    return Relation(
        kind=_check_enum(_require(obj, "kind", str, where), RELATION_KINDS, where),
        from_pattern=_require(obj, "from_pattern", str, where),
        to_pattern=_require(obj, "to_pattern", str, where),
        scope_attribute=obj.get("scope_attribute"),
        note=str(obj.get("note", "")),
    )


def _parse_constraint(obj: dict, where: str) -> Constraint:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: constraint must be an object")
    _check_keys(obj, {"pattern_id", "key", "description"}, where)
    return Constraint(
        pattern_id=_require(obj, "pattern_id", str, where),
        key=_require(obj, "key", str, where),
        description=str(obj.get("description", "")),
    )


def parse_catalog(doc: Any, source: str = "<memory>") -> PatternCatalog:
    """Build a catalog from a parsed JSON document, enforcing structure.

    Raises SchemaError / DuplicateIdError / DanglingReferenceError; content
    that is structurally sound but wrong (e.g. a missing canonical edge) is
    left for `validate_catalog`.
    """
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be an object")
    _check_keys(doc, {"schema_version", "canonical_content", "constraint_keys",
                      "attributes", "patterns", "decision_models", "case_studies"}, source)
    version = _require(doc, "schema_version", int, source)
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{source}: unsupported schema_version {version}")

    attributes = []
    seen = set()
    for a in _require(doc, "attributes", list, source):
        where = f"{source}/attributes"
        _check_keys(a, {"id", "name", "higher_is_better"}, where)
        attr = QualityAttribute(
            id=_require(a, "id", str, where),
            name=_require(a, "name", str, where),
            higher_is_better=bool(a.get("higher_is_better", True)),
        )
        if attr.id in seen:
            raise DuplicateIdError(f"duplicate attribute id {attr.id!r}")
        seen.add(attr.id)
        attributes.append(attr)
    attr_ids = {a.id for a in attributes}

    patterns = []
    seen = set()
    for p in _require(doc, "patterns", list, source):
        where = f"{source}/patterns"
        _check_keys(p, {"id", "name", "category", "summary", "source_anchor", "aliases"}, where)
        pat = Pattern(
            id=_require(p, "id", str, where),
            name=_require(p, "name", str, where),
            category=_check_enum(_require(p, "category", str, where), PATTERN_CATEGORIES, where),
            summary=str(p.get("summary", "")),
            source_anchor=str(p.get("source_anchor", "")),
            aliases=tuple(p.get("aliases", ())),
        )
        if pat.id in seen:
            raise DuplicateIdError(f"duplicate pattern id {pat.id!r}")
        seen.add(pat.id)
        patterns.append(pat)
    pattern_ids = {p.id for p in patterns}

    models = []
    claimed: dict[str, str] = {}
    seen = set()
    for m in _require(doc, "decision_models", list, source):
        where = f"{source}/decision_models"
        _check_keys(m, {"id", "member_pattern_ids", "effects", "relations", "constraints"}, where)
        mid = _check_enum(_require(m, "id", str, where), DECISION_MODEL_IDS, where)
        if mid in seen:
            raise DuplicateIdError(f"decision model {mid!r} defined twice")
        seen.add(mid)
        members = tuple(_require(m, "member_pattern_ids", list, where))
        for pid in members:
            if pid not in pattern_ids:
                raise DanglingReferenceError(f"{where}/{mid}: unknown member pattern {pid!r}")
            if pid in claimed:
                raise DuplicateIdError(
                    f"pattern {pid!r} is a member of both {claimed[pid]!r} and {mid!r}")
            claimed[pid] = mid

        effects = []
        pairs = set()
        for raw in _require(m, "effects", list, where):
            eff = _parse_effect(raw, f"{where}/{mid}/effects")
            if eff.pattern_id not in pattern_ids:
                raise DanglingReferenceError(
                    f"effect references unknown pattern {eff.pattern_id!r}")
            if eff.attribute_id not in attr_ids:
                raise DanglingReferenceError(
                    f"effect references unknown attribute {eff.attribute_id!r}")
            if eff.pattern_id not in members:
                raise SchemaError(
                    f"{mid}: effect pattern {eff.pattern_id!r} is not a member of this model")
            key = (eff.pattern_id, eff.attribute_id)
            if key in pairs:
                raise DuplicateIdError(f"{mid}: duplicate effect edge {key}")
            pairs.add(key)
            effects.append(eff)

        relations = []
        rel_keys = set()
        for raw in _require(m, "relations", list, where):
            rel = _parse_relation(raw, f"{where}/{mid}/relations")
            for pid in (rel.from_pattern, rel.to_pattern):
                if pid not in pattern_ids:
                    raise DanglingReferenceError(
                        f"{mid}: relation references unknown pattern {pid!r}")
            if rel.scope_attribute is not None and rel.scope_attribute not in attr_ids:
                raise DanglingReferenceError(
                    f"{mid}: relation scope references unknown attribute "
                    f"{rel.scope_attribute!r}")
            if rel.from_pattern == rel.to_pattern:
                raise SchemaError(f"{mid}: self-relation on {rel.from_pattern!r}")
            # alternatives are stored once; a mirrored duplicate is a data error
            key = (rel.kind,) + tuple(sorted((rel.from_pattern, rel.to_pattern))) \
                if rel.kind == "alternative" else (rel.kind, rel.from_pattern, rel.to_pattern)
            if key in rel_keys:
                raise DuplicateIdError(f"{mid}: duplicate relation {key}")
            rel_keys.add(key)
            relations.append(rel)

        constraint_keys = tuple(doc.get("constraint_keys", ()))
        constraints = []
        for raw in _require(m, "constraints", list, where):
            con = _parse_constraint(raw, f"{where}/{mid}/constraints")
            if con.pattern_id not in pattern_ids:
                raise DanglingReferenceError(
                    f"{mid}: constraint references unknown pattern {con.pattern_id!r}")
            if con.key not in constraint_keys:
                raise SchemaError(
                    f"{mid}: constraint key {con.key!r} not declared in constraint_keys")
            constraints.append(con)

        models.append(DecisionModel(
            id=mid, member_pattern_ids=members, effects=tuple(effects),
            relations=tuple(relations), constraints=tuple(constraints)))

    studies = []
    seen = set()
    for c in _require(doc, "case_studies", list, source):
        where = f"{source}/case_studies"
        _check_keys(c, {"id", "pattern_ids", "component_notes"}, where)
        cid = _check_enum(_require(c, "id", str, where), CASE_STUDY_IDS, where)
        if cid in seen:
            raise DuplicateIdError(f"case study {cid!r} defined twice")
        seen.add(cid)
        pids = tuple(_require(c, "pattern_ids", list, where))
        for pid in pids:
            if pid not in pattern_ids:
                raise DanglingReferenceError(f"case study {cid!r}: unknown pattern {pid!r}")
        notes = c.get("component_notes", {})
        if not isinstance(notes, dict):
            raise SchemaError(f"{where}/{cid}: component_notes must be an object")
        studies.append(CaseStudyMapping(id=cid, pattern_ids=pids,
                                        component_notes=dict(notes)))

    return PatternCatalog(
        schema_version=version,
        canonical_content=bool(doc.get("canonical_content", False)),
        constraint_keys=tuple(doc.get("constraint_keys", ())),
        attributes=tuple(attributes),
        patterns=tuple(patterns),
        decision_models=tuple(models),
        case_studies=tuple(studies),
    )


def load_catalog(path: str | Path) -> PatternCatalog:
    """Load and structurally verify a catalog file."""
    return parse_catalog(load_json_path(path), source=str(path))


def default_catalog_path() -> Path:
    return Path(str(resources.files("fedarch") / "data" / "catalog.json"))


def load_default_catalog() -> PatternCatalog:
    return load_catalog(default_catalog_path())


# --------------------------------------------------------------------------
# serialization (round-trips through parse_catalog)


def serialize_catalog(cat: PatternCatalog) -> dict:
    return {
        "schema_version": cat.schema_version,
        "canonical_content": cat.canonical_content,
        "constraint_keys": list(cat.constraint_keys),
        "attributes": [
            {"id": a.id, "name": a.name, "higher_is_better": a.higher_is_better}
            for a in cat.attributes],
        "patterns": [
            {"id": p.id, "name": p.name, "category": p.category, "summary": p.summary,
             "source_anchor": p.source_anchor,
             **({"aliases": list(p.aliases)} if p.aliases else {})}
            for p in cat.patterns],
        "decision_models": [
            {"id": m.id,
             "member_pattern_ids": list(m.member_pattern_ids),
             "effects": [
                 {"pattern_id": e.pattern_id, "attribute_id": e.attribute_id,
                  "direction": e.direction, "note": e.note,
                  "source_anchor": e.source_anchor,
                  **({"weight": e.weight} if e.weight != 1.0 else {})}
                 for e in m.effects],
             "relations": [
                 {"kind": r.kind, "from_pattern": r.from_pattern,
                  "to_pattern": r.to_pattern, "scope_attribute": r.scope_attribute,
                  "note": r.note}
                 for r in m.relations],
             "constraints": [
                 {"pattern_id": c.pattern_id, "key": c.key, "description": c.description}
                 for c in m.constraints]}
            for m in cat.decision_models],
        "case_studies": [
            {"id": c.id, "pattern_ids": list(c.pattern_ids),
             "component_notes": dict(c.component_notes)}
            for c in cat.case_studies],
    }


# --------------------------------------------------------------------------
# validation (violations as data)


def validate_catalog(cat: PatternCatalog) -> list[Violation]:
    """Content-level checks; empty list means valid.

    Safe to run on hand-built catalogs whose invariants are broken; never
    raises on bad content. Idempotent and side-effect free.
    """
    out: list[Violation] = []
    add = lambda code, msg: out.append(Violation(code, msg))

    attr_ids = {a.id for a in cat.attributes}
    pattern_ids = {p.id for p in cat.patterns}

    if len(attr_ids) != len(cat.attributes):
        add("duplicate-id", "attribute ids are not unique")
    if len(pattern_ids) != len(cat.patterns):
        add("duplicate-id", "pattern ids are not unique")

    membership: dict[str, list[str]] = {}
    for m in cat.decision_models:
        for pid in m.member_pattern_ids:
            membership.setdefault(pid, []).append(m.id)
    for pid, mids in membership.items():
        if len(mids) > 1:
            add("membership", f"pattern {pid!r} is in several decision models: {mids}")
    for p in cat.patterns:
        if p.id not in membership:
            add("membership", f"pattern {p.id!r} belongs to no decision model")

    effect_count: dict[str, int] = {p.id: 0 for p in cat.patterns}
    attr_used: set[str] = set()
    for m in cat.decision_models:
        members = set(m.member_pattern_ids)
        pairs = set()
        for e in m.effects:
            if e.pattern_id not in pattern_ids:
                add("dangling", f"{m.id}: effect on unknown pattern {e.pattern_id!r}")
            elif e.pattern_id not in members:
                add("membership", f"{m.id}: effect pattern {e.pattern_id!r} not a member")
            if e.attribute_id not in attr_ids:
                add("dangling", f"{m.id}: effect on unknown attribute {e.attribute_id!r}")
            key = (e.pattern_id, e.attribute_id)
            if key in pairs:
                add("duplicate-id", f"{m.id}: duplicate effect edge {key}")
            pairs.add(key)
            effect_count[e.pattern_id] = effect_count.get(e.pattern_id, 0) + 1
            attr_used.add(e.attribute_id)
        alt_seen = set()
        for r in m.relations:
            for pid in (r.from_pattern, r.to_pattern):
                if pid not in pattern_ids:
                    add("dangling", f"{m.id}: relation endpoint {pid!r} unknown")
                elif pid not in members:
                    add("membership",
                        f"{m.id}: relation endpoint {pid!r} outside this decision model")
            if r.from_pattern == r.to_pattern:
                add("self-relation", f"{m.id}: {r.from_pattern!r} relates to itself")
            if r.scope_attribute is not None and r.scope_attribute not in attr_ids:
                add("dangling", f"{m.id}: relation scope {r.scope_attribute!r} unknown")
            if r.kind == "alternative":
                key = tuple(sorted((r.from_pattern, r.to_pattern)))
                if key in alt_seen:
                    add("duplicate-id",
                        f"{m.id}: alternative {key} stored twice (stored once, queried both ways)")
                alt_seen.add(key)
        for c in m.constraints:
            if c.pattern_id not in pattern_ids:
                add("dangling", f"{m.id}: constraint on unknown pattern {c.pattern_id!r}")
            if c.key not in cat.constraint_keys:
                add("schema", f"{m.id}: constraint key {c.key!r} not in catalog header")

    for pid, n in effect_count.items():
        if n == 0:
            add("coverage", f"pattern {pid!r} has no effect edge")
    for aid in sorted(attr_ids - attr_used):
        add("coverage", f"attribute {aid!r} is referenced by no effect edge")

    for cs in cat.case_studies:
        for pid in cs.pattern_ids:
            if pid not in pattern_ids:
                add("dangling", f"case study {cs.id!r}: unknown pattern {pid!r}")

    if cat.canonical_content:
        out.extend(_validate_canonical(cat))
    return out


def _validate_canonical(cat: PatternCatalog) -> list[Violation]:
    """Compare a canonical-flagged catalog against the frozen census."""
    out: list[Violation] = []
    add = lambda code, msg: out.append(Violation(code, msg))

    if len(cat.patterns) != canonical.CANONICAL_PATTERN_COUNT:
        add("census", f"expected {canonical.CANONICAL_PATTERN_COUNT} patterns, "
                      f"found {len(cat.patterns)}")
    for p in cat.patterns:
        want = canonical.CANONICAL_CATEGORY_OF.get(p.id)
        if want is None:
            add("census", f"unexpected pattern {p.id!r} in canonical catalog")
        elif p.category != want:
            add("census", f"pattern {p.id!r} category {p.category!r}, expected {want!r}")
    for pid in set(canonical.CANONICAL_CATEGORY_OF) - {p.id for p in cat.patterns}:
        add("census", f"canonical pattern {pid!r} missing")

    members = {m.id: set(m.member_pattern_ids) for m in cat.decision_models}
    for mid, want in canonical.CANONICAL_MODEL_MEMBERS.items():
        got = members.get(mid, set())
        if got != want:
            add("census", f"{mid}: members {sorted(got)} != expected {sorted(want)}")

    effects = {(m.id, e.pattern_id, e.attribute_id, e.direction)
               for m in cat.decision_models for e in m.effects}
    want_effects = set(canonical.CANONICAL_EFFECTS)
    for edge in sorted(want_effects - effects):
        add("census", f"missing canonical effect edge {edge}")
    for edge in sorted(effects - want_effects):
        add("census", f"unexpected effect edge {edge}")

    def rel_key(mid, r):
        if r.kind == "alternative":
            a, b = sorted((r.from_pattern, r.to_pattern))
            return (mid, r.kind, a, b, r.scope_attribute)
        return (mid, r.kind, r.from_pattern, r.to_pattern, r.scope_attribute)

    relations = {rel_key(m.id, r) for m in cat.decision_models for r in m.relations}
    want_relations = set()
    for mid, kind, a, b, scope in canonical.CANONICAL_RELATIONS:
        if kind == "alternative":
            a, b = sorted((a, b))
        want_relations.add((mid, kind, a, b, scope))
    for edge in sorted(want_relations - relations, key=str):
        add("census", f"missing canonical relation {edge}")
    for edge in sorted(relations - want_relations, key=str):
        add("census", f"unexpected relation {edge}")

    constraints = {(m.id, c.pattern_id, c.key)
                   for m in cat.decision_models for c in m.constraints}
    want_constraints = set(canonical.CANONICAL_CONSTRAINTS)
    for edge in sorted(want_constraints - constraints):
        add("census", f"missing canonical constraint {edge}")
    for edge in sorted(constraints - want_constraints):
        add("census", f"unexpected constraint {edge}")

    studies = {c.id: set(c.pattern_ids) for c in cat.case_studies}
    for cid, want in canonical.CANONICAL_CASE_STUDIES.items():
        got = studies.get(cid, set())
        if got != want:
            add("census", f"case study {cid!r}: patterns {sorted(got)} != {sorted(want)}")
    return out


# --------------------------------------------------------------------------
# queries


def query_pattern(cat: PatternCatalog, pattern_id: str) -> PatternNeighborhood:
    """One pattern plus its effects, relations (either end) and constraints."""
    pattern = cat.pattern(pattern_id)  # NotFoundError on miss; resolves aliases
    model = cat.model_of(pattern.id)
    return PatternNeighborhood(
        pattern=pattern,
        decision_model_id=model.id,
        effects=tuple(e for e in model.effects if e.pattern_id == pattern.id),
        relations=tuple(r for r in model.relations
                        if pattern.id in (r.from_pattern, r.to_pattern)),
        constraints=tuple(c for c in model.constraints if c.pattern_id == pattern.id),
    )


def edges_of(cat: PatternCatalog, decision_model_id: str) -> list[Effect]:
    """All effect edges of one decision model, ordered (pattern, attribute)."""
    model = cat.decision_model(decision_model_id)
    return sorted(model.effects, key=lambda e: (e.pattern_id, e.attribute_id))
