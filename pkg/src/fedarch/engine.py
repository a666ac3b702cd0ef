"""Decision engine: map weighted requirements to pattern selections.

Selection semantics, applied per decision model:

* complement closure — a pattern with a `complements` relation can only be
  chosen together with its required initial pattern (the relation target);
* alternative exclusivity — two patterns joined by an unscoped
  `alternative` relation never appear in the same selection (scoped
  alternatives are annotations only);
* qualification override — when a complement pair is chosen and both
  patterns touch the same attribute with opposite directions, the
  dependent pattern's qualification replaces the initial pattern's;
* constraints are hard preconditions: a pattern is only adoptable when all
  its constraint keys are present in the profile's context flags.

Scoring is the weighted sum of signed effect edges after the override
rule. Ranking is exhaustive subset enumeration per decision model (at most
2^5 subsets), ordered by score, then fewer patterns, then pattern ids.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from math import isfinite
from typing import Optional

from . import canonical
from .catalog import Constraint, Effect, PatternCatalog, Relation, serialize_catalog
from .errors import (
    InfeasibleProfileError,
    MixedModelError,
    NotFoundError,
    SchemaError,
    UnknownAttributeError,
)
from .jsonutil import canonical_dumps


@dataclass(frozen=True)
class RequirementProfile:
    """Weighted quality attributes plus environment context."""
    weights: dict[str, float] = field(default_factory=dict)
    context_flags: frozenset[str] = frozenset()
    forced_in: frozenset[str] = frozenset()
    forced_out: frozenset[str] = frozenset()

    @staticmethod
    def from_dict(doc: dict) -> "RequirementProfile":
        if not isinstance(doc, dict):
            raise SchemaError("profile must be an object")
        unknown = set(doc) - {"weights", "context_flags", "forced_in", "forced_out"}
        if unknown:
            raise SchemaError(f"profile: unknown field(s) {sorted(unknown)}")
        weights = doc.get("weights", {})
        if not isinstance(weights, dict):
            raise SchemaError("profile: weights must be an object")
        return RequirementProfile(
            weights={str(k): float(v) for k, v in weights.items()},
            context_flags=frozenset(doc.get("context_flags", ())),
            forced_in=frozenset(doc.get("forced_in", ())),
            forced_out=frozenset(doc.get("forced_out", ())),
        )

    def to_dict(self) -> dict:
        return {
            "weights": dict(sorted(self.weights.items())),
            "context_flags": sorted(self.context_flags),
            "forced_in": sorted(self.forced_in),
            "forced_out": sorted(self.forced_out),
        }


def validate_profile(cat: PatternCatalog, profile: RequirementProfile) -> None:
    """Resolve every id in the profile against the catalog or raise."""
    attr_ids = cat.attribute_ids()
    for aid, w in profile.weights.items():
        if aid not in attr_ids:
            raise UnknownAttributeError(f"unknown attribute in weights: {aid!r}")
        if not isfinite(w) or w < 0:
            raise SchemaError(f"weight for {aid!r} must be finite and non-negative")
    for pid in profile.forced_in | profile.forced_out:
        if not cat.has_pattern(pid):
            raise NotFoundError(f"forced pattern {pid!r} not in catalog")
    for flag in profile.context_flags:
        if flag not in cat.constraint_keys:
            raise SchemaError(f"unknown context flag {flag!r}")
    if profile.forced_in & profile.forced_out:
        raise InfeasibleProfileError(
            f"patterns both forced in and out: {sorted(profile.forced_in & profile.forced_out)}")


@dataclass(frozen=True)
class FeasibilityViolation:
    kind: str  # complement_closure | alternative_exclusivity | constraint | forced
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": self.message}


@dataclass(frozen=True)
class Selection:
    decision_model_id: str
    chosen: tuple[str, ...]  # sorted
    score: float
    combined_effects: tuple[Effect, ...]
    violated_constraints: tuple[FeasibilityViolation, ...] = ()

    def to_dict(self) -> dict:
        return {
            "decision_model_id": self.decision_model_id,
            "chosen": list(self.chosen),
            "score": self.score,
            "combined_effects": [
                {"pattern_id": e.pattern_id, "attribute_id": e.attribute_id,
                 "direction": e.direction, "weight": e.weight,
                 "note": e.note, "source_anchor": e.source_anchor}
                for e in self.combined_effects],
            "violated_constraints": [v.to_dict() for v in self.violated_constraints],
        }


@dataclass(frozen=True)
class Recommendation:
    profile: RequirementProfile
    catalog_version: dict
    best: dict[str, Selection]          # decision model id -> top selection
    rankings: dict[str, tuple[Selection, ...]]  # all feasible selections, ranked

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "catalog_version": self.catalog_version,
            "models": {
                mid: {"best": self.best[mid].to_dict(),
                      "ranking": [s.to_dict() for s in self.rankings[mid]]}
                for mid in sorted(self.best)},
        }


def catalog_version_info(cat: PatternCatalog) -> dict:
    payload = canonical_dumps(serialize_catalog(cat)).encode("utf-8")
    return {"schema_version": cat.schema_version,
            "content_hash": hashlib.sha256(payload).hexdigest()[:12]}


# --------------------------------------------------------------------------
# effect combination and feasibility


def combined_effects(cat: PatternCatalog, chosen: set[str] | frozenset[str]) -> list[Effect]:
    """Union of the chosen patterns' effects with the override rule applied.

    For each complements(A -> B) with both ends chosen: on any attribute
    that A and B qualify in opposite directions, B's edge is dropped and
    A's kept. Output is ordered by (pattern_id, attribute_id).
    """
    if not chosen:
        return []
    models = {cat.model_of(pid).id for pid in chosen}
    if len(models) > 1:
        raise MixedModelError(f"chosen set spans decision models: {sorted(models)}")
    model = cat.decision_model(models.pop())

    effects = [e for e in model.effects if e.pattern_id in chosen]
    by_pattern: dict[str, dict[str, Effect]] = {}
    for e in effects:
        by_pattern.setdefault(e.pattern_id, {})[e.attribute_id] = e

    dropped: set[tuple[str, str]] = set()
    for rel in model.relations:
        if rel.kind != "complements":
            continue
        a, b = rel.from_pattern, rel.to_pattern
        if a not in chosen or b not in chosen:
            continue
        for attr, eff_a in by_pattern.get(a, {}).items():
            eff_b = by_pattern.get(b, {}).get(attr)
            if eff_b is not None and eff_b.direction != eff_a.direction:
                dropped.add((b, attr))

    kept = [e for e in effects if (e.pattern_id, e.attribute_id) not in dropped]
    return sorted(kept, key=lambda e: (e.pattern_id, e.attribute_id))


def is_feasible(cat: PatternCatalog, profile: RequirementProfile,
                chosen: set[str] | frozenset[str],
                model_id: Optional[str] = None,
                ) -> tuple[bool, list[FeasibilityViolation]]:
    """Check one candidate selection; infeasibility is a result, not an error.

    Force lists are applied per decision model: only forced patterns that
    are members of the selection's model constrain it. `model_id` names the
    model when `chosen` is empty (otherwise it is inferred); an empty set
    with no model context only checks the trivial conditions.
    """
    chosen = frozenset(chosen)
    violations: list[FeasibilityViolation] = []

    if chosen:
        models = {cat.model_of(pid).id for pid in chosen}
        if len(models) > 1:
            raise MixedModelError(f"chosen set spans decision models: {sorted(models)}")
        inferred = models.pop()
        if model_id is not None and model_id != inferred:
            raise MixedModelError(
                f"chosen set belongs to {inferred!r}, not {model_id!r}")
        model_id = inferred
    if model_id is not None:
        model = cat.decision_model(model_id)
        members = set(model.member_pattern_ids)
    else:
        model = None
        members = set()

    if model is not None:
        for rel in model.relations:
            if rel.kind == "complements" and rel.from_pattern in chosen \
                    and rel.to_pattern not in chosen:
                violations.append(FeasibilityViolation(
                    "complement_closure",
                    f"{rel.from_pattern} requires {rel.to_pattern}"))
            if rel.kind == "alternative" and rel.scope_attribute is None \
                    and rel.from_pattern in chosen and rel.to_pattern in chosen:
                violations.append(FeasibilityViolation(
                    "alternative_exclusivity",
                    f"{rel.from_pattern} and {rel.to_pattern} are alternatives"))
        for con in model.constraints:
            if con.pattern_id in chosen and con.key not in profile.context_flags:
                violations.append(FeasibilityViolation(
                    "constraint",
                    f"{con.pattern_id} needs context flag {con.key}"))

    for pid in sorted(profile.forced_in & members - chosen):
        violations.append(FeasibilityViolation("forced", f"{pid} is forced in but not chosen"))
    for pid in sorted(chosen & profile.forced_out):
        violations.append(FeasibilityViolation("forced", f"{pid} is forced out but chosen"))
    return (not violations, violations)


def score_selection(cat: PatternCatalog, profile: RequirementProfile,
                    chosen: set[str] | frozenset[str]) -> float:
    """Weighted sum of signed effects: benefit adds, tradeoff subtracts."""
    attr_ids = cat.attribute_ids()
    for aid in profile.weights:
        if aid not in attr_ids:
            raise UnknownAttributeError(f"unknown attribute in weights: {aid!r}")
    total = 0.0
    for e in combined_effects(cat, chosen):
        total += e.sign * e.weight * profile.weights.get(e.attribute_id, 0.0)
    return total


# --------------------------------------------------------------------------
# recommendation


def _ranking_key(sel: Selection) -> tuple:
    # higher score first; prefer fewer patterns; then pattern ids
    return (-sel.score, len(sel.chosen), ",".join(sel.chosen))


def _enumerate_model(cat: PatternCatalog, profile: RequirementProfile,
                     model_id: str) -> list[Selection]:
    model = cat.decision_model(model_id)
    members = sorted(model.member_pattern_ids)
    feasible: list[Selection] = []
    for r in range(len(members) + 1):
        for combo in itertools.combinations(members, r):
            chosen = frozenset(combo)
            ok, _ = is_feasible(cat, profile, chosen, model_id=model_id)
            if not ok:
                continue
            feasible.append(Selection(
                decision_model_id=model_id,
                chosen=tuple(sorted(chosen)),
                score=score_selection(cat, profile, chosen),
                combined_effects=tuple(combined_effects(cat, chosen)),
            ))
    feasible.sort(key=_ranking_key)
    return feasible


def recommend(cat: PatternCatalog, profile: RequirementProfile) -> Recommendation:
    """Rank every feasible selection of each decision model.

    Exhaustive enumeration is the algorithm: each model has at most five
    member patterns, so at most 32 candidate subsets.
    """
    validate_profile(cat, profile)
    best: dict[str, Selection] = {}
    rankings: dict[str, tuple[Selection, ...]] = {}
    for model in cat.decision_models:
        ranked = _enumerate_model(cat, profile, model.id)
        if not ranked:
            forced = sorted(profile.forced_in & set(model.member_pattern_ids))
            raise InfeasibleProfileError(
                f"{model.id}: no feasible selection (forced_in={forced})")
        best[model.id] = ranked[0]
        rankings[model.id] = tuple(ranked)
    return Recommendation(profile=profile, catalog_version=catalog_version_info(cat),
                          best=best, rankings=rankings)


# --------------------------------------------------------------------------
# what-if


@dataclass(frozen=True)
class WhatIfResult:
    before: Recommendation
    after: Recommendation
    effect_delta: dict

    def to_dict(self) -> dict:
        return {"before": self.before.to_dict(), "after": self.after.to_dict(),
                "effect_delta": self.effect_delta}


def apply_delta(profile: RequirementProfile, delta: dict) -> RequirementProfile:
    if not isinstance(delta, dict):
        raise SchemaError("delta must be an object")
    unknown = set(delta) - {"set_weights", "scale_weights", "add_forced_in",
                            "remove_forced_in", "add_forced_out", "remove_forced_out",
                            "add_context_flags", "remove_context_flags"}
    if unknown:
        raise SchemaError(f"delta: unknown field(s) {sorted(unknown)}")
    weights = dict(profile.weights)
    for k, v in delta.get("set_weights", {}).items():
        weights[str(k)] = float(v)
    scale = delta.get("scale_weights")
    if scale is not None:
        weights = {k: v * float(scale) for k, v in weights.items()}
    return RequirementProfile(
        weights=weights,
        context_flags=(profile.context_flags | frozenset(delta.get("add_context_flags", ())))
        - frozenset(delta.get("remove_context_flags", ())),
        forced_in=(profile.forced_in | frozenset(delta.get("add_forced_in", ())))
        - frozenset(delta.get("remove_forced_in", ())),
        forced_out=(profile.forced_out | frozenset(delta.get("add_forced_out", ())))
        - frozenset(delta.get("remove_forced_out", ())),
    )


def _net_by_attribute(selection: Selection) -> dict[str, float]:
    net: dict[str, float] = {}
    for e in selection.combined_effects:
        net[e.attribute_id] = net.get(e.attribute_id, 0.0) + e.sign * e.weight
    return net


def what_if(cat: PatternCatalog, profile: RequirementProfile, delta: dict) -> WhatIfResult:
    """Compare recommendations before and after a profile change."""
    before = recommend(cat, profile)
    after = recommend(cat, apply_delta(profile, delta))
    report: dict = {"models": {}, "net_attribute_changes": {}}
    for mid in sorted(before.best):
        b, a = set(before.best[mid].chosen), set(after.best[mid].chosen)
        report["models"][mid] = {
            "added_patterns": sorted(a - b),
            "removed_patterns": sorted(b - a),
        }
        net_b = _net_by_attribute(before.best[mid])
        net_a = _net_by_attribute(after.best[mid])
        for attr in sorted(set(net_b) | set(net_a)):
            vb, va = net_b.get(attr, 0.0), net_a.get(attr, 0.0)
            if vb != va:
                report["net_attribute_changes"].setdefault(mid, {})[attr] = {
                    "before": vb, "after": va}
    return WhatIfResult(before=before, after=after, effect_delta=report)


# --------------------------------------------------------------------------
# rationale


@dataclass(frozen=True)
class RationaleEntry:
    pattern_id: str
    forced: bool
    satisfied: tuple[Effect, ...]   # benefit edges after override
    tradeoffs: tuple[Effect, ...]   # tradeoff edges after override

    def to_dict(self) -> dict:
        def edges(es):
            return [{"attribute_id": e.attribute_id, "note": e.note,
                     "source_anchor": e.source_anchor, "weight": e.weight}
                    for e in es]
        return {"pattern_id": self.pattern_id, "forced": self.forced,
                "satisfied": edges(self.satisfied), "tradeoffs": edges(self.tradeoffs)}


@dataclass(frozen=True)
class RationaleReport:
    decision_model_id: str
    entries: tuple[RationaleEntry, ...]
    applied_relations: tuple[Relation, ...]
    applied_constraints: tuple[Constraint, ...]

    def to_dict(self) -> dict:
        return {
            "decision_model_id": self.decision_model_id,
            "entries": [e.to_dict() for e in self.entries],
            "applied_relations": [
                {"kind": r.kind, "from_pattern": r.from_pattern, "to_pattern": r.to_pattern,
                 "scope_attribute": r.scope_attribute, "note": r.note}
                for r in self.applied_relations],
            "applied_constraints": [
                {"pattern_id": c.pattern_id, "key": c.key, "description": c.description}
                for c in self.applied_constraints],
        }


def explain(cat: PatternCatalog, selection: Selection,
            profile: Optional[RequirementProfile] = None) -> RationaleReport:
    """Design rationale for one feasible selection.

    Every chosen pattern appears with its benefit edges (or a forced
    marker) and every tradeoff edge it brings in after the override rule.
    """
    chosen = set(selection.chosen)
    if not chosen:
        return RationaleReport(selection.decision_model_id, (), (), ())
    model = cat.decision_model(selection.decision_model_id)
    effects = combined_effects(cat, chosen)
    forced = profile.forced_in if profile is not None else frozenset()

    entries = []
    for pid in sorted(chosen):
        mine = [e for e in effects if e.pattern_id == pid]
        entries.append(RationaleEntry(
            pattern_id=pid,
            forced=pid in forced,
            satisfied=tuple(e for e in mine if e.direction == "benefit"),
            tradeoffs=tuple(e for e in mine if e.direction == "tradeoff"),
        ))
    relations = tuple(
        r for r in model.relations
        if r.from_pattern in chosen and r.to_pattern in chosen)
    constraints = tuple(c for c in model.constraints if c.pattern_id in chosen)
    return RationaleReport(model.id, tuple(entries), relations, constraints)


def render_adr(cat: PatternCatalog, rec: Recommendation) -> str:
    """Human-readable architecture decision record, one section per model."""
    lines = ["# Architecture decision record", ""]
    lines.append(f"Catalog {rec.catalog_version['schema_version']}"
                 f" ({rec.catalog_version['content_hash']})")
    lines.append("")
    weights = {k: v for k, v in rec.profile.weights.items() if v > 0}
    if weights:
        lines.append("Requirement weights: " +
                     ", ".join(f"{k}={v:g}" for k, v in sorted(weights.items())))
    if rec.profile.context_flags:
        lines.append("Context: " + ", ".join(sorted(rec.profile.context_flags)))
    lines.append("")
    for mid in sorted(rec.best):
        sel = rec.best[mid]
        model = cat.decision_model(mid)
        lines.append(f"## {mid.replace('_', ' ').title()}")
        lines.append("")
        if not sel.chosen:
            lines.append("No pattern selected: no weighted requirement is "
                         "improved by this model's patterns under the given context.")
            lines.append("")
            continue
        report = explain(cat, sel, rec.profile)
        for entry in report.entries:
            pattern = cat.pattern(entry.pattern_id)
            lines.append(f"### {pattern.name}")
            lines.append("")
            lines.append(pattern.summary)
            lines.append("")
            if entry.forced:
                lines.append("- pinned by the requirement profile (forced in)")
            for e in entry.satisfied:
                lines.append(f"- satisfies **{e.attribute_id}**: {e.note} "
                             f"[{e.source_anchor}]")
            for e in entry.tradeoffs:
                lines.append(f"- accepted tradeoff **{e.attribute_id}**: {e.note} "
                             f"[{e.source_anchor}]")
            lines.append("")
        if report.applied_relations:
            lines.append("Relations applied:")
            for r in report.applied_relations:
                scope = f" (on {r.scope_attribute})" if r.scope_attribute else ""
                lines.append(f"- {r.from_pattern} {r.kind} {r.to_pattern}{scope}: {r.note}")
            lines.append("")
        if report.applied_constraints:
            lines.append("Adoption conditions satisfied by the context:")
            for c in report.applied_constraints:
                lines.append(f"- {c.pattern_id}: {c.key} — {c.description}")
            lines.append("")
        lines.append(f"Selection score: {sel.score:g}")
        lines.append("")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# case studies


@dataclass(frozen=True)
class ConsistencyReport:
    case_study_id: str
    pattern_ids: tuple[str, ...]
    models_exercised: tuple[str, ...]
    closure_ok: bool
    closure_violations: tuple[str, ...]
    matches_canonical: bool

    def to_dict(self) -> dict:
        return {
            "case_study_id": self.case_study_id,
            "pattern_ids": list(self.pattern_ids),
            "models_exercised": list(self.models_exercised),
            "closure_ok": self.closure_ok,
            "closure_violations": list(self.closure_violations),
            "matches_canonical": self.matches_canonical,
        }


def check_case_study(cat: PatternCatalog, case_id: str) -> ConsistencyReport:
    """Verify an architecture mapping is consistent with the catalog."""
    study = cat.case_study(case_id)  # NotFoundError on miss
    mapped = set(study.pattern_ids)
    models = []
    closure_violations = []
    for model in cat.decision_models:
        members = mapped & set(model.member_pattern_ids)
        if not members:
            continue
        models.append(model.id)
        for rel in model.relations:
            if rel.kind == "complements" and rel.from_pattern in members \
                    and rel.to_pattern not in members:
                closure_violations.append(
                    f"{model.id}: {rel.from_pattern} mapped without {rel.to_pattern}")
    want = canonical.CANONICAL_CASE_STUDIES.get(case_id)
    return ConsistencyReport(
        case_study_id=case_id,
        pattern_ids=tuple(sorted(mapped)),
        models_exercised=tuple(sorted(models)),
        closure_ok=not closure_violations,
        closure_violations=tuple(closure_violations),
        matches_canonical=(want is not None and mapped == want),
    )
