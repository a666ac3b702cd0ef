import random

import pytest

from fedarch.catalog import load_default_catalog, default_catalog_path, parse_catalog
from fedarch.engine import (
    RequirementProfile,
    check_case_study,
    combined_effects,
    explain,
    is_feasible,
    recommend,
    render_adr,
    score_selection,
    what_if,
)
from fedarch.errors import (
    InfeasibleProfileError,
    MixedModelError,
    NotFoundError,
    UnknownAttributeError,
)
from fedarch.jsonutil import canonical_dumps

from oracle_engine import load_doc, oracle_best


@pytest.fixture(scope="module")
def catalog():
    return load_default_catalog()


@pytest.fixture(scope="module")
def doc():
    return load_doc(default_catalog_path())


def P(weights=None, flags=(), fin=(), fout=()):
    return RequirementProfile(weights=weights or {}, context_flags=frozenset(flags),
                              forced_in=frozenset(fin), forced_out=frozenset(fout))


# --- combined_effects ------------------------------------------------------

def test_singleton_effects_unchanged(catalog):
    own = combined_effects(catalog, {"client_selector"})
    assert {(e.attribute_id, e.direction) for e in own} == {
        ("training_efficiency", "benefit"), ("model_quality", "tradeoff")}


def test_empty_set_no_effects(catalog):
    assert combined_effects(catalog, set()) == []


def test_override_keeps_dependent_pattern_edge(catalog):
    # canonical override case: the co-versioning registry depends on the
    # configurator; both touch computation_efficiency in opposite directions,
    # so the configurator's benefit is replaced by the registry's tradeoff.
    chosen = {"model_co_versioning_registry", "training_configurator"}
    eff = combined_effects(catalog, chosen)
    comp = [(e.pattern_id, e.direction) for e in eff
            if e.attribute_id == "computation_efficiency"]
    assert comp == [("model_co_versioning_registry", "tradeoff")]
    # non-conflicting configurator edges survive
    assert ("training_configurator", "usability") in {
        (e.pattern_id, e.attribute_id) for e in eff}


def test_override_synthetic_registry_selector():
    # a variant catalog where the registry also hurts training_efficiency:
    # choosing the selector (dependent end) must override the registry's edge
    doc = load_doc(default_catalog_path())
    doc["canonical_content"] = False
    cm = next(m for m in doc["decision_models"] if m["id"] == "client_management")
    cm["effects"].append({
        "pattern_id": "client_registry", "attribute_id": "training_efficiency",
        "direction": "tradeoff", "note": "x", "source_anchor": "x"})
    cat = parse_catalog(doc)
    eff = combined_effects(cat, {"client_registry", "client_selector"})
    train = [(e.pattern_id, e.direction) for e in eff
             if e.attribute_id == "training_efficiency"]
    assert train == [("client_selector", "benefit")]


def test_mixed_model_rejected(catalog):
    with pytest.raises(MixedModelError):
        combined_effects(catalog, {"client_selector", "secure_aggregator"})


# --- feasibility -----------------------------------------------------------

def test_selector_needs_registry(catalog):
    ok, violations = is_feasible(catalog, P(), {"client_selector"})
    assert not ok
    assert violations[0].kind == "complement_closure"


def test_alternative_exclusivity(catalog):
    ok, violations = is_feasible(
        catalog, P(flags=["requires_owner_consent"]),
        {"client_selector", "client_cluster", "client_registry"})
    assert not ok
    assert {v.kind for v in violations} == {"alternative_exclusivity"}


def test_constraint_filtering(catalog):
    ok, violations = is_feasible(catalog, P(), {"multi_task_model_trainer"})
    assert not ok
    assert violations[0].kind == "constraint"
    ok, _ = is_feasible(catalog, P(flags=["requires_cross_app_metadata"]),
                        {"multi_task_model_trainer"})
    assert ok


def test_scoped_alternative_not_exclusive(catalog):
    ok, _ = is_feasible(catalog, P(flags=["requires_cross_app_metadata"]),
                        {"heterogeneous_data_handler", "incentive_registry"})
    assert ok


# --- scoring ---------------------------------------------------------------

def test_score_cluster_plus_registry(catalog):
    # hand sum over the client-management edges:
    #   cluster: +training_efficiency(1.0) - computation_efficiency(0.5)
    #   registry: maintainability/reliability/traceability/data_privacy all weight 0
    profile = P({"training_efficiency": 1.0, "model_quality": 1.0,
                 "computation_efficiency": 0.5},
                flags=["requires_owner_consent"])
    assert score_selection(catalog, profile,
                           {"client_cluster", "client_registry"}) == pytest.approx(0.5)


def test_score_zero_weights(catalog):
    assert score_selection(catalog, P(), {"client_registry"}) == 0.0


def test_score_compressor_with_configurator(catalog):
    profile = P({"communication_efficiency": 1.0})
    got = score_selection(catalog, profile,
                          {"message_compressor", "training_configurator"})
    assert got == pytest.approx(1.0)


def test_score_unknown_attribute(catalog):
    with pytest.raises(UnknownAttributeError):
        score_selection(catalog, P({"speed": 1.0}), {"client_registry"})


# --- recommend -------------------------------------------------------------

def test_empty_profile_selects_nothing(catalog):
    rec = recommend(catalog, P())
    for mid, sel in rec.best.items():
        assert sel.chosen == ()
        assert sel.score == 0.0


def test_recommend_client_management_example(catalog):
    profile = P({"training_efficiency": 1.0, "model_quality": 1.0,
                 "computation_efficiency": 0.5, "maintainability": 0.1,
                 "reliability": 0.1, "data_privacy": 0.2},
                flags=["requires_owner_consent"])
    rec = recommend(catalog, profile)
    best = rec.best["client_management"]
    assert best.chosen == ("client_cluster", "client_registry")
    assert best.score == pytest.approx(0.5)


def test_missing_cost_flag_excludes_decentralised(catalog):
    profile = P({"reliability": 1.0, "accountability": 1.0})
    rec = recommend(catalog, profile)
    for sel in rec.rankings["model_aggregation"]:
        assert "decentralised_aggregator" not in sel.chosen
    # with the cost accepted, it dominates
    profile2 = P({"reliability": 1.0, "accountability": 1.0},
                 flags=["accepts_decentralisation_cost"])
    rec2 = recommend(catalog, profile2)
    assert rec2.best["model_aggregation"].chosen == ("decentralised_aggregator",)
    assert rec2.best["model_aggregation"].score == pytest.approx(2.0)


def test_infeasible_forced_in(catalog):
    profile = P(fin=["client_selector", "client_cluster", "client_registry"],
                flags=["requires_owner_consent"])
    with pytest.raises(InfeasibleProfileError):
        recommend(catalog, profile)


def test_forced_in_and_out_conflict(catalog):
    with pytest.raises(InfeasibleProfileError):
        recommend(catalog, P(fin=["client_registry"], fout=["client_registry"]))


def test_recommendation_is_deterministic(catalog):
    profile = P({"training_efficiency": 1.0, "security": 0.5},
                flags=["requires_owner_consent"])
    a = canonical_dumps(recommend(catalog, profile).to_dict())
    b = canonical_dumps(recommend(catalog, profile).to_dict())
    assert a == b


# --- what_if ---------------------------------------------------------------

def test_what_if_identity(catalog):
    profile = P({"training_efficiency": 1.0}, flags=["requires_owner_consent"])
    res = what_if(catalog, profile, {})
    assert res.before.to_dict() == res.after.to_dict()
    assert all(not d["added_patterns"] and not d["removed_patterns"]
               for d in res.effect_delta["models"].values())


def test_what_if_force_secure_aggregator(catalog):
    profile = P({"communication_efficiency": 1.0})
    res = what_if(catalog, profile, {"add_forced_in": ["secure_aggregator"]})
    after = res.after.best["model_aggregation"]
    assert "secure_aggregator" in after.chosen
    tradeoffs = {e.attribute_id for e in after.combined_effects
                 if e.direction == "tradeoff"}
    assert "model_quality" in tradeoffs
    assert "secure_aggregator" in \
        res.effect_delta["models"]["model_aggregation"]["added_patterns"]


def test_what_if_scaling_keeps_chosen_sets(catalog):
    profile = P({"training_efficiency": 1.0, "model_quality": 0.5,
                 "data_privacy": 0.25}, flags=["requires_owner_consent"])
    res = what_if(catalog, profile, {"scale_weights": 10.0})
    for mid in res.before.best:
        assert res.before.best[mid].chosen == res.after.best[mid].chosen


# --- explain ---------------------------------------------------------------

def test_explain_cites_anchors(catalog):
    profile = P({"maintainability": 1.0, "reliability": 1.0},
                flags=["requires_owner_consent"])
    rec = recommend(catalog, profile)
    sel = rec.best["client_management"]
    assert sel.chosen == ("client_registry",)
    report = explain(catalog, sel, profile)
    entry = report.entries[0]
    satisfied = {e.attribute_id for e in entry.satisfied}
    assert {"maintainability", "reliability"} <= satisfied
    assert all(e.source_anchor for e in entry.satisfied)
    tradeoffs = {e.attribute_id for e in entry.tradeoffs}
    assert "data_privacy" in tradeoffs


def test_explain_empty_selection(catalog):
    rec = recommend(catalog, P())
    report = explain(catalog, rec.best["model_training"])
    assert report.entries == ()


def test_explain_incentive_tradeoff(catalog):
    profile = P({"client_motivatability": 1.0})
    rec = recommend(catalog, profile)
    sel = rec.best["model_training"]
    assert "incentive_registry" in sel.chosen
    report = explain(catalog, sel, profile)
    entry = next(e for e in report.entries if e.pattern_id == "incentive_registry")
    assert any(e.attribute_id == "security" and "fraudulent" in e.note
               for e in entry.tradeoffs)


def test_adr_renders_per_model(catalog):
    profile = P({"training_efficiency": 1.0, "security": 1.0},
                flags=["requires_owner_consent"])
    text = render_adr(catalog, recommend(catalog, profile))
    assert len([ln for ln in text.splitlines() if ln.startswith("## ")]) == 4
    assert "satisfies" in text


# --- case studies ----------------------------------------------------------

def test_case_study_meta(catalog):
    report = check_case_study(catalog, "meta")
    assert set(report.pattern_ids) == {
        "secure_aggregator", "training_configurator", "heterogeneous_data_handler",
        "client_registry", "model_co_versioning_registry"}
    assert report.matches_canonical and report.closure_ok


def test_case_study_intel(catalog):
    report = check_case_study(catalog, "intel_openfl")
    assert set(report.pattern_ids) == {
        "multi_task_model_trainer", "secure_aggregator", "training_configurator",
        "deployment_selector"}
    assert report.matches_canonical and report.closure_ok


def test_case_study_siemens(catalog):
    report = check_case_study(catalog, "siemens_ifl")
    assert set(report.pattern_ids) == {
        "multi_task_model_trainer", "client_registry", "training_configurator",
        "client_selector", "asynchronous_aggregator", "model_co_versioning_registry",
        "deployment_selector"}
    assert report.matches_canonical and report.closure_ok
    assert set(report.models_exercised) == {
        "client_management", "model_management_configuration",
        "model_aggregation", "model_training"}


def test_case_study_unknown(catalog):
    with pytest.raises(NotFoundError):
        check_case_study(catalog, "acme")


# --- oracle equality -------------------------------------------------------

def random_profile(rng, doc, force=False):
    """Dyadic weights keep every score exact, so float ties are honest ties."""
    attrs = [a["id"] for a in doc["attributes"]]
    weights = {a: rng.randrange(0, 17) / 8.0 for a in attrs if rng.random() < 0.6}
    flags = {k for k in doc["constraint_keys"] if rng.random() < 0.5}
    forced_in, forced_out = set(), set()
    if force:
        model = rng.choice(doc["decision_models"])
        pid = rng.choice(sorted(model["member_pattern_ids"]))
        forced_in = {pid}
        for rel in model["relations"]:  # keep the forced set closure-safe
            if rel["kind"] == "complements" and rel["from_pattern"] in forced_in:
                forced_in.add(rel["to_pattern"])
        for con in model["constraints"]:
            if con["pattern_id"] in forced_in:
                flags.add(con["key"])
        out_candidates = [p["id"] for p in doc["patterns"]
                          if p["id"] not in forced_in]
        pid_out = rng.choice(sorted(out_candidates))
        blocked = False  # never force out a pattern the forced-in set depends on
        for rel in (r for m in doc["decision_models"] for r in m["relations"]):
            if rel["kind"] == "complements" and rel["to_pattern"] == pid_out \
                    and rel["from_pattern"] in forced_in:
                blocked = True
        if not blocked:
            forced_out = {pid_out}
    return {"weights": weights, "context_flags": sorted(flags),
            "forced_in": sorted(forced_in), "forced_out": sorted(forced_out)}


def test_benefit_bump_monotonicity_against_oracle(catalog, doc):
    # raising the weight of an attribute a chosen pattern benefits never
    # evicts that pattern, provided the selection's net effect on the
    # attribute is positive and no alternative pattern shares the benefit;
    # each bumped profile is also cross-checked against the naive oracle
    rng = random.Random(90125)
    alternatives = {}
    for m in catalog.decision_models:
        for r in m.relations:
            if r.kind == "alternative" and r.scope_attribute is None:
                alternatives.setdefault(r.from_pattern, set()).add(r.to_pattern)
                alternatives.setdefault(r.to_pattern, set()).add(r.from_pattern)

    checked = 0
    for i in range(300):
        pdoc = random_profile(rng, doc, force=False)
        profile = RequirementProfile.from_dict(pdoc)
        rec = recommend(catalog, profile)
        for mid, sel in rec.best.items():
            if not sel.chosen:
                continue
            model = catalog.decision_model(mid)
            net = {}
            for e in sel.combined_effects:
                net[e.attribute_id] = net.get(e.attribute_id, 0.0) + e.sign * e.weight
            candidates = []
            for pid in sel.chosen:
                rivals = alternatives.get(pid, set())
                for e in model.effects:
                    if e.pattern_id != pid or e.direction != "benefit":
                        continue
                    rival_shares = any(
                        r.pattern_id in rivals and r.attribute_id == e.attribute_id
                        and r.direction == "benefit" for r in model.effects)
                    if net.get(e.attribute_id, 0.0) > 0 and not rival_shares:
                        candidates.append((pid, e.attribute_id))
            if not candidates:
                continue
            pid, attr = candidates[rng.randrange(len(candidates))]
            bumped = dict(pdoc["weights"])
            bumped[attr] = bumped.get(attr, 0.0) + rng.randrange(1, 9) / 8.0
            bumped_doc = {**pdoc, "weights": bumped}
            rec2 = recommend(catalog, RequirementProfile.from_dict(bumped_doc))
            assert pid in rec2.best[mid].chosen, (i, mid, pid, attr, pdoc)
            want = oracle_best(doc, bumped_doc)
            assert rec2.best[mid].chosen == want[mid][0]
            checked += 1
    assert checked > 200


def test_recommend_matches_oracle_on_1000_profiles(catalog, doc):
    rng = random.Random(20240817)
    for i in range(1000):
        pdoc = random_profile(rng, doc, force=(i % 3 == 0))
        profile = RequirementProfile.from_dict(pdoc)
        rec = recommend(catalog, profile)
        want = oracle_best(doc, pdoc)
        for mid, sel in rec.best.items():
            assert want[mid] is not None
            assert sel.chosen == want[mid][0], (i, mid, pdoc)
            assert sel.score == want[mid][1], (i, mid, pdoc)
