"""Acceptance suite: one test per release criterion, strict tolerances.

Each test prints a single [PASS] line (visible with `pytest -s` or in the
captured output section); any failure fails the build.
"""

import random
import time

import numpy as np
import pytest

from fedarch import canonical
from fedarch import model as mdl
from fedarch.aggregation import fedavg_aggregate
from fedarch.catalog import (
    default_catalog_path,
    load_catalog,
    load_default_catalog,
    validate_catalog,
)
from fedarch.cli import main as cli_main
from fedarch.config import SimConfig
from fedarch.engine import RequirementProfile, combined_effects, recommend
from fedarch.hypotheses import load_default_hypotheses
from fedarch.jsonutil import canonical_dumps
from fedarch.plugins import compression as comp
from fedarch.plugins import secure as sec
from fedarch.simulator import run_simulation
from fedarch.validator import validate_all

from oracle_engine import load_doc, oracle_best
from test_engine import random_profile


@pytest.fixture(scope="module")
def catalog():
    return load_default_catalog()


@pytest.fixture(scope="module")
def doc():
    return load_doc(default_catalog_path())


def _report(name: str, detail: str = "") -> None:
    print(f"[PASS] {name}" + (f" — {detail}" if detail else ""))


# -------------------------------------------------------------------------

def test_catalog_census(catalog, capsys):
    t0 = time.monotonic()
    cat = load_catalog(default_catalog_path())
    assert len(cat.patterns) == 15
    by_category = {}
    for p in cat.patterns:
        by_category.setdefault(p.category, set()).add(p.id)
    assert set(by_category) == {"client_management", "model_management",
                                "model_training", "model_aggregation",
                                "configuration"}
    assert validate_catalog(cat) == []
    assert cli_main(["catalog", "validate", str(default_catalog_path())]) == 0

    # the enumerated edge checklist: every effect, relation and constraint
    effects = {(m.id, e.pattern_id, e.attribute_id, e.direction)
               for m in cat.decision_models for e in m.effects}
    assert effects == set(canonical.CANONICAL_EFFECTS)
    assert len(effects) == 57

    relations = set()
    for m in cat.decision_models:
        for r in m.relations:
            a, b = ((r.from_pattern, r.to_pattern) if r.kind == "complements"
                    else tuple(sorted((r.from_pattern, r.to_pattern))))
            relations.add((m.id, r.kind, a, b, r.scope_attribute))
    want = set()
    for mid, kind, a, b, scope in canonical.CANONICAL_RELATIONS:
        if kind == "alternative":
            a, b = sorted((a, b))
        want.add((mid, kind, a, b, scope))
    assert relations == want

    constraints = {(m.id, c.pattern_id, c.key)
                   for m in cat.decision_models for c in m.constraints}
    assert constraints == set(canonical.CANONICAL_CONSTRAINTS)

    # spot pins straight from the decision models' text descriptions
    assert ("client_management", "client_registry", "maintainability", "benefit") in effects
    assert ("client_management", "client_registry", "reliability", "benefit") in effects
    assert ("client_management", "client_registry", "data_privacy", "tradeoff") in effects
    assert ("client_management", "client_cluster", "computation_efficiency", "tradeoff") in effects
    assert ("model_aggregation", "asynchronous_aggregator", "communication_efficiency",
            "tradeoff") in effects
    assert ("model_aggregation", "secure_aggregator", "model_quality", "tradeoff") in effects
    assert ("model_training", "incentive_registry", "security", "tradeoff") in effects

    elapsed = time.monotonic() - t0
    assert elapsed < 1.0
    with capsys.disabled():
        _report("catalog census", f"15 patterns, 57 effects, {elapsed:.2f}s")


def test_case_study_reproduction(catalog, capsys):
    want = {
        "meta": {"secure_aggregator", "training_configurator",
                 "heterogeneous_data_handler", "client_registry",
                 "model_co_versioning_registry"},
        "intel_openfl": {"multi_task_model_trainer", "secure_aggregator",
                         "training_configurator", "deployment_selector"},
        "siemens_ifl": {"multi_task_model_trainer", "client_registry",
                        "training_configurator", "client_selector",
                        "asynchronous_aggregator", "model_co_versioning_registry",
                        "deployment_selector"},
    }
    for case_id, patterns in want.items():
        study = catalog.case_study(case_id)
        assert set(study.pattern_ids) == patterns, case_id
        assert cli_main(["case-study", case_id]) == 0
    with capsys.disabled():
        _report("case-study reproduction", "meta, intel_openfl, siemens_ifl verbatim")


def test_engine_oracle_equality(catalog, doc, capsys):
    t0 = time.monotonic()
    rng = random.Random(424242)
    n = 1000
    for i in range(n):
        pdoc = random_profile(rng, doc, force=(i % 3 == 0))
        rec = recommend(catalog, RequirementProfile.from_dict(pdoc))
        want = oracle_best(doc, pdoc)
        for mid, sel in rec.best.items():
            assert want[mid] is not None, (i, mid)
            assert sel.chosen == want[mid][0], (i, mid, pdoc)
            assert sel.score == want[mid][1], (i, mid, pdoc)
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    with capsys.disabled():
        _report("engine/oracle equality", f"{n} profiles exact, {elapsed:.1f}s")


def test_relation_semantics_property_suite(catalog, doc, capsys):
    rng = random.Random(777)
    cases = violations = 0

    unscoped_alt = {}
    complements = {}
    constraints = {}
    for m in catalog.decision_models:
        complements[m.id] = [(r.from_pattern, r.to_pattern) for r in m.relations
                             if r.kind == "complements"]
        unscoped_alt[m.id] = [frozenset((r.from_pattern, r.to_pattern))
                              for r in m.relations
                              if r.kind == "alternative" and r.scope_attribute is None]
        constraints[m.id] = [(c.pattern_id, c.key) for c in m.constraints]

    def check_selection(profile, mid, chosen):
        nonlocal cases, violations
        chosen = set(chosen)
        cases += 1
        for a, b in complements[mid]:
            if a in chosen and b not in chosen:
                violations += 1
        for pair in unscoped_alt[mid]:
            if pair <= chosen:
                violations += 1
        for pid, key in constraints[mid]:
            if pid in chosen and key not in profile.context_flags:
                violations += 1
        if profile.forced_in & set(catalog.decision_model(mid).member_pattern_ids) \
                - chosen:
            violations += 1
        if chosen & profile.forced_out:
            violations += 1

    def check_override(mid, chosen):
        nonlocal cases, violations
        cases += 1
        effects = combined_effects(catalog, set(chosen))
        present = {(e.pattern_id, e.attribute_id): e.direction for e in effects}
        for a, b in complements[mid]:
            if a in chosen and b in chosen:
                model = catalog.decision_model(mid)
                a_dirs = {e.attribute_id: e.direction for e in model.effects
                          if e.pattern_id == a}
                for attr, d in a_dirs.items():
                    other = present.get((b, attr))
                    if other is not None and other != d:
                        violations += 1  # opposing initial edge survived

    profiles = 0
    while cases < 10_000:
        profiles += 1
        pdoc = random_profile(rng, doc, force=(profiles % 4 == 0))
        profile = RequirementProfile.from_dict(pdoc)
        rec = recommend(catalog, profile)
        for mid, ranking in rec.rankings.items():
            for sel in ranking:
                check_selection(profile, mid, sel.chosen)

        # override property on random member subsets (feasible or not)
        for m in catalog.decision_models:
            members = sorted(m.member_pattern_ids)
            subset = [p for p in members if rng.random() < 0.5]
            check_override(m.id, subset)

        # positive scaling leaves every chosen set unchanged
        c = rng.choice([0.5, 2.0, 8.0, 100.0])
        scaled = RequirementProfile(
            weights={k: v * c for k, v in profile.weights.items()},
            context_flags=profile.context_flags, forced_in=profile.forced_in,
            forced_out=profile.forced_out)
        rec2 = recommend(catalog, scaled)
        for mid in rec.best:
            cases += 1
            if [s.chosen for s in rec.rankings[mid]] != \
                    [s.chosen for s in rec2.rankings[mid]]:
                violations += 1

    assert violations == 0
    assert cases >= 10_000
    with capsys.disabled():
        _report("relation semantics properties",
                f"{cases} cases over {profiles} profiles, 0 violations")


def test_fedavg_centralized_equivalence(capsys):
    rng = np.random.default_rng(512)
    n_clients, per_client, f, c, lr = 6, 25, 7, 3, 0.4
    data = [(rng.standard_normal((per_client, f)), rng.integers(0, c, per_client))
            for _ in range(n_clients)]
    pooled_X = np.vstack([X for X, _ in data])
    pooled_y = np.concatenate([y for _, y in data])

    W_fed = mdl.init_weights(c, f)
    W_central = mdl.init_weights(c, f)
    worst = 0.0
    for _ in range(50):
        updates = [(cid, mdl.train(W_fed, X, y, 1, lr), per_client)
                   for cid, (X, y) in enumerate(data)]
        W_fed = fedavg_aggregate(updates)
        W_central = mdl.train(W_central, pooled_X, pooled_y, 1, lr)
        rel = np.linalg.norm(W_fed - W_central) / np.linalg.norm(W_central)
        worst = max(worst, rel)
        assert rel < 1e-9
    with capsys.disabled():
        _report("fedavg/centralized equivalence",
                f"50 rounds, worst relative drift {worst:.2e} < 1e-9")


def test_gradient_correctness(capsys):
    rng = np.random.default_rng(2025)
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        n, f, c = int(rng.integers(4, 20)), int(rng.integers(2, 8)), int(rng.integers(2, 5))
        X = rng.standard_normal((n, f))
        y = rng.integers(0, c, n)
        W = rng.standard_normal((c, f + 1)) * 0.7
        Xa = mdl.augment(X)
        grad = mdl.gradient(W, Xa, y)
        fd = np.zeros_like(W)
        for i in range(W.shape[0]):
            for j in range(W.shape[1]):
                Wp, Wm = W.copy(), W.copy()
                Wp[i, j] += h
                Wm[i, j] -= h
                fd[i, j] = (mdl.loss(Wp, Xa, y) - mdl.loss(Wm, Xa, y)) / (2 * h)
        rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
        worst = max(worst, rel)
        assert rel < 1e-5
    with capsys.disabled():
        _report("gradient finite-difference check",
                f"100 instances, worst relative error {worst:.2e} < 1e-5")


def test_mask_cancellation_exact(capsys):
    rng = np.random.default_rng(99)
    for k in (2, 3, 10, 50):
        for d in (1, 10, 10_000):
            updates = [(cid, rng.standard_normal(d) * 3) for cid in range(k)]
            got = sec.secure_sum(updates, seed=k * 17 + d, round_no=1,
                                 masking=True, dp_sigma=0.0)
            want = sec.from_fixed(sec.plain_fixed_sum([w for _, w in updates]))
            assert np.array_equal(got, want), (k, d)
    with capsys.disabled():
        _report("secure-sum mask cancellation",
                "exact for K in {2,3,10,50} x d in {1,10,10000}")


def test_compressor_bound_and_sizes(capsys):
    t0 = time.monotonic()
    rng = np.random.default_rng(31337)
    d = 64
    n_vectors = 10_000
    for bits in range(2, 17):
        scale = rng.uniform(0.05, 20.0, size=n_vectors)
        vectors = rng.standard_normal((n_vectors, d)) * scale[:, None]
        want_size = comp.quantized_payload_bytes(d, bits)
        for row in vectors:
            q = comp.compress(row, bits)
            assert q.payload_bytes == want_size
            err = np.max(np.abs(comp.decompress(q) - row))
            if q.vmax > q.vmin:
                step = (q.vmax - q.vmin) / ((1 << bits) - 1)
                assert err <= step / 2 + 1e-9 * max(abs(q.vmin), abs(q.vmax))
            else:
                assert err == 0.0
    with capsys.disabled():
        _report("compressor round-trip bound",
                f"10^4 vectors x 15 bit widths, {time.monotonic() - t0:.1f}s")


def test_determinism_bit_identical(capsys):
    scenarios = [
        SimConfig(seed=90, n_clients=6, rounds=8, label_skew_beta=0.4,
                  dropout_prob=0.2,
                  pattern_toggles={"message_compressor": {"bits": 5},
                                   "client_registry": {},
                                   "model_co_versioning_registry": {}}),
        SimConfig(seed=91, n_clients=5, rounds=6,
                  pattern_toggles={"asynchronous_aggregator": {"alpha": 0.5}}),
        SimConfig(seed=92, n_clients=5, rounds=6,
                  pattern_toggles={"decentralised_aggregator": {"topology": "random_k",
                                                                "k": 2}}),
        SimConfig(seed=93, n_clients=6, rounds=6,
                  group_structure={"n_groups": 2, "concentration": 30.0},
                  pattern_toggles={"hierarchical_aggregator": {
                      "n_edges": 2, "assignment": "by_group_label"}}),
        SimConfig(seed=94, n_clients=4, rounds=5,
                  pattern_toggles={"multi_task_model_trainer": {"n_tasks": 2,
                                                                "shared_dims": 4},
                                   "secure_aggregator": {"masking": True,
                                                         "dp_sigma": 0.05}}),
    ]
    for cfg in scenarios:
        a, b = run_simulation(cfg), run_simulation(cfg)
        assert canonical_dumps(a.to_dict()) == canonical_dumps(b.to_dict())
        assert a.event_log_digest == b.event_log_digest
    with capsys.disabled():
        _report("determinism", f"{len(scenarios)} scenario shapes bit-identical on rerun")


def test_tradeoff_validation_matrix(catalog, capsys):
    t0 = time.monotonic()
    report = validate_all(catalog, load_default_hypotheses())
    elapsed = time.monotonic() - t0
    summary = report.summary()
    assert summary["hypotheses"] == {"pass": 10, "fail": 0, "error": 0}
    assert summary["edge_total"] == 57
    assert (summary["edges"]["validated-pass"] + summary["edges"]["validated-fail"]
            + summary["edges"]["catalog-only"]) == 57
    assert summary["edges"]["validated-fail"] == 0
    covered = {(e["pattern_id"], e["attribute_id"]) for e in report.edge_coverage}
    assert len(covered) == 57  # every edge appears exactly once
    assert all(c["matches_canonical"] for c in report.case_studies)
    assert elapsed < 600.0
    with capsys.disabled():
        _report("tradeoff validation",
                f"H1..H10 pass, {summary['edges']['validated-pass']} edges validated, "
                f"{summary['edges']['catalog-only']} catalog-only, {elapsed:.0f}s")


def test_service_library_parity(catalog, doc, capsys):
    from fastapi.testclient import TestClient
    from fedarch.service import create_app

    client = TestClient(create_app())
    rng = random.Random(13)

    checked = 0
    for i in range(80):
        pdoc = random_profile(rng, doc, force=(i % 5 == 0))
        resp = client.post("/v1/recommend", json=pdoc)
        assert resp.status_code == 200
        direct = recommend(catalog, RequirementProfile.from_dict(pdoc))
        assert resp.content == canonical_dumps(direct.to_dict()).encode()
        checked += 1

    toggle_pool = [{}, {"message_compressor": {"bits": 6}},
                   {"client_selector": {"top_k": 3}},
                   {"heterogeneous_data_handler": {}}]
    for i in range(20):
        cfg_doc = {"seed": 1000 + i, "n_clients": rng.randint(3, 6),
                   "rounds": rng.randint(3, 6),
                   "label_skew_beta": rng.choice([0.3, 1.0]),
                   "pattern_toggles": rng.choice(toggle_pool)}
        resp = client.post("/v1/simulations", json=cfg_doc)
        assert resp.status_code == 202
        run_id = resp.json()["run_id"]
        deadline = time.time() + 60
        body = None
        while time.time() < deadline:
            body = client.get(f"/v1/simulations/{run_id}").json()
            if body["status"] in ("done", "failed"):
                break
            time.sleep(0.02)
        assert body and body["status"] == "done"
        direct = run_simulation(SimConfig.from_dict(cfg_doc))
        assert canonical_dumps(body["metrics"]) == canonical_dumps(direct.to_dict())
        checked += 1

    assert checked == 100
    with capsys.disabled():
        _report("service/library parity", "100 requests byte-identical")
