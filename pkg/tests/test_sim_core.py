import json

import numpy as np
import pytest

from fedarch import model as mdl
from fedarch.aggregation import async_merge, fedavg_aggregate
from fedarch.config import SimConfig
from fedarch.errors import (
    ConfigError,
    DimensionMismatchError,
    EmptyUpdateError,
    NonFiniteError,
)
from fedarch.jsonutil import canonical_dumps
from fedarch.simdata import generate_data
from fedarch.simulator import raw_payload_bytes, run_simulation, transfer_time


def _random_instance(rng, n=12, f=5, c=3):
    X = rng.standard_normal((n, f))
    y = rng.integers(0, c, n)
    W = rng.standard_normal((c, f + 1)) * 0.5
    return W, X, y


# --- gradient oracle ---------------------------------------------------------

def test_gradient_matches_central_finite_differences():
    rng = np.random.default_rng(2024)
    h = 1e-6
    for _ in range(100):
        W, X, y = _random_instance(rng)
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
        assert rel < 1e-5


def test_train_zero_epochs_and_zero_lr():
    rng = np.random.default_rng(5)
    W, X, y = _random_instance(rng)
    assert np.array_equal(mdl.train(W, X, y, 0, 0.5), W)
    assert np.array_equal(mdl.train(W, X, y, 3, 0.0), W)


def test_train_divergence_raises():
    rng = np.random.default_rng(6)
    W, X, y = _random_instance(rng)
    with pytest.raises(NonFiniteError):
        mdl.train(W, X * 100, y, 200, 1e6)


def test_minibatch_needs_shuffle_stream():
    rng = np.random.default_rng(7)
    W, X, y = _random_instance(rng)
    with pytest.raises(ValueError):
        mdl.train(W, X, y, 1, 0.1, batch_size=4)


# --- aggregation -------------------------------------------------------------

def test_fedavg_single_update_identity():
    w = np.arange(6, dtype=float).reshape(2, 3)
    assert np.array_equal(fedavg_aggregate([(0, w, 10)]), w)


def test_fedavg_symmetric_cancellation():
    w = np.ones((2, 3))
    out = fedavg_aggregate([(0, w, 5), (1, -w, 5)])
    assert np.array_equal(out, np.zeros((2, 3)))


def test_fedavg_errors():
    with pytest.raises(EmptyUpdateError):
        fedavg_aggregate([])
    with pytest.raises(DimensionMismatchError):
        fedavg_aggregate([(0, np.zeros((2, 2)), 1), (1, np.zeros((3, 2)), 1)])


def test_fedavg_equals_centralized_gd_over_50_rounds():
    # equal client sizes, one full-batch step per round: federated averaging
    # must track centralized gradient descent on the pooled data to 1e-9
    rng = np.random.default_rng(99)
    n_clients, per_client, f, c = 5, 30, 6, 3
    data = [(rng.standard_normal((per_client, f)), rng.integers(0, c, per_client))
            for _ in range(n_clients)]
    pooled_X = np.vstack([X for X, _ in data])
    pooled_y = np.concatenate([y for _, y in data])
    lr = 0.3

    W_fed = mdl.init_weights(c, f)
    W_central = mdl.init_weights(c, f)
    for _ in range(50):
        updates = [(cid, mdl.train(W_fed, X, y, 1, lr), per_client)
                   for cid, (X, y) in enumerate(data)]
        W_fed = fedavg_aggregate(updates)
        W_central = mdl.train(W_central, pooled_X, pooled_y, 1, lr)
        rel = np.linalg.norm(W_fed - W_central) / max(np.linalg.norm(W_central), 1e-12)
        assert rel < 1e-9


def test_async_merge_rules():
    g = np.zeros(4)
    u = np.ones(4)
    assert np.array_equal(async_merge(g, u, 0, 1.0), u)
    assert np.array_equal(async_merge(g, u, 5, 0.0), g)
    # staleness discounts the step: alpha/(1+staleness)
    out = async_merge(g, u, 3, 0.8)
    assert np.allclose(out, 0.2 * u)


# --- synthetic data ----------------------------------------------------------

def test_near_uniform_labels_at_huge_beta():
    sizes = [5000] * 6
    fed = generate_data(11, 6, 8, 4, sizes, label_skew_beta=1e6)
    for cd in fed.clients:
        # the drawn proportions collapse onto uniform ...
        assert np.all(np.abs(cd.label_props - 0.25) < 0.002)
        # ... and with enough samples so does the realized histogram
        hist = np.bincount(cd.y, minlength=4) / len(cd.y)
        assert np.all(np.abs(hist - 0.25) < 0.02)


def test_heavy_skew_at_small_beta():
    # over 20 seeds, at least one of 10 clients puts >80% mass on one class
    hits = 0
    for seed in range(20):
        fed = generate_data(seed, 10, 8, 3, [100] * 10, label_skew_beta=0.1)
        top = max(cd.label_props.max() for cd in fed.clients)
        if top > 0.8:
            hits += 1
    assert hits == 20  # skew this heavy shows up in every seed


def test_data_generation_is_deterministic():
    a = generate_data(5, 4, 6, 3, [40] * 4, 0.7)
    b = generate_data(5, 4, 6, 3, [40] * 4, 0.7)
    for ca, cb in zip(a.clients, b.clients):
        assert np.array_equal(ca.X, cb.X) and np.array_equal(ca.y, cb.y)
    assert np.array_equal(a.test_X, b.test_X)


def test_test_set_size_and_means_on_sphere():
    fed = generate_data(3, 2, 7, 4, [30, 30], 1.0)
    assert len(fed.test_y) == 2000
    assert np.allclose(np.linalg.norm(fed.class_means, axis=1), 1.0)


# --- message accounting ------------------------------------------------------

def test_transfer_time_rule():
    assert transfer_time(1000, 0.1, 1000.0) == pytest.approx(1.1)


def test_raw_payload_size_rule():
    assert raw_payload_bytes(1000) == 8016


def test_byte_conservation_against_event_log(tmp_path):
    cfg = SimConfig(seed=3, n_clients=5, rounds=6, dropout_prob=0.2)
    path = tmp_path / "events.ldjson"
    metrics = run_simulation(cfg, event_log_path=str(path))
    ups = downs = 0
    for line in path.read_text().splitlines():
        rec = json.loads(line)
        if rec["event"] == "message_up":
            ups += rec["bytes"]
        elif rec["event"] == "message_down":
            downs += rec["bytes"]
    assert ups == metrics.bytes_uplink
    assert downs == metrics.bytes_downlink


# --- full runs ---------------------------------------------------------------

def test_single_client_matches_centralized_training():
    cfg = SimConfig(seed=21, n_clients=1, n_features=8, n_classes=3, rounds=40,
                    samples_per_client={"kind": "fixed", "value": 120},
                    learning_rate=0.5)
    metrics = run_simulation(cfg)

    sizes = [120]
    fed = generate_data(21, 1, 8, 3, sizes, 1.0)
    W = mdl.init_weights(3, 8)
    for _ in range(40):
        W = mdl.train(W, fed.clients[0].X, fed.clients[0].y, 1, 0.5)
    central_acc = mdl.accuracy(W, fed.test_X, fed.test_y)
    assert abs(metrics.final_accuracy - central_acc) < 0.01


def test_full_dropout_means_no_training():
    cfg = SimConfig(seed=9, n_clients=6, rounds=8, dropout_prob=1.0)
    m = run_simulation(cfg)
    assert m.bytes_uplink == 0 and m.bytes_downlink == 0
    assert m.final_accuracy == m.accuracy_per_round[0]
    assert all(c == 0 for c in m.participation_count)


def test_bit_identical_reruns():
    cfg = SimConfig(seed=77, n_clients=7, rounds=10, label_skew_beta=0.4,
                    dropout_prob=0.15,
                    pattern_toggles={"message_compressor": {"bits": 6}})
    a = run_simulation(cfg)
    b = run_simulation(cfg)
    assert canonical_dumps(a.to_dict()) == canonical_dumps(b.to_dict())
    assert a.event_log_digest == b.event_log_digest


def test_target_accuracy_early_stop():
    cfg = SimConfig(seed=13, n_clients=4, rounds=60, target_accuracy=0.5,
                    learning_rate=0.8)
    m = run_simulation(cfg)
    assert m.rounds_to_target is not None
    assert m.rounds_to_target <= 60
    assert len(m.accuracy_per_round) == m.rounds_to_target
    assert m.time_to_target == pytest.approx(m.simulated_wall_time)
    assert m.messages_to_target == m.n_uplink_messages


def test_more_skew_does_not_reduce_client_variance():
    def median_variance(beta):
        vals = []
        for seed in range(10):
            cfg = SimConfig(seed=seed, n_clients=8, rounds=15, label_skew_beta=beta,
                            samples_per_client={"kind": "fixed", "value": 40})
            vals.append(run_simulation(cfg).accuracy_variance_across_clients)
        return float(np.median(vals))

    assert median_variance(0.2) >= median_variance(1000.0)


def test_seed_is_mandatory_and_validated():
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"n_clients": 3})
    with pytest.raises(ConfigError):
        SimConfig(seed=1, n_clients=0)
    with pytest.raises(ConfigError):
        SimConfig(seed=1, label_skew_beta=0.0)
    with pytest.raises(ConfigError):
        SimConfig(seed=1, pattern_toggles={"warp_drive": {}})


def test_mode_incompatibilities():
    for combo in (
        {"decentralised_aggregator": {}, "hierarchical_aggregator": {}},
        {"decentralised_aggregator": {}, "asynchronous_aggregator": {}},
        {"asynchronous_aggregator": {}, "hierarchical_aggregator": {}},
        {"multi_task_model_trainer": {"n_tasks": 2}, "asynchronous_aggregator": {}},
    ):
        with pytest.raises(ConfigError):
            run_simulation(SimConfig(seed=1, n_clients=4, rounds=2,
                                     pattern_toggles=combo))


def test_strict_complements_mode():
    with pytest.raises(ConfigError):
        run_simulation(SimConfig(seed=1, n_clients=4, rounds=2, strict_complements=True,
                                 pattern_toggles={"client_selector": {"top_k": 2}}))
    # with the registry on it runs
    m = run_simulation(SimConfig(seed=1, n_clients=4, rounds=2, strict_complements=True,
                                 pattern_toggles={"client_selector": {"top_k": 2},
                                                  "client_registry": {}}))
    assert m.final_accuracy >= 0.0
