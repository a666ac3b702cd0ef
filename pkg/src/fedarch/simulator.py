"""Deterministic federated-learning simulator.

One logical thread drives a simulated clock: broadcast, local training,
uplink, aggregation, evaluation, repeat. Every random draw comes from a
keyed substream (see `rng`), every float sum runs in ascending client-id
order, and every message is accounted exactly — so a config (seed
included) maps to bit-identical metrics and event-log digest.

Wire format: a raw model payload is 8 bytes per weight plus a 16-byte
header; the compressor substitutes its own quantized payload. Fixed-point
secure uploads are 8 bytes per coordinate, the same size as raw.

Aggregation topologies (asynchronous, hierarchical, decentralised gossip)
are mutually exclusive modes over the shared round machinery; the other
plugins compose freely within a mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import model as mdl
from .aggregation import async_merge, fedavg_aggregate
from .config import SimConfig, SimMetrics, draw_dist
from .errors import ConfigError, EmptyUpdateError, IncompatiblePluginsError
from .events import EventLog, EventQueue
from .plugins import compression, data_handler, gossip, lifecycle
from .plugins import registries as reg
from .plugins import secure as sec
from .plugins import selection as sel
from .plugins.multitask import generate_multitask_data, train_client_tasks
from .rng import substream
from .simdata import generate_data

RAW_HEADER_BYTES = 16
OS_VERSIONS = ("android_12", "android_13", "ios_16", "linux_6.1", "windows_11")

MODE_TOGGLES = ("asynchronous_aggregator", "hierarchical_aggregator",
                "decentralised_aggregator")


def raw_payload_bytes(d: int) -> int:
    return 8 * d + RAW_HEADER_BYTES


def transfer_time(nbytes: int, latency: float, bandwidth: float) -> float:
    """Link model: base latency plus serialization at the link bandwidth."""
    return latency + nbytes / bandwidth


@dataclass
class ClientRuntime:
    client_id: int
    X: np.ndarray            # original device data (evaluation)
    y: np.ndarray
    X_train: np.ndarray      # possibly rebalanced by the data handler
    y_train: np.ndarray
    label_props: np.ndarray
    group_label: Optional[int]
    device_speed: float
    bandwidth: float
    base_latency: float
    memory: float
    dropout_prob: float
    metadata: dict = field(default_factory=dict)
    group: int = 0           # resolved aggregation group (cluster plugin)
    edge: int = 0            # hierarchical edge assignment

    @property
    def n_train(self) -> int:
        return len(self.y_train)


def validate_toggles(cfg: SimConfig) -> None:
    """Reject combinations with no defined aggregation semantics."""
    on = cfg.pattern_toggles
    modes = [m for m in MODE_TOGGLES if m in on]
    if "decentralised_aggregator" in modes and len(modes) > 1:
        others = [m for m in modes if m != "decentralised_aggregator"]
        raise IncompatiblePluginsError(
            f"decentralised_aggregator cannot combine with {others}")
    if len(modes) > 1:
        raise IncompatiblePluginsError(
            f"aggregation modes are mutually exclusive: {modes}")
    if "multi_task_model_trainer" in on and modes:
        raise IncompatiblePluginsError(
            f"multi_task_model_trainer cannot combine with {modes}")
    if cfg.strict_complements:
        needs_registry = [p for p in ("client_selector", "client_cluster") if p in on]
        if needs_registry and "client_registry" not in on:
            raise IncompatiblePluginsError(
                f"{needs_registry} require client_registry (strict complement mode)")


class _Run:
    def __init__(self, cfg: SimConfig):
        validate_toggles(cfg)
        self.cfg = cfg
        self.toggles = cfg.pattern_toggles
        self.log = EventLog()
        self.d = cfg.n_classes * (cfg.n_features + 1)
        self.raw_bytes = raw_payload_bytes(self.d)

        # counters
        self.bytes_uplink = 0
        self.bytes_downlink = 0
        self.central_bytes_uplink = 0
        self.central_bytes_downlink = 0
        self.n_uplink_messages = 0
        self.n_downlink_messages = 0
        self.time = 0.0
        self.version = 0
        self.accuracy_per_round: list[float] = []
        self.participation = [0] * cfg.n_clients
        self.rounds_to_target: Optional[int] = None
        self.time_to_target: Optional[float] = None
        self.messages_to_target: Optional[int] = None
        self.extras: dict = {}

        self._setup_clients()
        self._setup_plugins()

    # --- setup -----------------------------------------------------------

    def _setup_clients(self) -> None:
        cfg = self.cfg
        sizes = [int(draw_dist(cfg.samples_per_client,
                               substream(cfg.seed, "client_sizes", cid), cid))
                 for cid in range(cfg.n_clients)]
        if min(sizes) < 1:
            raise ConfigError("every client needs at least one sample")
        fed = generate_data(cfg.seed, cfg.n_clients, cfg.n_features, cfg.n_classes,
                            sizes, cfg.label_skew_beta,
                            group_structure=cfg.group_structure,
                            test_set_size=cfg.test_set_size,
                            class_means_seed=cfg.class_means_seed)
        self.test_X, self.test_y = fed.test_X, fed.test_y

        self.clients: list[ClientRuntime] = []
        for data in fed.clients:
            rng = substream(cfg.seed, "device", data.client_id)
            cid = data.client_id
            speed = float(draw_dist(cfg.device_speed, rng, cid))
            bandwidth = float(draw_dist(cfg.network["bandwidth"], rng, cid))
            latency = float(draw_dist(cfg.network["latency"], rng, cid))
            memory = float(draw_dist(cfg.device_memory, rng, cid))
            os_version = OS_VERSIONS[int(rng.integers(0, len(OS_VERSIONS)))]
            uptime = float(np.round(rng.uniform(0.5, 1.0), 3))
            self.clients.append(ClientRuntime(
                client_id=data.client_id, X=data.X, y=data.y,
                X_train=data.X, y_train=data.y, label_props=data.label_props,
                group_label=data.group_label, device_speed=speed,
                bandwidth=bandwidth, base_latency=latency, memory=memory,
                dropout_prob=cfg.dropout_prob,
                metadata={"os_version": os_version, "memory": memory,
                          "uptime": uptime, "device_speed": speed,
                          "bandwidth": bandwidth}))

    def _setup_plugins(self) -> None:
        cfg = self.cfg
        t = self.toggles

        if "heterogeneous_data_handler" in t and \
                t["heterogeneous_data_handler"].get("oversample_to_balance", True):
            notes = {}
            for c in self.clients:
                c.X_train, c.y_train, info = data_handler.balance_local_data(
                    c.X, c.y, cfg.seed, c.client_id)
                notes[str(c.client_id)] = info
            self.extras["data_handler"] = notes

        self.registry = None
        if "client_registry" in t:
            self.registry = reg.ClientRegistry(
                hash_chained=bool(t["client_registry"].get("hash_chained", True)))
            for c in self.clients:
                self.registry.register(c.client_id, c.metadata)

        self.coversioning = None
        if "model_co_versioning_registry" in t:
            self.coversioning = reg.CoVersioningRegistry(
                hash_chained=bool(
                    t["model_co_versioning_registry"].get("hash_chained", True)))

        self.incentives = None
        if "incentive_registry" in t:
            params = t["incentive_registry"]
            self.incentives = reg.IncentiveLedger(
                reward_per_update=float(params.get("reward_per_update", 1.0)),
                p_base=float(params.get("p_base", 1.0 - cfg.dropout_prob)),
                p_gain=float(params.get("p_gain", 0.1)))

        self.groups = np.zeros(cfg.n_clients, dtype=int)
        self.n_groups = 1
        if "client_cluster" in t:
            self.groups = sel.assign_groups(self.clients, t["client_cluster"],
                                            cfg.n_classes, cfg.seed)
            self.n_groups = int(self.groups.max()) + 1
            for c in self.clients:
                c.group = int(self.groups[c.client_id])
            self.extras["cluster_groups"] = [int(g) for g in self.groups]

        if "hierarchical_aggregator" in t:
            params = t["hierarchical_aggregator"]
            if "client_cluster" in t:
                # cluster grouping becomes the edge topology: edges aggregate
                # the groups, the central server aggregates the edges
                for c in self.clients:
                    c.edge = c.group
                self.n_edges = self.n_groups
                self.n_groups = 1
                for c in self.clients:
                    c.group = 0
            else:
                n_edges = int(params.get("n_edges", 2))
                if n_edges < 1:
                    raise ConfigError("hierarchical_aggregator needs n_edges >= 1")
                assignment = params.get("assignment", "round_robin")
                for c in self.clients:
                    if assignment == "by_group_label":
                        if c.group_label is None:
                            raise ConfigError(
                                "by_group_label edge assignment needs group-structured data")
                        c.edge = c.group_label % n_edges
                    elif assignment == "round_robin":
                        c.edge = c.client_id % n_edges
                    else:
                        raise ConfigError(f"unknown edge assignment {assignment!r}")
                self.n_edges = n_edges
            self.edge_latency = float(params.get("edge_latency", 0.01))
            self.edge_bandwidth = float(params.get("edge_bandwidth", 1.0e7))
            self.extras["edge_assignment"] = [int(c.edge) for c in self.clients]

        self.trigger_rounds: list[int] = []

    # --- shared helpers ----------------------------------------------------

    def _account(self, direction: str, nbytes: int, latency: float,
                 bandwidth: float, central: bool, actor: str, when: float) -> float:
        transfer = transfer_time(nbytes, latency, bandwidth)
        if direction == "up":
            self.bytes_uplink += nbytes
            self.n_uplink_messages += 1
            if central:
                self.central_bytes_uplink += nbytes
        else:
            self.bytes_downlink += nbytes
            self.n_downlink_messages += 1
            if central:
                self.central_bytes_downlink += nbytes
        self.log.append(when, f"message_{direction}", actor, nbytes)
        return transfer

    def _participates(self, client: ClientRuntime, round_no: int) -> bool:
        u = substream(self.cfg.seed, "participation", client.client_id,
                      round_no).random()
        if self.incentives is not None:
            p = self.incentives.participation_prob(client.client_id)
        else:
            p = 1.0 - client.dropout_prob
        return bool(u < p)

    def _eligible(self, round_no: int) -> list[ClientRuntime]:
        if "client_selector" in self.toggles:
            params = self.toggles["client_selector"]
            records = [c.metadata | {"client_id": c.client_id} for c in self.clients]
            ids = sel.select_clients(
                records,
                min_speed=float(params.get("min_speed", 0.0)),
                min_bandwidth=float(params.get("min_bandwidth", 0.0)),
                top_k=params.get("top_k"))
            chosen = set(ids)
            return [c for c in self.clients if c.client_id in chosen]
        return list(self.clients)

    def _train_local(self, client: ClientRuntime, start: np.ndarray,
                     round_no: int) -> tuple[np.ndarray, float]:
        cfg = self.cfg
        shuffle = None
        if cfg.batch_size is not None:
            shuffle = substream(cfg.seed, "minibatch", client.client_id, round_no)
        W = mdl.train(start, client.X_train, client.y_train, cfg.local_epochs,
                      cfg.learning_rate, batch_size=cfg.batch_size,
                      shuffle_rng=shuffle)
        compute_time = cfg.local_epochs * client.n_train / client.device_speed
        return W, compute_time

    def _downlink_payload(self, W: np.ndarray) -> tuple[int, np.ndarray]:
        """Bytes on the wire and the model as the receiver sees it."""
        if "message_compressor" in self.toggles:
            bits = int(self.toggles["message_compressor"].get("bits", 8))
            q = compression.compress(mdl.flatten(W), bits)
            return q.payload_bytes, mdl.unflatten(
                compression.decompress(q), self.cfg.n_classes, self.cfg.n_features)
        return self.raw_bytes, W

    _uplink_payload = _downlink_payload  # same rule both directions

    def _evaluate(self, W: np.ndarray) -> float:
        return mdl.accuracy(W, self.test_X, self.test_y)

    def _check_target(self, acc: float, rounds_done: int) -> bool:
        cfg = self.cfg
        if cfg.target_accuracy is not None and self.rounds_to_target is None \
                and acc >= cfg.target_accuracy:
            self.rounds_to_target = rounds_done
            self.time_to_target = self.time
            self.messages_to_target = self.n_uplink_messages
            return True
        return False

    def _post_round(self, round_no: int, acc: float,
                    uploads: list[tuple[int, np.ndarray, int]]) -> None:
        uploads = sorted(uploads, key=lambda u: u[0])
        if self.registry is not None:
            for cid, _, _ in uploads:
                self.registry.mark_seen(cid, round_no)
        if self.coversioning is not None and uploads:
            self.coversioning.record_co_version(
                self.version,
                [(cid, reg.model_hash(W)) for cid, W, _ in uploads],
                metrics={"accuracy": acc} if acc is not None else {})
        if self.incentives is not None:
            self.incentives.update_incentives(
                [(cid, n) for cid, _, n in uploads], round_no)
        if acc is not None and "model_replacement_trigger" in self.toggles:
            params = self.toggles["model_replacement_trigger"]
            verdict = lifecycle.evaluate_replacement_trigger(
                self.accuracy_per_round,
                window=int(params.get("window", 3)),
                drop_threshold=float(params.get("drop_threshold", 0.1)))
            if verdict == lifecycle.TRIGGER_RETRAIN:
                self.trigger_rounds.append(round_no)
                self.log.append(self.time, "trigger_retrain", "server", 0)

    # --- synchronous mode (flat, cluster, hierarchical, secure, ...) -------

    def run_sync(self) -> None:
        cfg = self.cfg
        hier = "hierarchical_aggregator" in self.toggles
        secure_on = "secure_aggregator" in self.toggles
        group_models = {g: mdl.init_weights(cfg.n_classes, cfg.n_features)
                        for g in range(self.n_groups)}
        self.eval_model = self._group_average(group_models)
        last_acc = self._evaluate(self.eval_model)

        for r in range(cfg.rounds):
            if cfg.server_crash_round is not None and r >= cfg.server_crash_round:
                if r == cfg.server_crash_round:
                    self.log.append(self.time, "server_crash", "server", 0)
                self.accuracy_per_round.append(last_acc)
                continue

            participants = [c for c in self._eligible(r) if self._participates(c, r)]
            participants.sort(key=lambda c: c.client_id)
            if not participants:
                self.accuracy_per_round.append(last_acc)
                self.log.append(self.time, "round_skipped", "server", 0)
                continue
            for c in participants:
                self.participation[c.client_id] += 1

            # broadcast
            broadcast_time = 0.0
            received: dict[int, np.ndarray] = {}
            if hier:
                edge_down: dict[int, float] = {}
                nbytes, seen = self._downlink_payload(group_models[0])
                for e in sorted({c.edge for c in participants}):
                    edge_down[e] = self._account(
                        "down", nbytes, self.edge_latency, self.edge_bandwidth,
                        central=True, actor=f"edge{e}", when=self.time)
                for c in participants:
                    leg = self._account("down", nbytes, c.base_latency, c.bandwidth,
                                        central=False, actor=f"client{c.client_id}",
                                        when=self.time)
                    received[c.client_id] = seen
                    broadcast_time = max(broadcast_time, edge_down[c.edge] + leg)
            else:
                payload_cache = {g: self._downlink_payload(group_models[g])
                                 for g in sorted(group_models)}
                for c in participants:
                    nbytes, seen = payload_cache[c.group if self.n_groups > 1 else 0]
                    leg = self._account("down", nbytes, c.base_latency, c.bandwidth,
                                        central=True, actor=f"client{c.client_id}",
                                        when=self.time)
                    received[c.client_id] = seen
                    broadcast_time = max(broadcast_time, leg)

            # local training + uplink
            uploads: list[tuple[int, np.ndarray, int]] = []
            client_done: dict[int, float] = {}
            for c in participants:
                W, compute = self._train_local(c, received[c.client_id], r)
                if secure_on:
                    up_bytes, server_view = self.raw_bytes, W
                else:
                    up_bytes, server_view = self._uplink_payload(W)
                transfer = self._account(
                    "up", up_bytes, c.base_latency, c.bandwidth,
                    central=not hier, actor=f"client{c.client_id}", when=self.time)
                uploads.append((c.client_id, server_view, c.n_train))
                client_done[c.client_id] = compute + transfer

            # aggregation
            if hier:
                edge_models = []
                edge_done = []
                for e in sorted({c.edge for c in participants}):
                    members = [u for u, c in zip(uploads, participants) if c.edge == e]
                    edge_w = self._aggregate_group(members, r, secure_on)
                    edge_n = sum(n for _, _, n in members)
                    transfer = self._account(
                        "up", self.raw_bytes, self.edge_latency, self.edge_bandwidth,
                        central=True, actor=f"edge{e}", when=self.time)
                    edge_models.append((e, edge_w, edge_n))
                    edge_done.append(max(client_done[c.client_id]
                                         for c in participants if c.edge == e) + transfer)
                group_models[0] = fedavg_aggregate(edge_models)
                round_time = broadcast_time + max(edge_done)
            elif self.n_groups > 1:
                for g in sorted(set(c.group for c in participants)):
                    members = [u for u, c in zip(uploads, participants) if c.group == g]
                    group_models[g] = self._aggregate_group(members, r, secure_on)
                round_time = broadcast_time + max(client_done.values())
            else:
                group_models[0] = self._aggregate_group(uploads, r, secure_on)
                round_time = broadcast_time + max(client_done.values())

            self.version += 1
            self.time += round_time
            self.eval_model = self._group_average(group_models)
            acc = self._evaluate(self.eval_model)
            self.accuracy_per_round.append(acc)
            last_acc = acc
            self.log.append(self.time, "aggregate", "server", 0)
            self._post_round(r, acc, uploads)
            if self._check_target(acc, r + 1):
                break

        self.group_models = group_models

    def _aggregate_group(self, uploads: list[tuple[int, np.ndarray, int]],
                         round_no: int, secure_on: bool) -> np.ndarray:
        if not uploads:
            raise EmptyUpdateError("aggregation group has no uploads")
        if not secure_on:
            return fedavg_aggregate(uploads)
        params = self.toggles["secure_aggregator"]
        masking = bool(params.get("masking", True)) and len(uploads) >= 2
        dp_sigma = float(params.get("dp_sigma", 0.0))
        total = sum(n for _, _, n in uploads)
        scaled = [(cid, mdl.flatten(W) * (n / total)) for cid, W, n in uploads]
        flat = sec.secure_sum(scaled, self.cfg.seed, round_no,
                              masking=masking, dp_sigma=dp_sigma)
        return mdl.unflatten(flat, self.cfg.n_classes, self.cfg.n_features)

    def _group_average(self, group_models: dict[int, np.ndarray]) -> np.ndarray:
        if len(group_models) == 1:
            return group_models[0]
        sizes = {g: 0 for g in group_models}
        for c in self.clients:
            sizes[c.group] += c.n_train
        merged = fedavg_aggregate(
            [(g, group_models[g], max(sizes[g], 1)) for g in sorted(group_models)])
        return merged

    # --- asynchronous mode --------------------------------------------------

    def run_async(self) -> None:
        cfg = self.cfg
        params = self.toggles["asynchronous_aggregator"]
        alpha = float(params.get("alpha", 0.6))
        max_staleness = int(params.get("max_staleness", 16))
        budget = cfg.rounds * cfg.n_clients

        group_models = {g: mdl.init_weights(cfg.n_classes, cfg.n_features)
                        for g in range(self.n_groups)}
        group_versions = {g: 0 for g in group_models}
        base_version = {c.client_id: 0 for c in self.clients}
        current_model = {c.client_id: group_models[c.group].copy()
                         for c in self.clients}
        cycles = {c.client_id: 0 for c in self.clients}
        merges = 0
        discarded = 0
        queue = EventQueue()

        def schedule_client(c: ClientRuntime, at: float) -> None:
            queue.push(at, "client_ready", f"client{c.client_id}", cid=c.client_id)

        # initial broadcast to the selected fleet, ascending client id at t=0
        # (the selector policy is static, so eligibility is decided once)
        for c in self._eligible(0):
            nbytes, seen = self._downlink_payload(group_models[c.group])
            transfer = self._account("down", nbytes, c.base_latency, c.bandwidth,
                                     central=True, actor=f"client{c.client_id}",
                                     when=0.0)
            current_model[c.client_id] = seen
            schedule_client(c, transfer)

        done = False
        while len(queue) and not done:
            ev = queue.pop()
            self.time = queue.current_time
            c = self.clients[ev.data["cid"]]

            if ev.kind == "client_ready":
                cyc = cycles[c.client_id]
                cycles[c.client_id] += 1
                if not self._participates(c, cyc):
                    nominal = (2 * c.base_latency
                               + cfg.local_epochs * c.n_train / c.device_speed)
                    schedule_client(c, ev.time + nominal)
                    continue
                self.participation[c.client_id] += 1
                W, compute = self._train_local(c, current_model[c.client_id], cyc)
                up_bytes, server_view = (
                    (self.raw_bytes, W) if "secure_aggregator" in self.toggles
                    else self._uplink_payload(W))
                transfer = self._account("up", up_bytes, c.base_latency, c.bandwidth,
                                         central=True, actor=f"client{c.client_id}",
                                         when=ev.time + compute)
                queue.push(ev.time + compute + transfer, "update_arrives",
                           f"client{c.client_id}", cid=c.client_id,
                           update=server_view, based_on=base_version[c.client_id],
                           n=c.n_train)
                continue

            # update_arrives
            g = c.group
            staleness = group_versions[g] - ev.data["based_on"]
            if staleness > max_staleness:
                discarded += 1
                self.log.append(ev.time, "stale_discarded", f"client{c.client_id}", 0)
            else:
                update = ev.data["update"]
                if "secure_aggregator" in self.toggles:
                    dp_sigma = float(self.toggles["secure_aggregator"].get("dp_sigma", 0.0))
                    update = mdl.unflatten(
                        sec.secure_sum([(c.client_id, mdl.flatten(update))],
                                       cfg.seed, cycles[c.client_id] - 1,
                                       masking=False, dp_sigma=dp_sigma),
                        cfg.n_classes, cfg.n_features)
                group_models[g] = async_merge(group_models[g], update, staleness, alpha)
                group_versions[g] += 1
                self.version += 1
                merges += 1
                self.log.append(ev.time, "aggregate", "server", 0)
                self._post_round(merges - 1, None,
                                 [(c.client_id, ev.data["update"], ev.data["n"])])
                # evaluate on the same cadence as a synchronous round: once
                # per n_clients merges (a "virtual round"), so target checks
                # compare like for like across modes
                if merges % cfg.n_clients == 0 or merges >= budget:
                    self.eval_model = self._group_average(group_models)
                    acc = self._evaluate(self.eval_model)
                    self.accuracy_per_round.append(acc)
                    if self._check_target(acc, len(self.accuracy_per_round)) \
                            or merges >= budget:
                        done = True

            # send the fresh group model back
            nbytes, seen = self._downlink_payload(group_models[g])
            transfer = self._account("down", nbytes, c.base_latency, c.bandwidth,
                                     central=True, actor=f"client{c.client_id}",
                                     when=ev.time)
            current_model[c.client_id] = seen
            base_version[c.client_id] = group_versions[g]
            if not done:
                schedule_client(c, ev.time + transfer)

        self.extras["async"] = {"merges": merges, "discarded_stale": discarded}
        self.group_models = group_models
        if not self.accuracy_per_round:
            self.eval_model = self._group_average(group_models)
            self.accuracy_per_round.append(self._evaluate(self.eval_model))

    # --- decentralised gossip mode ------------------------------------------

    def run_gossip(self) -> None:
        cfg = self.cfg
        params = self.toggles["decentralised_aggregator"]
        topology = params.get("topology", "ring")
        k = int(params.get("k", 2))
        secure_params = self.toggles.get("secure_aggregator", {})
        dp_sigma = float(secure_params.get("dp_sigma", 0.0))

        models = {c.client_id: mdl.init_weights(cfg.n_classes, cfg.n_features)
                  for c in self.clients}
        self.eval_model = self._mean_model(models)
        last_acc = self._evaluate(self.eval_model)

        for r in range(cfg.rounds):
            participants = [c for c in self.clients if self._participates(c, r)]
            participants.sort(key=lambda c: c.client_id)
            if not participants:
                self.accuracy_per_round.append(last_acc)
                continue
            for c in participants:
                self.participation[c.client_id] += 1

            trained: dict[int, np.ndarray] = {}
            compute_time: dict[int, float] = {}
            for c in participants:
                W, compute = self._train_local(c, models[c.client_id], r)
                trained[c.client_id] = W
                compute_time[c.client_id] = compute

            exchange_time: dict[int, float] = {cid: 0.0 for cid in trained}
            if len(participants) >= 2:
                # what each peer sends: possibly noised, possibly compressed
                wire: dict[int, np.ndarray] = {}
                nbytes_of: dict[int, int] = {}
                for c in participants:
                    W = trained[c.client_id]
                    if dp_sigma > 0:
                        W = sec.add_dp_noise(W, dp_sigma, cfg.seed, c.client_id, r)
                    nbytes, seen = self._uplink_payload(W)
                    wire[c.client_id] = seen
                    nbytes_of[c.client_id] = nbytes
                n_recv = gossip.exchange_counts(topology, k, len(participants))
                for c in participants:  # receiver-side accounting
                    for _ in range(n_recv):
                        t = self._account("up", nbytes_of[c.client_id],
                                          c.base_latency, c.bandwidth, central=False,
                                          actor=f"client{c.client_id}", when=self.time)
                        exchange_time[c.client_id] += t
                if topology == "ring":
                    mixed = gossip.ring_step(trained, wire)
                else:
                    mixed = gossip.random_k_step(trained, wire, k, cfg.seed, r)
                models.update(mixed)
            else:
                models.update(trained)

            round_time = max(compute_time[cid] + exchange_time[cid] for cid in trained)
            self.time += round_time
            self.version += 1
            self.eval_model = self._mean_model(models)
            acc = self._evaluate(self.eval_model)
            self.accuracy_per_round.append(acc)
            last_acc = acc
            self.log.append(self.time, "gossip_round", "fleet", 0)
            self._post_round(r, acc, [(c.client_id, trained[c.client_id], c.n_train)
                                      for c in participants])
            if self._check_target(acc, r + 1):
                break

        self.client_models = models

    def _mean_model(self, models: dict[int, np.ndarray]) -> np.ndarray:
        out = np.zeros((self.cfg.n_classes, self.cfg.n_features + 1))
        for cid in sorted(models):
            out += models[cid]
        return out / len(models)

    # --- multi-task mode ------------------------------------------------------

    def run_multitask(self) -> None:
        cfg = self.cfg
        params = self.toggles["multi_task_model_trainer"]
        n_tasks = int(params.get("n_tasks", 2))
        shared_dims = int(params.get("shared_dims", 0))
        sizes = [c.n_train for c in self.clients]
        tasks = generate_multitask_data(cfg.seed, cfg.n_clients, cfg.n_features,
                                        cfg.n_classes, n_tasks, shared_dims,
                                        sizes, cfg.label_skew_beta)
        task_models = [mdl.init_weights(cfg.n_classes, cfg.n_features)
                       for _ in range(n_tasks)]
        per_task_acc: list[list[float]] = [[] for _ in range(n_tasks)]
        secure_on = "secure_aggregator" in self.toggles
        last_acc = float(np.mean([mdl.accuracy(task_models[t], tasks[t].test_X,
                                               tasks[t].test_y)
                                  for t in range(n_tasks)]))

        for r in range(cfg.rounds):
            participants = [c for c in self._eligible(r) if self._participates(c, r)]
            participants.sort(key=lambda c: c.client_id)
            if not participants:
                self.accuracy_per_round.append(last_acc)
                continue
            for c in participants:
                self.participation[c.client_id] += 1

            broadcast_time = 0.0
            for c in participants:
                total = 0.0
                for t in range(n_tasks):
                    nbytes, _ = self._downlink_payload(task_models[t])
                    total += self._account("down", nbytes, c.base_latency, c.bandwidth,
                                           central=True, actor=f"client{c.client_id}",
                                           when=self.time)
                broadcast_time = max(broadcast_time, total)

            per_task_uploads: list[list[tuple[int, np.ndarray, int]]] = \
                [[] for _ in range(n_tasks)]
            participant_uploads: list[tuple[int, np.ndarray, int]] = []
            client_done: dict[int, float] = {}
            for c in participants:
                client_tasks = [tasks[t].clients[c.client_id] for t in range(n_tasks)]
                locals_ = train_client_tasks(task_models, client_tasks, shared_dims,
                                             cfg.local_epochs, cfg.learning_rate)
                n_total = sum(len(y) for _, y in client_tasks)
                participant_uploads.append(
                    (c.client_id, np.concatenate([mdl.flatten(w) for w in locals_]),
                     n_total))
                compute = cfg.local_epochs * n_total / c.device_speed
                transfer = 0.0
                for t in range(n_tasks):
                    if secure_on:
                        up_bytes, server_view = self.raw_bytes, locals_[t]
                    else:
                        up_bytes, server_view = self._uplink_payload(locals_[t])
                    transfer += self._account(
                        "up", up_bytes, c.base_latency, c.bandwidth, central=True,
                        actor=f"client{c.client_id}", when=self.time)
                    per_task_uploads[t].append(
                        (c.client_id, server_view, len(client_tasks[t][1])))
                client_done[c.client_id] = compute + transfer

            for t in range(n_tasks):
                task_models[t] = self._aggregate_group(
                    per_task_uploads[t], r * n_tasks + t, secure_on)
            self.version += 1
            self.time += broadcast_time + max(client_done.values())

            accs = [mdl.accuracy(task_models[t], tasks[t].test_X, tasks[t].test_y)
                    for t in range(n_tasks)]
            for t in range(n_tasks):
                per_task_acc[t].append(accs[t])
            acc = float(np.mean(accs))
            self.accuracy_per_round.append(acc)
            last_acc = acc
            self.log.append(self.time, "aggregate", "server", 0)
            self._post_round(r, acc, participant_uploads)
            if self._check_target(acc, r + 1):
                break

        self.task_models = task_models
        self.tasks = tasks
        self.extras["multi_task"] = {
            "n_tasks": n_tasks, "shared_dims": shared_dims,
            "per_task_final_accuracy": [
                (per_task_acc[t][-1] if per_task_acc[t] else last_acc)
                for t in range(n_tasks)],
        }

    # --- metrics ---------------------------------------------------------------

    def _serving_model(self, c: ClientRuntime) -> np.ndarray:
        if hasattr(self, "client_models"):
            return self.client_models[c.client_id]
        if hasattr(self, "group_models") and self.n_groups > 1:
            return self.group_models[c.group]
        return self.eval_model

    def finalize(self) -> SimMetrics:
        cfg = self.cfg
        if hasattr(self, "task_models"):
            per_client = []
            for c in self.clients:
                accs = [mdl.accuracy(self.task_models[t], *self.tasks[t].clients[c.client_id])
                        for t in range(len(self.task_models))]
                per_client.append(float(np.mean(accs)))
        else:
            per_client = [mdl.accuracy(self._serving_model(c), c.X, c.y)
                          for c in self.clients]

        if "deployment_selector" in self.toggles and not hasattr(self, "task_models"):
            per_client = self._apply_deployment(per_client)

        if self.registry is not None:
            ok, bad = self.registry.chain.verify()
            self.extras["client_registry"] = {
                "head": self.registry.chain.head, "verified": ok,
                "entries": len(self.registry.chain.entries)}
        if self.coversioning is not None:
            ok, bad = self.coversioning.chain.verify()
            self.extras["co_versioning"] = {
                "head": self.coversioning.chain.head, "verified": ok,
                "entries": len(self.coversioning.chain.entries)}
        if self.incentives is not None:
            self.extras["incentives"] = {
                str(cid): self.incentives.rewards[cid]
                for cid in sorted(self.incentives.rewards)}
        if self.trigger_rounds:
            self.extras["trigger_rounds"] = self.trigger_rounds

        final_acc = self.accuracy_per_round[-1] if self.accuracy_per_round else 0.0
        return SimMetrics(
            accuracy_per_round=[float(a) for a in self.accuracy_per_round],
            final_accuracy=float(final_acc),
            per_client_accuracy=[float(a) for a in per_client],
            accuracy_variance_across_clients=float(np.var(per_client)),
            participation_count=list(self.participation),
            mean_participation=float(np.mean(self.participation)),
            bytes_uplink=self.bytes_uplink,
            bytes_downlink=self.bytes_downlink,
            central_bytes_uplink=self.central_bytes_uplink,
            central_bytes_downlink=self.central_bytes_downlink,
            n_uplink_messages=self.n_uplink_messages,
            n_downlink_messages=self.n_downlink_messages,
            simulated_wall_time=float(self.time),
            rounds_to_target=self.rounds_to_target,
            time_to_target=self.time_to_target,
            messages_to_target=self.messages_to_target,
            event_log_digest=self.log.digest(),
            extras=self.extras,
        )

    def _apply_deployment(self, per_client: list[float]) -> list[float]:
        params = self.toggles["deployment_selector"]
        threshold = float(params.get("capability_threshold", 0.5))
        full = self.eval_model
        light_q = compression.compress(mdl.flatten(full), 4)
        light = mdl.unflatten(compression.decompress(light_q),
                              self.cfg.n_classes, self.cfg.n_features)
        models = [
            lifecycle.DeployableModel("full", threshold, self._evaluate(full)),
            lifecycle.DeployableModel("light", 0.0, self._evaluate(light)),
        ]
        max_speed = max(c.device_speed for c in self.clients)
        max_memory = max(c.memory for c in self.clients)
        caps = {c.client_id: lifecycle.device_capability(
            c.device_speed, c.memory, max_speed, max_memory) for c in self.clients}
        assignment = lifecycle.match_deployment(models, caps)
        by_id = {"full": full, "light": light}
        out = []
        for c in self.clients:
            W = by_id[assignment[c.client_id]]
            out.append(mdl.accuracy(W, c.X, c.y))
        self.extras["deployment"] = {
            "assignment": {str(cid): assignment[cid] for cid in sorted(assignment)},
            "model_test_accuracy": {m.model_id: m.accuracy for m in models},
            "capabilities": {str(cid): caps[cid] for cid in sorted(caps)},
        }
        return out


def run_simulation(cfg: SimConfig, event_log_path: Optional[str] = None) -> SimMetrics:
    """Execute one scenario and measure it. Same config, same bits out.

    `event_log_path` optionally exports the full event stream as
    line-delimited records (time, event, actor, bytes).
    """
    run = _Run(cfg)
    if "multi_task_model_trainer" in cfg.pattern_toggles:
        run.run_multitask()
    elif "decentralised_aggregator" in cfg.pattern_toggles:
        run.run_gossip()
    elif "asynchronous_aggregator" in cfg.pattern_toggles:
        run.run_async()
    else:
        run.run_sync()
    metrics = run.finalize()
    if event_log_path is not None:
        with open(event_log_path, "w", encoding="utf-8") as fh:
            fh.write(run.log.to_ldjson())
    return metrics
